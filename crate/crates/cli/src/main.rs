mod commands;
mod error;
mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "orabe", version, about = "Registered ABE with outsourced, verifiable decryption")]
struct Cli {
    /// Directory for outputs written without an explicit path.
    #[arg(long, global = true, env = "ORABE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    #[value(name = "bls12-381", alias = "real")]
    Bls12,
    Mock,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the reference strings and an empty curator state.
    Setup(SetupArgs),
    /// Generate a user key pair against the curator's current counter.
    Keygen(KeygenArgs),
    /// Register a public key with an attribute set.
    Register(RegisterArgs),
    /// Encrypt a file under an access policy.
    Encrypt(EncryptArgs),
    /// Fetch the user's helper keys and transform a ciphertext.
    Transform(TransformArgs),
    /// Final decryption of a transformed ciphertext.
    Decrypt(DecryptArgs),
    /// Prove that a transformed ciphertext is wrong.
    FraudProve(FraudProveArgs),
    /// Check a fraud proof from public data. Prints the verdict.
    FraudVerify(FraudVerifyArgs),
    /// Run a scenario file through the actor simulation.
    Simulate(SimulateArgs),
    /// Time encryption, transform and decryption against policy size.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct SetupArgs {
    /// Number of levels; instances hold 1, 2, ..., 2^l slots.
    #[arg(long = "l", value_parser = clap::value_parser!(u8).range(0..=6))]
    levels: u8,
    /// Attribute universe, whitespace or comma separated. `#` starts a comment.
    #[arg(long)]
    universe: PathBuf,
    #[arg(long, value_enum, default_value = "bls12-381")]
    backend: BackendArg,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    crs_out: Option<PathBuf>,
    #[arg(long)]
    aux_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct KeygenArgs {
    #[arg(long)]
    crs: PathBuf,
    #[arg(long)]
    aux: PathBuf,
    /// Prefix for `<name>.pk.json` and `<name>.sk.json`.
    #[arg(long, default_value = "user")]
    name: String,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct RegisterArgs {
    #[arg(long)]
    crs: PathBuf,
    #[arg(long)]
    aux: PathBuf,
    #[arg(long)]
    pk: PathBuf,
    /// Comma separated attribute names.
    #[arg(long, value_delimiter = ',', required = true)]
    attrs: Vec<String>,
    #[arg(long)]
    aux_out: Option<PathBuf>,
    #[arg(long)]
    mpk_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EncryptArgs {
    #[arg(long)]
    mpk: PathBuf,
    /// Boolean formula such as `(a and b) or c`.
    #[arg(long)]
    policy: String,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[arg(long)]
    aux: PathBuf,
    #[arg(long)]
    pk: PathBuf,
    #[arg(long)]
    ct: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DecryptArgs {
    #[arg(long)]
    sk: PathBuf,
    #[arg(long)]
    transformed: PathBuf,
    #[arg(long)]
    ct: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FraudProveArgs {
    #[arg(long)]
    sk: PathBuf,
    #[arg(long)]
    pk: PathBuf,
    #[arg(long)]
    transformed: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FraudVerifyArgs {
    #[arg(long)]
    proof: PathBuf,
    #[arg(long)]
    pk: PathBuf,
    #[arg(long)]
    transformed: PathBuf,
    #[arg(long)]
    ct: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Scenario in TOML.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    window: Option<u64>,
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Omit wall-clock timings so reruns are byte-identical.
    #[arg(long)]
    no_timings: bool,
    /// Also write the ledger event log as JSON lines.
    #[arg(long)]
    events_out: Option<PathBuf>,
    /// Report destination; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Policy sizes as `A..B` (inclusive, stepped by `--step`) or a comma list.
    #[arg(long, default_value = "10..100")]
    attrs: String,
    #[arg(long, default_value_t = 10)]
    step: usize,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 100)]
    decrypt_reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "bls12-381")]
    backend: BackendArg,
    /// CSV destination; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let out_dir = cli.out_dir;
    match cli.command {
        Command::Setup(a) => commands::setup(&out_dir, a),
        Command::Keygen(a) => commands::keygen(&out_dir, a),
        Command::Register(a) => commands::register(&out_dir, a),
        Command::Encrypt(a) => commands::encrypt(&out_dir, a),
        Command::Transform(a) => commands::transform(&out_dir, a),
        Command::Decrypt(a) => commands::decrypt(&out_dir, a),
        Command::FraudProve(a) => commands::fraud_prove(&out_dir, a),
        Command::FraudVerify(a) => commands::fraud_verify(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Bench(a) => commands::bench(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("orabe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
