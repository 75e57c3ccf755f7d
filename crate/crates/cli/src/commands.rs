use std::io::Write;
use std::path::Path;

use rand::rngs::OsRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use orabe::actors::{run_scenario, Backend, Scenario, ScenarioError};
use orabe::algebra::AccessPolicy;
use orabe::bench::{self, BenchConfig};
use orabe::fraudproof::{fraud_prove as prove, fraud_verify as verify, FraudProof};
use orabe::group::BackendId;
use orabe::orabe::{
    self as scheme, AuxState, InstanceTransform, MultiCiphertext, MultiCrs, MultiMasterPublicKey,
    TransformOutcome, UserPublicKey, UserSecretKey,
};
use orabe::osrabe::{AttrSet, Decryption};
use orabe::{Bls12, MockGroup, PairingGroup};

use crate::error::CliError;
use crate::files::{self, backend_from_arg, backend_of, load, output_path, save};
use crate::{
    BackendArg, BenchArgs, DecryptArgs, EncryptArgs, FraudProveArgs, FraudVerifyArgs, KeygenArgs,
    RegisterArgs, SetupArgs, SimulateArgs, TransformArgs,
};

/// Calls `$f::<G>(args..)` with `G` chosen by a backend id.
macro_rules! dispatch {
    ($id:expr, $f:ident($($arg:expr),*)) => {{
        let id: BackendId = $id;
        if id == Bls12::BACKEND {
            $f::<Bls12>($($arg),*)
        } else if id == MockGroup::BACKEND {
            $f::<MockGroup>($($arg),*)
        } else {
            Err(CliError::input(format!("unsupported backend {}", id.name())))
        }
    }};
}

fn rng_for(seed: Option<u64>) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed.unwrap_or_else(|| OsRng.next_u64()))
}

pub fn setup(out_dir: &Path, a: SetupArgs) -> Result<(), CliError> {
    dispatch!(backend_from_arg(a.backend), setup_with(out_dir, &a))
}

fn setup_with<G: PairingGroup>(out_dir: &Path, a: &SetupArgs) -> Result<(), CliError> {
    let universe = files::parse_universe(&files::read_text(&a.universe)?);
    if universe.is_empty() {
        return Err(CliError::input("attribute universe is empty"));
    }
    let mut rng = rng_for(a.seed);
    let crs = scheme::setup::<G, _, _>(a.levels as usize, &universe, &mut rng)
        .map_err(|e| CliError::input(e.to_string()))?;
    let aux = AuxState::new(&crs);
    save(&output_path(out_dir, a.crs_out.clone(), "crs.json"), &crs)?;
    save(&output_path(out_dir, a.aux_out.clone(), "aux.json"), &aux)
}

pub fn keygen(out_dir: &Path, a: KeygenArgs) -> Result<(), CliError> {
    dispatch!(backend_of(&a.crs)?, keygen_with(out_dir, &a))
}

fn keygen_with<G: PairingGroup>(out_dir: &Path, a: &KeygenArgs) -> Result<(), CliError> {
    let crs: MultiCrs<G> = load(&a.crs)?;
    let aux: AuxState<G> = load(&a.aux)?;
    let keys = scheme::keygen(&crs, &aux, &mut rng_for(a.seed))
        .map_err(|e| CliError::domain(e.to_string()))?;
    save(&out_dir.join(format!("{}.pk.json", a.name)), &keys.public)?;
    save(&out_dir.join(format!("{}.sk.json", a.name)), &keys.secret)
}

pub fn register(out_dir: &Path, a: RegisterArgs) -> Result<(), CliError> {
    dispatch!(backend_of(&a.crs)?, register_with(out_dir, &a))
}

fn register_with<G: PairingGroup>(out_dir: &Path, a: &RegisterArgs) -> Result<(), CliError> {
    let crs: MultiCrs<G> = load(&a.crs)?;
    let aux: AuxState<G> = load(&a.aux)?;
    let pk: UserPublicKey<G> = load(&a.pk)?;
    let attrs: AttrSet = a.attrs.iter().map(|s| s.trim().to_string()).collect();
    if let Some(unknown) = attrs.iter().find(|x| !crs.universe().contains(x)) {
        return Err(CliError::input(format!("attribute {unknown} is not in the universe")));
    }
    let (mpk, next) =
        scheme::register(&crs, &aux, &pk, &attrs).map_err(|e| CliError::domain(e.to_string()))?;
    save(&output_path(out_dir, a.aux_out.clone(), "aux.json"), &next)?;
    save(&output_path(out_dir, a.mpk_out.clone(), "mpk.json"), &mpk)
}

pub fn encrypt(out_dir: &Path, a: EncryptArgs) -> Result<(), CliError> {
    dispatch!(backend_of(&a.mpk)?, encrypt_with(out_dir, &a))
}

fn encrypt_with<G: PairingGroup>(out_dir: &Path, a: &EncryptArgs) -> Result<(), CliError> {
    let mpk: MultiMasterPublicKey<G> = load(&a.mpk)?;
    let policy: AccessPolicy = a
        .policy
        .parse()
        .map_err(|e| CliError::input(format!("policy: {e}")))?;
    let message = files::read_bytes(&a.input)?;
    let ct = scheme::encrypt(&mpk, &policy, &message, &mut rng_for(a.seed))
        .map_err(|e| CliError::domain(e.to_string()))?;
    save(&output_path(out_dir, a.out.clone(), "ct.json"), &ct)
}

pub fn transform(out_dir: &Path, a: TransformArgs) -> Result<(), CliError> {
    dispatch!(backend_of(&a.ct)?, transform_with(out_dir, &a))
}

fn transform_with<G: PairingGroup>(out_dir: &Path, a: &TransformArgs) -> Result<(), CliError> {
    let aux: AuxState<G> = load(&a.aux)?;
    let pk: UserPublicKey<G> = load(&a.pk)?;
    let ct: MultiCiphertext<G> = load(&a.ct)?;
    let bundle = scheme::update(&aux, &pk)
        .ok_or_else(|| CliError::domain("⊥: public key is not registered"))?;
    let result = match scheme::transform_full(&bundle, &ct) {
        TransformOutcome::Transformed(t) => t,
        TransformOutcome::Unsatisfied => {
            return Err(CliError::domain("⊥: attributes do not satisfy the policy"))
        }
        TransformOutcome::StaleHelperKey => {
            return Err(CliError::domain("⊥: curator state is older than the ciphertext"))
        }
        TransformOutcome::PredatesRegistration => {
            return Err(CliError::domain("⊥: ciphertext predates the registration"))
        }
    };
    save(&output_path(out_dir, a.out.clone(), "transformed.json"), &result)
}

pub fn decrypt(out_dir: &Path, a: DecryptArgs) -> Result<(), CliError> {
    dispatch!(backend_of(&a.ct)?, decrypt_with(out_dir, &a))
}

fn decrypt_with<G: PairingGroup>(out_dir: &Path, a: &DecryptArgs) -> Result<(), CliError> {
    let sk: UserSecretKey<G> = load(&a.sk)?;
    let transformed: InstanceTransform<G> = load(&a.transformed)?;
    let ct: MultiCiphertext<G> = load(&a.ct)?;
    match scheme::decrypt(&sk, &transformed, &ct) {
        Ok(Decryption::Plaintext(m)) => {
            files::write_bytes(&output_path(out_dir, a.out.clone(), "decrypted.bin"), &m)
        }
        Ok(Decryption::Rejected) => Err(CliError::domain("⊥: transformed ciphertext rejected")),
        Err(e) => Err(CliError::domain(format!("⊥: {e}"))),
    }
}

pub fn fraud_prove(out_dir: &Path, a: FraudProveArgs) -> Result<(), CliError> {
    dispatch!(backend_of(&a.transformed)?, fraud_prove_with(out_dir, &a))
}

fn fraud_prove_with<G: PairingGroup>(out_dir: &Path, a: &FraudProveArgs) -> Result<(), CliError> {
    let sk: UserSecretKey<G> = load(&a.sk)?;
    let pk: UserPublicKey<G> = load(&a.pk)?;
    let transformed: InstanceTransform<G> = load(&a.transformed)?;
    let k = transformed.instance;
    let (Some(sk_k), Some(pk_k)) = (sk.keys.get(k), pk.keys.get(k)) else {
        return Err(CliError::input(format!("key has no instance {k}")));
    };
    let proof = prove(sk_k, &transformed.result, &pk_k.commit, &mut rng_for(a.seed));
    save(&output_path(out_dir, a.out.clone(), "proof.json"), &proof)
}

pub fn fraud_verify(a: FraudVerifyArgs) -> Result<(), CliError> {
    dispatch!(backend_of(&a.ct)?, fraud_verify_with(&a))
}

fn fraud_verify_with<G: PairingGroup>(a: &FraudVerifyArgs) -> Result<(), CliError> {
    let proof: FraudProof<G> = load(&a.proof)?;
    let pk: UserPublicKey<G> = load(&a.pk)?;
    let transformed: InstanceTransform<G> = load(&a.transformed)?;
    let ct: MultiCiphertext<G> = load(&a.ct)?;
    let k = transformed.instance;
    let (Some(pk_k), Some(Some(ct_k))) = (pk.keys.get(k), ct.instances.get(k)) else {
        return Err(CliError::input(format!("no instance {k} in key or ciphertext")));
    };
    let fraud = verify(&proof, &transformed.result, ct_k, &pk_k.commit);
    println!("verdict {}", u8::from(fraud));
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let mut scenario = Scenario::from_toml(&files::read_text(&a.scenario)?).map_err(scenario_error)?;
    if let Some(seed) = a.seed {
        scenario.seed = seed;
    }
    if let Some(window) = a.window {
        scenario.window = window;
    }
    if let Some(b) = a.backend {
        scenario.backend = match b {
            BackendArg::Bls12 => Backend::Bls12_381,
            BackendArg::Mock => Backend::Mock,
        };
    }
    scenario.validate().map_err(scenario_error)?;
    let mut report = run_scenario(&scenario).map_err(scenario_error)?;
    if a.no_timings {
        report = report.without_timings();
    }
    if let Some(path) = &a.events_out {
        let lines: String = report
            .events
            .iter()
            .map(|e| serde_json::to_string(e).expect("events serialize") + "\n")
            .collect();
        files::write_bytes(path, lines.as_bytes())?;
    }
    let mut json = report.to_json();
    json.push('\n');
    emit(a.out.as_deref(), json.as_bytes())
}

fn scenario_error(e: ScenarioError) -> CliError {
    match e {
        ScenarioError::Config(_) => CliError::input(e.to_string()),
        ScenarioError::Step { .. } => CliError::domain(e.to_string()),
    }
}

pub fn bench(a: BenchArgs) -> Result<(), CliError> {
    let config = BenchConfig {
        sizes: files::parse_sizes(&a.attrs, a.step)?,
        reps: a.reps.max(1),
        decrypt_reps: a.decrypt_reps.max(1),
        seed: a.seed,
    };
    let rows = match a.backend {
        BackendArg::Bls12 => bench::run::<Bls12>(&config),
        BackendArg::Mock => bench::run::<MockGroup>(&config),
    }
    .map_err(|e| CliError::domain(e.to_string()))?;
    emit(a.out.as_deref(), bench::to_csv(&rows).as_bytes())
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => files::write_bytes(p, bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::input(format!("stdout: {e}"))),
    }
}
