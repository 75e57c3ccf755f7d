//! Cost of the scheme as the policy grows.
//!
//! Each row encrypts under an AND of `attrs` attributes for a single-slot
//! system whose only user holds them all, then times transform and final
//! decryption and records serialized sizes, the target-group
//! exponentiations spent in decryption and the ledger work for one
//! challenged task. Repetitions are interleaved across sizes so slow drift
//! affects every row alike.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::algebra::AccessPolicy;
use crate::codec::Artifact;
use crate::fraudproof::fraud_prove;
use crate::group::{count_ops, PairingGroup};
use crate::ledger::{Function, Ledger, LedgerConfig, OpCounter};
use crate::osrabe::{self, AttrSet, Ciphertext, Decryption, KeyPair, MasterPublicKey, SchemeError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    /// Repetitions of encrypt and transform per size.
    pub reps: usize,
    /// Repetitions of the final decryption per size.
    pub decrypt_reps: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: (10..=100).step_by(10).collect(),
            reps: 3,
            decrypt_reps: 100,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub attrs: usize,
    pub encrypt_ms: f64,
    pub transform_ms: f64,
    pub decrypt_ms: f64,
    pub ct_bytes: usize,
    pub ct_prime_bytes: usize,
    pub decrypt_target_exps: u64,
    /// Ledger counters for one task that is submitted, challenged and
    /// settled, keyed by contract function.
    pub ledger: BTreeMap<String, OpCounter>,
}

impl BenchRow {
    fn ledger_total(&self) -> OpCounter {
        self.ledger.values().fold(OpCounter::default(), |acc, c| OpCounter {
            calls: acc.calls + c.calls,
            accepted: acc.accepted + c.accepted,
            storage_writes: acc.storage_writes + c.storage_writes,
            bytes_written: acc.bytes_written + c.bytes_written,
        })
    }
}

struct Fixture<G: PairingGroup> {
    attrs: usize,
    key: KeyPair<G>,
    mpk: MasterPublicKey<G>,
    helper: osrabe::HelperKey<G>,
    policy: AccessPolicy,
    ct: Ciphertext<G>,
}

fn fixture<G: PairingGroup>(attrs: usize, rng: &mut ChaCha20Rng) -> Result<Fixture<G>, SchemeError> {
    let universe: Vec<String> = (0..attrs).map(|i| format!("attr_{i:03}")).collect();
    let crs = osrabe::setup::<G, _, _>(1, &universe, rng)?;
    let key = osrabe::keygen(&crs, 1, rng)?;
    let held: AttrSet = universe.iter().cloned().collect();
    let (mpk, mut helpers) = osrabe::register(&crs, &[(key.public.clone(), held)])?;
    let policy = AccessPolicy::all_of(universe).ok_or(SchemeError::EmptyUniverse)?;
    let ct = osrabe::encrypt(&mpk, &policy, b"benchmark payload", rng)?;
    Ok(Fixture {
        attrs,
        key,
        mpk,
        helper: helpers.remove(0),
        policy,
        ct,
    })
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Ledger work for one task whose result is challenged, with payload sizes
/// taken from real artifacts.
fn ledger_costs(tag: &[u8], result: &[u8], proof: &[u8]) -> BTreeMap<String, OpCounter> {
    let mut l = Ledger::new(LedgerConfig::new("pv", "kc"), [("du", 10)]);
    l.publish_state("kc", 1, &[0; 32], &[0; 32]).expect("fresh ledger");
    l.publish_tag("do", "ct/0", tag).expect("fresh tag");
    let task = l.create_task("du", "ct/0", 10).expect("funded");
    l.submit_result("dcs", task, result).expect("open task");
    l.publish_fraud_proof("du", task, proof).expect("inside window");
    l.publish_verification_result("pv", task, 0).expect("challenged");
    l.op_counters()
        .iter()
        .filter(|(f, _)| **f != Function::AdvanceBlock)
        .map(|(f, c)| (f.to_string(), *c))
        .collect()
}

pub fn run<G: PairingGroup>(config: &BenchConfig) -> Result<Vec<BenchRow>, SchemeError> {
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let fixtures = config
        .sizes
        .iter()
        .map(|&n| fixture::<G>(n, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    let mut encrypt = vec![0.0; fixtures.len()];
    let mut transform = vec![0.0; fixtures.len()];
    let mut decrypt = vec![0.0; fixtures.len()];
    let mut results = Vec::with_capacity(fixtures.len());

    for f in &fixtures {
        results.push(osrabe::transform(&f.helper, &f.ct).ok_or(SchemeError::Corrupted)?);
    }
    for _ in 0..config.reps {
        for (i, f) in fixtures.iter().enumerate() {
            let start = Instant::now();
            let ct = osrabe::encrypt(&f.mpk, &f.policy, b"benchmark payload", &mut rng)?;
            encrypt[i] += ms(start);
            let start = Instant::now();
            osrabe::transform(&f.helper, &ct).ok_or(SchemeError::Corrupted)?;
            transform[i] += ms(start);
        }
    }
    for _ in 0..config.decrypt_reps {
        for (i, f) in fixtures.iter().enumerate() {
            let start = Instant::now();
            let m = osrabe::decrypt_user(&f.key.secret, &results[i], &f.ct)?;
            decrypt[i] += ms(start);
            if m == Decryption::Rejected {
                return Err(SchemeError::Corrupted);
            }
        }
    }

    let reps = config.reps.max(1) as f64;
    let decrypt_reps = config.decrypt_reps.max(1) as f64;
    fixtures
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (_, ops) = count_ops(|| osrabe::decrypt_user(&f.key.secret, &results[i], &f.ct));
            let proof = fraud_prove(&f.key.secret, &results[i], &f.key.public.commit, &mut rng);
            let result_bytes = results[i].to_bytes();
            Ok(BenchRow {
                attrs: f.attrs,
                encrypt_ms: encrypt[i] / reps,
                transform_ms: transform[i] / reps,
                decrypt_ms: decrypt[i] / decrypt_reps,
                ct_bytes: f.ct.to_bytes().len(),
                ct_prime_bytes: result_bytes.len(),
                decrypt_target_exps: ops.target_exp,
                ledger: ledger_costs(&f.ct.tag, &result_bytes, &proof.to_wire()),
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "attrs,encrypt_ms,transform_ms,decrypt_ms,ct_bytes,ct_prime_bytes,decrypt_target_exps,ledger_calls,ledger_writes,ledger_bytes";

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let l = r.ledger_total();
        let _ = writeln!(
            out,
            "{},{:.4},{:.4},{:.4},{},{},{},{},{},{}",
            r.attrs,
            r.encrypt_ms,
            r.transform_ms,
            r.decrypt_ms,
            r.ct_bytes,
            r.ct_prime_bytes,
            r.decrypt_target_exps,
            l.calls,
            l.storage_writes,
            l.bytes_written
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::MockGroup;

    #[test]
    fn mock_rows_have_constant_tail() {
        let config = BenchConfig {
            sizes: vec![10, 20, 30],
            reps: 1,
            decrypt_reps: 2,
            seed: 3,
        };
        let rows = run::<MockGroup>(&config).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.decrypt_target_exps == 1));
        assert!(rows.windows(2).all(|w| w[0].ct_prime_bytes == w[1].ct_prime_bytes));
        assert!(rows.windows(2).all(|w| w[0].ct_bytes < w[1].ct_bytes));
        assert!(rows.windows(2).all(|w| w[0].ledger == w[1].ledger));
        let csv = to_csv(&rows);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("10,"));
    }
}
