use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use crate::codec::{content_digest, Artifact};
use crate::fraudproof::{fraud_prove, fraud_verify, FraudProof};
use crate::group::{Bls12, GroupElement, MockGroup, PairingGroup};
use crate::ledger::{Event, Ledger, LedgerConfig, OpCounter, TaskId, TaskStatus};
use crate::orabe::{
    self, snapshot_digest, AuxState, InstanceTransform, MultiCiphertext, TransformOutcome,
    UserKeys, UserPublicKey,
};
use crate::osrabe::Decryption;

use super::{Backend, ContentStore, DcsStrategy, DuStrategy, Scenario};

const KC: &str = "kc";
const DO: &str = "do";
const DCS: &str = "dcs";
const PV: &str = "pv";
const CLOCK: &str = "clock";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Step {
    Setup,
    Registration,
    Encryption,
    TaskCreation,
    Transform,
    UserDecryption,
    Dispute,
    Verification,
    Settlement,
    Audit,
    Fairness,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("scenario config: {0}")]
    Config(String),
    #[error("step {step} failed: {detail}")]
    Step { step: Step, detail: String },
}

fn fail(step: Step) -> impl Fn(String) -> ScenarioError {
    move |detail| ScenarioError::Step { step, detail }
}

fn failed<E: fmt::Display>(step: Step) -> impl Fn(E) -> ScenarioError {
    move |e| ScenarioError::Step {
        step,
        detail: e.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    /// The user recovered the message and the server was paid.
    Delivered,
    /// A fraud proof was upheld and the user got the reward back.
    Refunded,
    /// A challenge was rejected and the server was paid.
    SolverPaidDespiteChallenge,
    /// Nobody answered and the user cancelled the task.
    Expired,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub outcome: Outcome,
    pub message_recovered: bool,
    pub result_correct: bool,
    pub solver_paid: bool,
    pub verdict: Option<u8>,
    pub instance: usize,
    pub balances: BTreeMap<String, u64>,
    pub events: Vec<Event>,
    pub op_counters: BTreeMap<String, OpCounter>,
    pub stored_objects: usize,
    /// Wall-clock milliseconds per phase; excluded from determinism checks.
    pub timings_ms: BTreeMap<String, f64>,
}

impl ScenarioReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with timings cleared, for replay comparisons.
    pub fn without_timings(&self) -> Self {
        Self {
            timings_ms: BTreeMap::new(),
            ..self.clone()
        }
    }
}

/// Runs a scenario with honest parties. A policy nobody satisfies ends in
/// [`Outcome::Expired`].
pub fn run_happy_case(s: &Scenario) -> Result<ScenarioReport, ScenarioError> {
    if s.expects_dispute() {
        return Err(ScenarioError::Config(
            "the happy case needs an honest server and requester".into(),
        ));
    }
    let report = run_scenario(s)?;
    match report.outcome {
        Outcome::Delivered if report.message_recovered && report.solver_paid => Ok(report),
        Outcome::Expired => Ok(report),
        other => Err(fail(Step::Settlement)(format!("honest run ended {other:?}"))),
    }
}

/// Runs a scenario where the server cheats or the requester challenges a
/// correct result.
pub fn run_dispute_case(s: &Scenario) -> Result<ScenarioReport, ScenarioError> {
    if !s.expects_dispute() {
        return Err(ScenarioError::Config(
            "a dispute needs a dishonest server or an always-challenging requester".into(),
        ));
    }
    let report = run_scenario(s)?;
    let expected = if s.dcs_strategy == DcsStrategy::Honest {
        Outcome::SolverPaidDespiteChallenge
    } else {
        Outcome::Refunded
    };
    if report.outcome == expected || report.outcome == Outcome::Expired {
        Ok(report)
    } else {
        Err(fail(Step::Settlement)(format!(
            "expected {expected:?}, ended {:?}",
            report.outcome
        )))
    }
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioReport, ScenarioError> {
    s.validate()?;
    match s.backend {
        Backend::Mock => Simulation::<MockGroup>::run(s),
        Backend::Bls12_381 => Simulation::<Bls12>::run(s),
    }
}

/// Public lookup from account to registration counter, kept off-ledger by
/// the curator.
type Directory = BTreeMap<String, u64>;

struct Simulation<G: PairingGroup> {
    rng: ChaCha20Rng,
    store: ContentStore,
    ledger: Ledger,
    directory: Directory,
    timings: BTreeMap<String, f64>,
    _group: std::marker::PhantomData<G>,
}

impl<G: PairingGroup> Simulation<G> {
    fn timed<T>(&mut self, phase: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let start = Instant::now();
        let out = f(self);
        self.timings
            .insert(phase.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }

    fn run(s: &Scenario) -> Result<ScenarioReport, ScenarioError> {
        let accounts: Vec<String> = (0..s.users.len()).map(|i| format!("du-{i}")).collect();
        let genesis = accounts
            .iter()
            .map(|a| (a.clone(), s.balance))
            .chain([(DCS.to_string(), 0)]);
        let mut sim = Self {
            rng: ChaCha20Rng::seed_from_u64(s.seed),
            store: ContentStore::new(),
            ledger: Ledger::new(LedgerConfig::new(PV, KC).with_window(s.window), genesis),
            directory: Directory::new(),
            timings: BTreeMap::new(),
            _group: std::marker::PhantomData,
        };
        let policy = s.parsed_policy()?;
        let message = s.message.as_bytes();

        let crs = sim.timed("setup", |sim| {
            orabe::setup::<G, _, _>(s.levels, &s.universe, &mut sim.rng).map_err(failed(Step::Setup))
        })?;

        // Key curator registers everyone and publishes each state.
        let (aux, users) = sim.timed("registration", |sim| -> Result<_, ScenarioError> {
            let mut aux = AuxState::new(&crs);
            let mut users: Vec<UserKeys<G>> = Vec::new();
            for (i, account) in accounts.iter().enumerate() {
                let keys = orabe::keygen(&crs, &aux, &mut sim.rng).map_err(failed(Step::Registration))?;
                let (_, next) = orabe::register(&crs, &aux, &keys.public, &s.user_attrs(i))
                    .map_err(failed(Step::Registration))?;
                let pk_bytes = keys.public.to_bytes();
                let aux_bytes = next.to_bytes();
                let pk_digest = content_digest(&pk_bytes);
                let aux_digest = content_digest(&aux_bytes);
                sim.store.put(pk_bytes);
                sim.store.put(aux_bytes);
                sim.ledger
                    .publish_state(KC, next.ctr, &pk_digest, &aux_digest)
                    .map_err(failed(Step::Registration))?;
                sim.directory.insert(account.clone(), keys.public.ctr);
                aux = next;
                users.push(keys);
            }
            Ok((aux, users))
        })?;

        // Data owner encrypts, uploads and publishes one tag per instance.
        let (ct, ct_key) = sim.timed("encryption", |sim| -> Result<_, ScenarioError> {
            let ct = orabe::encrypt(&aux.mpk, &policy, message, &mut sim.rng)
                .map_err(failed(Step::Encryption))?;
            let ct_key = sim.store.put(ct.to_bytes());
            for (k, c) in ct.instances.iter().enumerate() {
                if let Some(c) = c {
                    sim.ledger
                        .publish_tag(DO, &format!("{ct_key}/{k}"), &c.tag)
                        .map_err(failed(Step::Encryption))?;
                }
            }
            Ok((ct, ct_key))
        })?;

        // Requester opens a task on the instance its helper key will use.
        let requester = &accounts[s.requester];
        let user = &users[s.requester];
        let instance = orabe::matching_instance(user.public.ctr, ct.ctr, s.levels)
            .ok_or_else(|| fail(Step::TaskCreation)("ciphertext predates the requester".into()))?;
        let task = sim
            .ledger
            .create_task(requester, &format!("{ct_key}/{instance}"), s.reward)
            .map_err(failed(Step::TaskCreation))?;

        let submitted = sim.timed("transform", |sim| sim.serve(task, &aux, s.dcs_strategy))?;

        let mut message_recovered = false;
        let mut result_correct = false;
        if submitted {
            let result = sim.stored_result(task);
            let decoded = InstanceTransform::<G>::from_bytes(&result)
                .ok()
                .filter(|t| t.instance == instance);
            let decryption = sim.timed("user_decrypt", |_| {
                decoded.as_ref().map(|t| orabe::decrypt(&user.secret, t, &ct))
            });
            message_recovered = matches!(
                &decryption,
                Some(Ok(Decryption::Plaintext(m))) if m.as_slice() == message
            );
            // Oracle for fairness, computed from the secret key directly.
            result_correct = message_recovered;

            let challenge = !message_recovered || s.du_strategy == DuStrategy::AlwaysChallenge;
            if challenge {
                sim.timed("dispute", |sim| -> Result<(), ScenarioError> {
                    let proof = match &decoded {
                        Some(t) => fraud_prove(
                            &user.secret.keys[instance],
                            &t.result,
                            &user.public.keys[instance].commit,
                            &mut sim.rng,
                        )
                        .to_wire(),
                        // Nothing to prove against an undecodable result.
                        None => Vec::new(),
                    };
                    sim.ledger
                        .publish_fraud_proof(requester, task, &proof)
                        .map_err(failed(Step::Dispute))?;
                    let verdict = public_verdict::<G>(&sim.store, &sim.ledger, &sim.directory, task)
                        .map_err(fail(Step::Verification))?;
                    sim.ledger
                        .publish_verification_result(PV, task, verdict)
                        .map_err(failed(Step::Verification))
                })?;
            } else {
                sim.timed("settlement", |sim| -> Result<(), ScenarioError> {
                    sim.ledger
                        .advance_block(CLOCK, s.window)
                        .map_err(failed(Step::Settlement))?;
                    sim.ledger.claim_reward(DCS, task).map_err(failed(Step::Settlement))
                })?;
            }
        } else {
            sim.ledger
                .advance_block(CLOCK, 2 * s.window)
                .map_err(failed(Step::Settlement))?;
            sim.ledger
                .cancel_task(requester, task)
                .map_err(failed(Step::Settlement))?;
        }

        audit_state_log::<G>(&sim.store, &sim.ledger).map_err(fail(Step::Audit))?;
        sim.report(task, instance, message_recovered, result_correct)
    }

    /// The server fetches the ciphertext and the requester's helper keys,
    /// transforms, and submits according to its strategy. Returns whether
    /// anything was submitted.
    fn serve(&mut self, task: TaskId, aux: &AuxState<G>, strategy: DcsStrategy) -> Result<bool, ScenarioError> {
        let record = self
            .ledger
            .task(task)
            .cloned()
            .ok_or_else(|| fail(Step::Transform)("task vanished".into()))?;
        let (ct_key, _) = split_ciphertext_id(&record.ciphertext_id).map_err(fail(Step::Transform))?;
        let ct = self
            .store
            .get(ct_key)
            .ok_or_else(|| fail(Step::Transform)("ciphertext not in store".into()))
            .and_then(|b| MultiCiphertext::<G>::from_bytes(b).map_err(failed(Step::Transform)))?;
        let pk = registered_key::<G>(&self.store, &self.ledger, &self.directory, &record.creator)
            .map_err(fail(Step::Transform))?;
        let bundle = orabe::update(aux, &pk)
            .ok_or_else(|| fail(Step::Transform)("requester is not registered".into()))?;
        let TransformOutcome::Transformed(mut out) = orabe::transform_full(&bundle, &ct) else {
            return Ok(false);
        };
        let bytes = match strategy {
            DcsStrategy::Honest => out.to_bytes(),
            DcsStrategy::CorruptC1 => {
                out.result.masked = out.result.masked.op(&self.non_identity());
                out.to_bytes()
            }
            DcsStrategy::CorruptC2 => {
                out.result.unmask_base = out.result.unmask_base.op(&self.non_identity());
                out.to_bytes()
            }
            DcsStrategy::Garbage => {
                let mut junk = vec![0u8; 64];
                self.rng.fill_bytes(&mut junk);
                junk
            }
        };
        self.ledger
            .submit_result(DCS, task, &bytes)
            .map_err(failed(Step::Transform))?;
        Ok(true)
    }

    fn non_identity(&mut self) -> G::Target {
        loop {
            let x = G::Target::random(&mut self.rng);
            if !x.is_identity() {
                return x;
            }
        }
    }

    fn stored_result(&self, task: TaskId) -> Vec<u8> {
        self.ledger
            .task(task)
            .and_then(|t| t.result.clone())
            .unwrap_or_default()
    }

    fn report(
        self,
        task: TaskId,
        instance: usize,
        message_recovered: bool,
        result_correct: bool,
    ) -> Result<ScenarioReport, ScenarioError> {
        let record = self.ledger.task(task).expect("task exists");
        let solver_paid = self
            .ledger
            .events()
            .iter()
            .filter_map(|e| e.payout.as_ref())
            .any(|p| p.task == task && p.to == DCS);
        let outcome = match (record.status, &record.proof, record.verdict) {
            (TaskStatus::ResolvedPaid, None, _) => Outcome::Delivered,
            (TaskStatus::ResolvedPaid, Some(_), _) => Outcome::SolverPaidDespiteChallenge,
            (TaskStatus::ResolvedRefunded, _, Some(1)) => Outcome::Refunded,
            (TaskStatus::ResolvedRefunded, _, _) => Outcome::Expired,
            (status, _, _) => {
                return Err(fail(Step::Settlement)(format!("task left in {status:?}")));
            }
        };
        if record.result.is_some() && solver_paid != result_correct {
            return Err(fail(Step::Fairness)(format!(
                "solver paid = {solver_paid} but result correct = {result_correct}"
            )));
        }
        if !self.ledger.is_conserved() {
            return Err(fail(Step::Fairness)("token supply changed".into()));
        }
        Ok(ScenarioReport {
            outcome,
            message_recovered,
            result_correct,
            solver_paid,
            verdict: record.verdict,
            instance,
            balances: self.ledger.balances().clone(),
            events: self.ledger.events().to_vec(),
            op_counters: self
                .ledger
                .op_counters()
                .iter()
                .map(|(f, c)| (f.to_string(), *c))
                .collect(),
            stored_objects: self.store.len(),
            timings_ms: self.timings,
        })
    }
}

fn split_ciphertext_id(id: &str) -> Result<(&str, usize), String> {
    let (key, k) = id
        .rsplit_once('/')
        .ok_or_else(|| format!("ciphertext id {id} has no instance"))?;
    let k = k.parse().map_err(|_| format!("bad instance in {id}"))?;
    Ok((key, k))
}

/// The requester's public key, fetched by the digest the curator published.
fn registered_key<G: PairingGroup>(
    store: &ContentStore,
    ledger: &Ledger,
    directory: &Directory,
    account: &str,
) -> Result<UserPublicKey<G>, String> {
    let ctr = *directory
        .get(account)
        .ok_or_else(|| format!("{account} is not registered"))?;
    let record = ledger
        .state_log()
        .iter()
        .find(|r| r.ctr == ctr + 1)
        .ok_or_else(|| format!("no published state for counter {ctr}"))?;
    let bytes = store
        .get(&record.pk_digest)
        .ok_or_else(|| "published public key is not in the store".to_string())?;
    let pk = UserPublicKey::<G>::from_bytes(bytes).map_err(|e| e.to_string())?;
    if pk.ctr != ctr {
        return Err("published public key has the wrong counter".into());
    }
    Ok(pk)
}

/// The verifier's decision using only public data. A result that does not
/// decode, or decodes for the wrong instance, is fraud by definition; a
/// proof that does not decode fails to establish fraud.
fn public_verdict<G: PairingGroup>(
    store: &ContentStore,
    ledger: &Ledger,
    directory: &Directory,
    task: TaskId,
) -> Result<u8, String> {
    let record = ledger.task(task).ok_or("unknown task")?;
    let (ct_key, instance) = split_ciphertext_id(&record.ciphertext_id)?;
    let ct = MultiCiphertext::<G>::from_bytes(store.get(ct_key).ok_or("ciphertext not in store")?)
        .map_err(|e| e.to_string())?;
    let ct_k = ct
        .instances
        .get(instance)
        .and_then(Option::as_ref)
        .ok_or("no ciphertext component for the task")?;
    let result = record.result.as_deref().unwrap_or_default();
    let Some(transformed) = InstanceTransform::<G>::from_bytes(result)
        .ok()
        .filter(|t| t.instance == instance)
    else {
        return Ok(1);
    };
    let pk = registered_key::<G>(store, ledger, directory, &record.creator)?;
    let Ok(proof) = FraudProof::<G>::from_wire(record.proof.as_deref().unwrap_or_default()) else {
        return Ok(0);
    };
    let fraud = fraud_verify(&proof, &transformed.result, ct_k, &pk.keys[instance].commit);
    Ok(u8::from(fraud))
}

/// Checks every published state against the stored snapshots: the digests
/// must match the stored bytes, the bytes must decode and the counters must
/// line up.
pub fn audit_state_log<G: PairingGroup>(store: &ContentStore, ledger: &Ledger) -> Result<(), String> {
    for record in ledger.state_log() {
        let aux_bytes = store
            .get(&record.aux_digest)
            .ok_or_else(|| format!("snapshot {} missing", record.ctr))?;
        let aux = AuxState::<G>::from_bytes(aux_bytes).map_err(|e| e.to_string())?;
        if hex::encode(snapshot_digest(&aux)) != record.aux_digest || aux.ctr != record.ctr {
            return Err(format!("snapshot {} does not match its digest", record.ctr));
        }
        let pk_bytes = store
            .get(&record.pk_digest)
            .ok_or_else(|| format!("public key {} missing", record.ctr))?;
        if hex::encode(content_digest(pk_bytes)) != record.pk_digest {
            return Err(format!("public key {} does not match its digest", record.ctr));
        }
        let pk = UserPublicKey::<G>::from_bytes(pk_bytes).map_err(|e| e.to_string())?;
        if pk.ctr + 1 != record.ctr {
            return Err(format!("public key {} has counter {}", record.ctr, pk.ctr));
        }
    }
    Ok(())
}
