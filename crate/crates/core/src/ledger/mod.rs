//! Simulated ledger running the task escrow contract.
//!
//! Every call is applied atomically and appended to the event log whether
//! it succeeds or not. Tokens only move between balances and task escrow,
//! so their total never changes after genesis.


use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::group::hash_bytes;
use crate::osrabe::TAG_LEN;

pub type Account = String;
pub type TaskId = u64;

pub const DEFAULT_WINDOW: u64 = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LedgerConfig {
    /// Blocks after submission during which the result can be challenged.
    pub window: u64,
    /// The only account allowed to publish verification results.
    pub verifier: Account,
    /// The only account allowed to publish registration state.
    pub curator: Account,
}

impl LedgerConfig {
    pub fn new(verifier: impl Into<Account>, curator: impl Into<Account>) -> Self {
        Self {
            window: DEFAULT_WINDOW,
            verifier: verifier.into(),
            curator: curator.into(),
        }
    }

    pub fn with_window(mut self, window: u64) -> Self {
        self.window = window;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskStatus {
    Open,
    Submitted,
    Challenged,
    ResolvedPaid,
    ResolvedRefunded,
}

impl TaskStatus {
    pub fn is_resolved(self) -> bool {
        matches!(self, TaskStatus::ResolvedPaid | TaskStatus::ResolvedRefunded)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskRecord {
    pub id: TaskId,
    pub creator: Account,
    pub ciphertext_id: String,
    pub reward: u64,
    pub status: TaskStatus,
    pub created_block: u64,
    pub result: Option<Vec<u8>>,
    pub solver: Option<Account>,
    pub submit_block: Option<u64>,
    pub proof: Option<Vec<u8>>,
    pub verdict: Option<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StateRecord {
    pub ctr: u64,
    pub pk_digest: String,
    pub aux_digest: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Payout {
    pub task: TaskId,
    pub to: Account,
    pub amount: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Event {
    pub seq: u64,
    pub block: u64,
    pub caller: Account,
    pub function: Function,
    pub args_digest: String,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payout: Option<Payout>,
}

impl Event {
    pub fn accepted(&self) -> bool {
        self.outcome == "ok"
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Function {
    PublishState,
    PublishTag,
    CreateTask,
    SubmitResult,
    ClaimReward,
    PublishFraudProof,
    PublishVerificationResult,
    CancelTask,
    AdvanceBlock,
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(v.as_str().unwrap_or_default())
    }
}

/// Work done by one contract function, the stand-in for gas.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OpCounter {
    pub calls: u64,
    pub accepted: u64,
    pub storage_writes: u64,
    pub bytes_written: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LedgerError {
    #[error("caller {0} is not authorized for this call")]
    Unauthorized(Account),
    #[error("expected counter {expected}, got {found}")]
    NonConsecutiveCounter { expected: u64, found: u64 },
    #[error("ciphertext {0} already has a tag")]
    DuplicateTag(String),
    #[error("tag must be {TAG_LEN} bytes, got {0}")]
    TagLength(usize),
    #[error("no tag published for ciphertext {0}")]
    UnknownCiphertext(String),
    #[error("balance {balance} is below {needed}")]
    InsufficientBalance { balance: u64, needed: u64 },
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("task {task} is {status:?}")]
    WrongStatus { task: TaskId, status: TaskStatus },
    #[error("challenge window ends at block {until}")]
    WindowOpen { until: u64 },
    #[error("challenge window closed at block {closed}")]
    WindowClosed { closed: u64 },
    #[error("task can be cancelled from block {from}")]
    TooEarly { from: u64 },
    #[error("verdict must be 0 or 1, got {0}")]
    BadVerdict(u8),
    #[error("block advance must be positive")]
    ZeroAdvance,
}

#[derive(Clone, Debug)]
pub struct Ledger {
    config: LedgerConfig,
    height: u64,
    balances: BTreeMap<Account, u64>,
    tasks: BTreeMap<TaskId, TaskRecord>,
    state_log: Vec<StateRecord>,
    tag_log: BTreeMap<String, [u8; TAG_LEN]>,
    events: Vec<Event>,
    counters: BTreeMap<Function, OpCounter>,
    supply: u64,
}

/// What a successful call wrote, for the counters and the log.
#[derive(Default)]
struct Effect {
    writes: u64,
    bytes: u64,
    payout: Option<Payout>,
}

impl Effect {
    fn write(writes: u64, bytes: usize) -> Self {
        Self {
            writes,
            bytes: bytes as u64,
            payout: None,
        }
    }
}

impl Ledger {
    pub fn new<A: Into<Account>>(config: LedgerConfig, genesis: impl IntoIterator<Item = (A, u64)>) -> Self {
        let mut balances = BTreeMap::new();
        for (account, amount) in genesis {
            *balances.entry(account.into()).or_insert(0) += amount;
        }
        let supply = balances.values().sum();
        Self {
            config,
            height: 0,
            balances,
            tasks: BTreeMap::new(),
            state_log: Vec::new(),
            tag_log: BTreeMap::new(),
            events: Vec::new(),
            counters: BTreeMap::new(),
            supply,
        }
    }

    pub fn config(&self) -> &LedgerConfig {
        &self.config
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn balance(&self, account: &str) -> u64 {
        self.balances.get(account).copied().unwrap_or(0)
    }

    pub fn balances(&self) -> &BTreeMap<Account, u64> {
        &self.balances
    }

    pub fn task(&self, id: TaskId) -> Option<&TaskRecord> {
        self.tasks.get(&id)
    }

    pub fn tasks(&self) -> impl Iterator<Item = &TaskRecord> {
        self.tasks.values()
    }

    pub fn tag(&self, ciphertext_id: &str) -> Option<&[u8; TAG_LEN]> {
        self.tag_log.get(ciphertext_id)
    }

    pub fn state_log(&self) -> &[StateRecord] {
        &self.state_log
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn op_counters(&self) -> &BTreeMap<Function, OpCounter> {
        &self.counters
    }

    /// Tokens held by tasks that are not resolved yet.
    pub fn escrowed(&self) -> u64 {
        self.tasks
            .values()
            .filter(|t| !t.status.is_resolved())
            .map(|t| t.reward)
            .sum()
    }

    /// Tokens created at genesis.
    pub fn supply(&self) -> u64 {
        self.supply
    }

    pub fn is_conserved(&self) -> bool {
        self.balances.values().sum::<u64>() + self.escrowed() == self.supply
    }

    /// The event log as one JSON object per line.
    pub fn export_events(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("events serialize") + "\n")
            .collect()
    }

    fn record<T>(
        &mut self,
        caller: &str,
        function: Function,
        args: &[&[u8]],
        call: impl FnOnce(&mut Self) -> Result<(T, Effect), LedgerError>,
    ) -> Result<T, LedgerError> {
        let name = function.to_string();
        let mut inputs: Vec<&[u8]> = vec![name.as_bytes(), caller.as_bytes()];
        inputs.extend_from_slice(args);
        let args_digest = hex::encode(hash_bytes(b"ledger-call", &inputs));
        let result = call(self);
        let counter = self.counters.entry(function).or_default();
        counter.calls += 1;
        let (outcome, payout, value) = match result {
            Ok((value, effect)) => {
                counter.accepted += 1;
                counter.storage_writes += effect.writes;
                counter.bytes_written += effect.bytes;
                ("ok".to_string(), effect.payout, Ok(value))
            }
            Err(e) => (format!("rejected: {e}"), None, Err(e)),
        };
        self.events.push(Event {
            seq: self.events.len() as u64,
            block: self.height,
            caller: caller.to_string(),
            function,
            args_digest,
            outcome,
            payout,
        });
        value
    }

    fn task_mut(&mut self, id: TaskId) -> Result<&mut TaskRecord, LedgerError> {
        self.tasks.get_mut(&id).ok_or(LedgerError::UnknownTask(id))
    }

    fn credit(&mut self, account: &str, amount: u64) {
        *self.balances.entry(account.to_string()).or_insert(0) += amount;
    }

    /// Records the curator's registration of the `ctr`-th user.
    pub fn publish_state(
        &mut self,
        caller: &str,
        ctr: u64,
        pk_digest: &[u8; 32],
        aux_digest: &[u8; 32],
    ) -> Result<(), LedgerError> {
        self.record(
            caller,
            Function::PublishState,
            &[&ctr.to_be_bytes(), pk_digest, aux_digest],
            |l| {
                if caller != l.config.curator {
                    return Err(LedgerError::Unauthorized(caller.into()));
                }
                let expected = l.state_log.last().map_or(1, |s| s.ctr + 1);
                if ctr != expected {
                    return Err(LedgerError::NonConsecutiveCounter { expected, found: ctr });
                }
                l.state_log.push(StateRecord {
                    ctr,
                    pk_digest: hex::encode(pk_digest),
                    aux_digest: hex::encode(aux_digest),
                });
                Ok(((), Effect::write(3, 8 + 64)))
            },
        )
    }

    pub fn publish_tag(&mut self, caller: &str, ciphertext_id: &str, tag: &[u8]) -> Result<(), LedgerError> {
        self.record(caller, Function::PublishTag, &[ciphertext_id.as_bytes(), tag], |l| {
            let tag: [u8; TAG_LEN] = tag.try_into().map_err(|_| LedgerError::TagLength(tag.len()))?;
            if l.tag_log.contains_key(ciphertext_id) {
                return Err(LedgerError::DuplicateTag(ciphertext_id.into()));
            }
            l.tag_log.insert(ciphertext_id.to_string(), tag);
            Ok(((), Effect::write(1, TAG_LEN)))
        })
    }

    /// Escrows `reward` from the caller and opens a task.
    pub fn create_task(&mut self, caller: &str, ciphertext_id: &str, reward: u64) -> Result<TaskId, LedgerError> {
        self.record(
            caller,
            Function::CreateTask,
            &[ciphertext_id.as_bytes(), &reward.to_be_bytes()],
            |l| {
                if !l.tag_log.contains_key(ciphertext_id) {
                    return Err(LedgerError::UnknownCiphertext(ciphertext_id.into()));
                }
                let balance = l.balance(caller);
                if balance < reward {
                    return Err(LedgerError::InsufficientBalance { balance, needed: reward });
                }
                l.balances.insert(caller.to_string(), balance - reward);
                let id = l.tasks.len() as TaskId + 1;
                l.tasks.insert(
                    id,
                    TaskRecord {
                        id,
                        creator: caller.to_string(),
                        ciphertext_id: ciphertext_id.to_string(),
                        reward,
                        status: TaskStatus::Open,
                        created_block: l.height,
                        result: None,
                        solver: None,
                        submit_block: None,
                        proof: None,
                        verdict: None,
                    },
                );
                Ok((id, Effect::write(4, 8)))
            },
        )
    }

    /// First submission wins; later ones find the task no longer open.
    pub fn submit_result(&mut self, caller: &str, task: TaskId, result: &[u8]) -> Result<(), LedgerError> {
        self.record(caller, Function::SubmitResult, &[&task.to_be_bytes(), result], |l| {
            let height = l.height;
            let t = l.task_mut(task)?;
            if t.status != TaskStatus::Open {
                return Err(LedgerError::WrongStatus { task, status: t.status });
            }
            t.status = TaskStatus::Submitted;
            t.result = Some(result.to_vec());
            t.solver = Some(caller.to_string());
            t.submit_block = Some(height);
            Ok(((), Effect::write(4, result.len())))
        })
    }

    pub fn claim_reward(&mut self, caller: &str, task: TaskId) -> Result<(), LedgerError> {
        self.record(caller, Function::ClaimReward, &[&task.to_be_bytes()], |l| {
            let (window, height) = (l.config.window, l.height);
            let t = l.task_mut(task)?;
            if t.status != TaskStatus::Submitted {
                return Err(LedgerError::WrongStatus { task, status: t.status });
            }
            if t.solver.as_deref() != Some(caller) {
                return Err(LedgerError::Unauthorized(caller.into()));
            }
            let until = t.submit_block.unwrap_or_default() + window;
            if height < until {
                return Err(LedgerError::WindowOpen { until });
            }
            t.status = TaskStatus::ResolvedPaid;
            let amount = t.reward;
            l.credit(caller, amount);
            Ok(((), Effect {
                writes: 2,
                bytes: 0,
                payout: Some(Payout {
                    task,
                    to: caller.to_string(),
                    amount,
                }),
            }))
        })
    }

    pub fn publish_fraud_proof(&mut self, caller: &str, task: TaskId, proof: &[u8]) -> Result<(), LedgerError> {
        self.record(caller, Function::PublishFraudProof, &[&task.to_be_bytes(), proof], |l| {
            let (window, height) = (l.config.window, l.height);
            let t = l.task_mut(task)?;
            if t.status != TaskStatus::Submitted {
                return Err(LedgerError::WrongStatus { task, status: t.status });
            }
            if t.creator != caller {
                return Err(LedgerError::Unauthorized(caller.into()));
            }
            let closed = t.submit_block.unwrap_or_default() + window;
            if height >= closed {
                return Err(LedgerError::WindowClosed { closed });
            }
            t.status = TaskStatus::Challenged;
            t.proof = Some(proof.to_vec());
            Ok(((), Effect::write(2, proof.len())))
        })
    }

    /// Verdict 1 confirms fraud and refunds the creator; 0 pays the solver.
    pub fn publish_verification_result(&mut self, caller: &str, task: TaskId, verdict: u8) -> Result<(), LedgerError> {
        self.record(
            caller,
            Function::PublishVerificationResult,
            &[&task.to_be_bytes(), &[verdict]],
            |l| {
                if caller != l.config.verifier {
                    return Err(LedgerError::Unauthorized(caller.into()));
                }
                if verdict > 1 {
                    return Err(LedgerError::BadVerdict(verdict));
                }
                let t = l.task_mut(task)?;
                if t.status != TaskStatus::Challenged {
                    return Err(LedgerError::WrongStatus { task, status: t.status });
                }
                t.verdict = Some(verdict);
                let (to, status) = if verdict == 1 {
                    (t.creator.clone(), TaskStatus::ResolvedRefunded)
                } else {
                    (t.solver.clone().unwrap_or_default(), TaskStatus::ResolvedPaid)
                };
                t.status = status;
                let amount = t.reward;
                l.credit(&to, amount);
                Ok(((), Effect {
                    writes: 3,
                    bytes: 1,
                    payout: Some(Payout { task, to, amount }),
                }))
            },
        )
    }

    /// Lets the creator reclaim an open task nobody answered for
    /// `2 * window` blocks.
    pub fn cancel_task(&mut self, caller: &str, task: TaskId) -> Result<(), LedgerError> {
        self.record(caller, Function::CancelTask, &[&task.to_be_bytes()], |l| {
            let (window, height) = (l.config.window, l.height);
            let t = l.task_mut(task)?;
            if t.status != TaskStatus::Open {
                return Err(LedgerError::WrongStatus { task, status: t.status });
            }
            if t.creator != caller {
                return Err(LedgerError::Unauthorized(caller.into()));
            }
            let from = t.created_block + 2 * window;
            if height < from {
                return Err(LedgerError::TooEarly { from });
            }
            t.status = TaskStatus::ResolvedRefunded;
            let amount = t.reward;
            l.credit(caller, amount);
            Ok(((), Effect {
                writes: 2,
                bytes: 0,
                payout: Some(Payout {
                    task,
                    to: caller.to_string(),
                    amount,
                }),
            }))
        })
    }

    pub fn advance_block(&mut self, caller: &str, n: u64) -> Result<u64, LedgerError> {
        self.record(caller, Function::AdvanceBlock, &[&n.to_be_bytes()], |l| {
            if n == 0 {
                return Err(LedgerError::ZeroAdvance);
            }
            l.height += n;
            Ok((l.height, Effect::write(1, 0)))
        })
    }
}
