use serde::{Deserialize, Serialize};

use crate::algebra::AccessPolicy;
use crate::orabe::MAX_LEVELS;
use crate::osrabe::AttrSet;

use super::ScenarioError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    #[default]
    Mock,
    #[serde(rename = "bls12-381")]
    Bls12_381,
}

/// How the decryption server answers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DcsStrategy {
    #[default]
    Honest,
    /// Multiplies `C_1'` by a random non-identity element.
    CorruptC1,
    /// Multiplies `C_2'` by a random non-identity element.
    CorruptC2,
    /// Submits random bytes that do not decode.
    Garbage,
}

/// How the requesting user reacts to the result.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DuStrategy {
    /// Challenges only results that fail to decrypt.
    #[default]
    Honest,
    /// Challenges every result, correct or not.
    AlwaysChallenge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserSpec {
    pub attributes: Vec<String>,
}

/// One run of the protocol, usually read from a TOML file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    #[serde(default)]
    pub backend: Backend,
    /// The system holds up to `2^levels` users.
    pub levels: usize,
    pub universe: Vec<String>,
    pub users: Vec<UserSpec>,
    pub policy: String,
    pub message: String,
    /// Index into `users` of the user who requests decryption.
    #[serde(default)]
    pub requester: usize,
    #[serde(default)]
    pub dcs_strategy: DcsStrategy,
    #[serde(default)]
    pub du_strategy: DuStrategy,
    pub reward: u64,
    #[serde(default = "default_window")]
    pub window: u64,
    /// Genesis balance of every user account.
    #[serde(default = "default_balance")]
    pub balance: u64,
}

fn default_window() -> u64 {
    crate::ledger::DEFAULT_WINDOW
}

fn default_balance() -> u64 {
    1000
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn parsed_policy(&self) -> Result<AccessPolicy, ScenarioError> {
        self.policy
            .parse()
            .map_err(|e: crate::algebra::PolicyError| ScenarioError::Config(e.to_string()))
    }

    pub fn user_attrs(&self, user: usize) -> AttrSet {
        self.users[user].attributes.iter().cloned().collect()
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |m: String| Err(ScenarioError::Config(m));
        if self.levels > MAX_LEVELS {
            return fail(format!("levels must be at most {MAX_LEVELS}"));
        }
        if self.users.is_empty() || self.users.len() as u64 > 1u64 << self.levels {
            return fail(format!("between 1 and {} users required", 1u64 << self.levels));
        }
        if self.requester >= self.users.len() {
            return fail("requester is not a user".into());
        }
        if self.window == 0 {
            return fail("window must be positive".into());
        }
        let known = |a: &String| self.universe.contains(a);
        if let Some(a) = self.users.iter().flat_map(|u| &u.attributes).find(|a| !known(a)) {
            return fail(format!("user attribute {a} is not in the universe"));
        }
        let policy = self.parsed_policy()?;
        let universe: Vec<&str> = self.universe.iter().map(String::as_str).collect();
        policy
            .check_universe(&universe)
            .map_err(|e| ScenarioError::Config(e.to_string()))?;
        Ok(())
    }

    /// A requester challenges or the server cheats.
    pub fn expects_dispute(&self) -> bool {
        self.dcs_strategy != DcsStrategy::Honest || self.du_strategy == DuStrategy::AlwaysChallenge
    }
}
