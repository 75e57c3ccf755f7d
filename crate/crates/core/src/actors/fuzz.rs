use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use super::{run_scenario, DcsStrategy, DuStrategy, Outcome, Scenario, ScenarioError, UserSpec};

const UNIVERSE: [&str; 4] = ["a", "b", "c", "d"];
const POLICIES: [&str; 6] = ["a", "a and b", "a or c", "(a and b) or d", "b and c and d", "(a or b) and (c or d)"];

/// Counts over a batch of random traces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FuzzSummary {
    pub traces: usize,
    pub delivered: usize,
    pub refunded: usize,
    pub solver_paid_despite_challenge: usize,
    pub expired: usize,
    pub correct_results: usize,
    pub solver_payments: usize,
}

/// A random mock-backend scenario with at most four users.
pub fn random_scenario<R: Rng>(rng: &mut R) -> Scenario {
    let levels = rng.gen_range(0..=2);
    let count = rng.gen_range(1..=1usize << levels);
    let users = (0..count)
        .map(|_| UserSpec {
            attributes: UNIVERSE
                .iter()
                .filter(|_| rng.gen_bool(0.6))
                .map(|a| a.to_string())
                .collect(),
        })
        .collect();
    let dcs_strategy = *[
        DcsStrategy::Honest,
        DcsStrategy::CorruptC1,
        DcsStrategy::CorruptC2,
        DcsStrategy::Garbage,
    ]
    .choose(rng)
    .expect("nonempty");
    let du_strategy = if rng.gen_bool(0.25) {
        DuStrategy::AlwaysChallenge
    } else {
        DuStrategy::Honest
    };
    Scenario {
        seed: rng.gen(),
        backend: Default::default(),
        levels,
        universe: UNIVERSE.iter().map(|a| a.to_string()).collect(),
        users,
        policy: POLICIES.choose(rng).expect("nonempty").to_string(),
        message: format!("message {}", rng.gen::<u32>()),
        requester: rng.gen_range(0..count),
        dcs_strategy,
        du_strategy,
        reward: rng.gen_range(1..=100),
        window: rng.gen_range(1..=12),
        balance: 100,
    }
}

/// Runs `n` random scenarios. Each run already enforces fairness and token
/// conservation, so any violation surfaces as an error.
pub fn fuzz_traces(n: usize, seed: u64) -> Result<FuzzSummary, ScenarioError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut summary = FuzzSummary::default();
    for _ in 0..n {
        let scenario = random_scenario(&mut rng);
        let report = run_scenario(&scenario)?;
        summary.traces += 1;
        match report.outcome {
            Outcome::Delivered => summary.delivered += 1,
            Outcome::Refunded => summary.refunded += 1,
            Outcome::SolverPaidDespiteChallenge => summary.solver_paid_despite_challenge += 1,
            Outcome::Expired => summary.expired += 1,
        }
        summary.correct_results += usize::from(report.result_correct);
        summary.solver_payments += usize::from(report.solver_paid);
    }
    Ok(summary)
}
