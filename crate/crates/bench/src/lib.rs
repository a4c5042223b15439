//! Shared fixtures for the benchmark suite.

use pbs_ofa_core::{StochasticGame, ValueDistribution};

/// Exponential values with rates `(lambda_a, lambda_b)` and transaction value `v_t`.
pub fn exp_game(lambda_a: f64, lambda_b: f64, v_t: f64) -> StochasticGame {
    StochasticGame::new(
        ValueDistribution::exponential(lambda_a).expect("positive rate"),
        ValueDistribution::exponential(lambda_b).expect("positive rate"),
        v_t,
    )
    .expect("nonnegative v_t")
}
