//! Sample-level Monte Carlo simulation of both scenarios.
//!
//! Samples are split into fixed-size chunks; chunk `i` draws from a ChaCha8
//! generator seeded with `seed` on stream `i`. Chunks run in parallel and
//! their `(count, sum, sum of squares)` accumulators are merged in chunk
//! order, so estimates depend only on `(seed, n_samples, chunk_size, game)`
//! and never on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detgame::{solve_scenario1, Builder, DeterministicGame};
use crate::error::{Error, Result};
use crate::format::serialize_sig15;
use crate::stochgame::{ofa_valuation, StochasticGame};

/// Identifies the sampling scheme in output metadata.
pub const GENERATOR: &str = "chacha8-stream-per-chunk";
pub const DEFAULT_CHUNK_SIZE: u64 = 1 << 16;
/// Width of the default acceptance band, in standard errors.
pub const ACCEPT_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MCConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub chunk_size: u64,
}

impl MCConfig {
    pub fn new(n_samples: u64, seed: u64) -> Result<Self> {
        Self::with_chunk_size(n_samples, seed, DEFAULT_CHUNK_SIZE)
    }

    pub fn with_chunk_size(n_samples: u64, seed: u64, chunk_size: u64) -> Result<Self> {
        let cfg = MCConfig { n_samples, seed, chunk_size };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples", "must be >= 1"));
        }
        if self.chunk_size == 0 {
            return Err(Error::invalid("chunk_size", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub std_error: f64,
    pub n: u64,
}

impl MCEstimate {
    /// Whether `target` lies within `sigmas` standard errors of the mean.
    pub fn covers(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.std_error
    }

    /// Shifts the estimate by a constant; the standard error is unchanged.
    pub fn offset(self, delta: f64) -> MCEstimate {
        MCEstimate { mean: self.mean + delta, ..self }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(self, other: Moments) -> Moments {
        Moments { count: self.count + other.count, sum: self.sum + other.sum, sum_sq: self.sum_sq + other.sum_sq }
    }

    fn estimate(&self) -> MCEstimate {
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = if self.count > 1 {
            ((self.sum_sq - self.sum * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        MCEstimate { mean, std_error: (var / n).sqrt(), n: self.count }
    }
}

/// Runs `draw` once per sample and returns one estimate per output slot.
fn run<const K: usize, F>(cfg: &MCConfig, draw: F) -> Result<[MCEstimate; K]>
where
    F: Fn(&mut ChaCha8Rng) -> [f64; K] + Sync,
{
    cfg.validate()?;
    let chunks = cfg.n_samples.div_ceil(cfg.chunk_size);
    let partials: Vec<[Moments; K]> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(chunk);
            let start = chunk * cfg.chunk_size;
            let len = cfg.chunk_size.min(cfg.n_samples - start);
            let mut acc = [Moments::default(); K];
            for _ in 0..len {
                for (m, x) in acc.iter_mut().zip(draw(&mut rng)) {
                    m.push(x);
                }
            }
            acc
        })
        .collect();
    let total = partials
        .into_iter()
        .fold([Moments::default(); K], |acc, p| std::array::from_fn(|k| acc[k].merge(p[k])));
    Ok(total.map(|m| m.estimate()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario1Sim {
    pub win_prob_a: MCEstimate,
    pub profit_a: MCEstimate,
    pub proposer_revenue: MCEstimate,
}

/// Draws independent `(v_A, v_B)` and plays the Scenario-1 PBS auction on
/// each realization.
pub fn simulate_scenario1(game: &StochasticGame, cfg: &MCConfig) -> Result<Scenario1Sim> {
    let [win, profit, revenue] = run(cfg, |rng| {
        let v_a = game.dist_a.sample(rng);
        let v_b = game.dist_b.sample(rng);
        let g = DeterministicGame::new(v_a, v_b, game.v_t).expect("sampled values are finite and nonnegative");
        let o = solve_scenario1(&g);
        let won = if o.block_winner == Builder::A { 1.0 } else { 0.0 };
        [won, o.surplus_a, o.proposer_revenue]
    })?;
    Ok(Scenario1Sim { win_prob_a: win, profit_a: profit, proposer_revenue: revenue })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario2Sim {
    pub win_prob_a: MCEstimate,
    pub pbs_surplus_a: MCEstimate,
    pub total_profit_a: MCEstimate,
    /// Ex-ante OFA price paid by A: B's valuation of the transaction.
    pub ofa_price: f64,
}

/// A holds the transaction (it wins the OFA at B's ex-ante valuation) and
/// wins the block whenever `v_A + v_T >= v_B`, paying `v_B`.
pub fn simulate_scenario2(game: &StochasticGame, cfg: &MCConfig) -> Result<Scenario2Sim> {
    game.require_ordered()?;
    let ofa_price = ofa_valuation(game, Builder::B)?.value;
    let v_t = game.v_t;
    let [win, surplus] = run(cfg, |rng| {
        let v_a = game.dist_a.sample(rng);
        let v_b = game.dist_b.sample(rng);
        let edge = v_a + v_t - v_b;
        if edge >= 0.0 {
            [1.0, edge]
        } else {
            [0.0, 0.0]
        }
    })?;
    Ok(Scenario2Sim { win_prob_a: win, pbs_surplus_a: surplus, total_profit_a: surplus.offset(-ofa_price), ofa_price })
}

/// Per-draw PBS surplus from holding the transaction minus that from not
/// holding it, `E[(v_x + v_T - v_y)^+ - (v_x - v_T - v_y)^+]`.
pub fn direct_ofa_valuation(game: &StochasticGame, builder: Builder, cfg: &MCConfig) -> Result<MCEstimate> {
    let v_t = game.v_t;
    let [diff] = run(cfg, |rng| {
        let v_a = game.dist_a.sample(rng);
        let v_b = game.dist_b.sample(rng);
        let (own, opp) = match builder {
            Builder::A => (v_a, v_b),
            Builder::B => (v_b, v_a),
        };
        [(own + v_t - opp).max(0.0) - (own - v_t - opp).max(0.0)]
    })?;
    Ok(diff)
}

/// One line of simulation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCRecord {
    pub metric: String,
    #[serde(serialize_with = "serialize_sig15")]
    pub mean: f64,
    #[serde(serialize_with = "serialize_sig15")]
    pub std_error: f64,
    pub n: u64,
    pub seed: u64,
}

impl MCRecord {
    pub fn new(metric: &str, est: &MCEstimate, seed: u64) -> Self {
        MCRecord { metric: metric.to_owned(), mean: est.mean, std_error: est.std_error, n: est.n, seed }
    }
}

impl Scenario1Sim {
    pub fn records(&self, seed: u64) -> Vec<MCRecord> {
        vec![
            MCRecord::new("win_prob_a", &self.win_prob_a, seed),
            MCRecord::new("profit_a", &self.profit_a, seed),
            MCRecord::new("proposer_revenue", &self.proposer_revenue, seed),
        ]
    }
}

impl Scenario2Sim {
    pub fn records(&self, seed: u64) -> Vec<MCRecord> {
        vec![
            MCRecord::new("win_prob_a", &self.win_prob_a, seed),
            MCRecord::new("pbs_surplus_a", &self.pbs_surplus_a, seed),
            MCRecord::new("total_profit_a", &self.total_profit_a, seed),
        ]
    }
}

/// JSON document wrapping simulation records with the generator identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCReport {
    pub generator: String,
    pub results: Vec<MCRecord>,
}

impl MCReport {
    pub fn new(results: Vec<MCRecord>) -> Self {
        MCReport { generator: GENERATOR.to_owned(), results }
    }
}
