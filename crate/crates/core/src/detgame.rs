//! Complete-information equilibria with known top-of-block values.
//!
//! Scenario 1: the block-body transaction is available to both builders, so
//! each bids `v_T + v_x` in the PBS auction. Scenario 2: the transaction is
//! sold first in a second-price OFA and only the OFA winner can include it.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonneg, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Builder {
    A,
    B,
}

impl Builder {
    pub fn other(self) -> Builder {
        match self {
            Builder::A => Builder::B,
            Builder::B => Builder::A,
        }
    }
}

impl std::fmt::Display for Builder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Builder::A => "A",
            Builder::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterministicGame {
    pub v_a: f64,
    pub v_b: f64,
    pub v_t: f64,
}

impl DeterministicGame {
    pub fn new(v_a: f64, v_b: f64, v_t: f64) -> Result<Self> {
        Ok(DeterministicGame {
            v_a: ensure_nonneg("v_a", v_a)?,
            v_b: ensure_nonneg("v_b", v_b)?,
            v_t: ensure_nonneg("v_t", v_t)?,
        })
    }

    pub fn value_of(&self, builder: Builder) -> f64 {
        match builder {
            Builder::A => self.v_a,
            Builder::B => self.v_b,
        }
    }

    /// The builder with the larger top-of-block value; ties go to A.
    pub fn stronger(&self) -> Builder {
        if self.v_a >= self.v_b {
            Builder::A
        } else {
            Builder::B
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameOutcome {
    pub block_winner: Builder,
    /// `None` when no OFA is run.
    pub ofa_winner: Option<Builder>,
    pub ofa_price: f64,
    pub pbs_price: f64,
    pub total_price: f64,
    pub surplus_a: f64,
    pub surplus_b: f64,
    pub proposer_revenue: f64,
    pub ofa_revenue: f64,
}

impl GameOutcome {
    fn new(winner: Builder, ofa_winner: Option<Builder>, ofa_price: f64, pbs_price: f64, surplus: f64) -> Self {
        let (surplus_a, surplus_b) = match winner {
            Builder::A => (surplus, 0.0),
            Builder::B => (0.0, surplus),
        };
        GameOutcome {
            block_winner: winner,
            ofa_winner,
            ofa_price,
            pbs_price,
            total_price: ofa_price + pbs_price,
            surplus_a,
            surplus_b,
            proposer_revenue: pbs_price,
            ofa_revenue: ofa_price,
        }
    }

    pub fn surplus_of(&self, builder: Builder) -> f64 {
        match builder {
            Builder::A => self.surplus_a,
            Builder::B => self.surplus_b,
        }
    }
}

/// PBS auction where both builders hold the transaction: the higher value
/// wins at `v_T` plus the lower value.
pub fn solve_scenario1(game: &DeterministicGame) -> GameOutcome {
    let winner = game.stronger();
    let hi = game.value_of(winner);
    let lo = game.value_of(winner.other());
    GameOutcome::new(winner, None, 0.0, game.v_t + lo, hi - lo)
}

/// OFA followed by PBS, solved by backward induction.
///
/// The stronger builder wins both auctions. If its lead exceeds `v_T` the
/// loser's OFA bid is 0 and only the PBS auction is priced (at the weaker
/// value); otherwise the OFA clears at the loser's willingness to pay
/// `min + v_T - max`.
pub fn solve_scenario2(game: &DeterministicGame) -> GameOutcome {
    let winner = game.stronger();
    let hi = game.value_of(winner);
    let lo = game.value_of(winner.other());
    let (ofa_price, surplus) = if hi > lo + game.v_t {
        (0.0, hi + game.v_t - lo)
    } else {
        (lo + game.v_t - hi, 2.0 * (hi - lo))
    };
    GameOutcome::new(winner, Some(winner), ofa_price, lo, surplus)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockResult {
    pub winner: usize,
    pub price: f64,
}

/// Ascending-clock English auction on a price grid of spacing `tick`.
///
/// A bidder stays in while the clock is at or below its value. The clock
/// jumps straight from one exit event to the next, which visits the same
/// states as stepping one tick at a time. The winner pays the highest clock
/// level the last opponent accepted, so the price is within one tick below
/// the second-highest value. Bidders exiting on the same tick are ordered by
/// index, lowest winning.
pub fn clock_auction(values: &[f64], tick: f64) -> Result<ClockResult> {
    if values.len() < 2 {
        return Err(Error::invalid("values", format!("need at least 2 bidders, got {}", values.len())));
    }
    if !tick.is_finite() || tick <= 0.0 {
        return Err(Error::invalid("tick", format!("must be finite and > 0, got {tick}")));
    }
    for &v in values {
        ensure_nonneg("values", v)?;
    }

    // last tick index each bidder accepts
    let last_level: Vec<u64> = values.iter().map(|v| (v / tick).floor() as u64).collect();
    let mut active: Vec<usize> = (0..values.len()).collect();
    let mut clock: u64 = 0;
    loop {
        let next_exit = active.iter().map(|&i| last_level[i]).min().expect("active is non-empty");
        clock = clock.max(next_exit);
        let survivors: Vec<usize> = active.iter().copied().filter(|&i| last_level[i] > clock).collect();
        match survivors.len() {
            0 => {
                // everyone left drops at the same tick
                return Ok(ClockResult { winner: active[0], price: clock as f64 * tick });
            }
            1 => {
                return Ok(ClockResult { winner: survivors[0], price: clock as f64 * tick });
            }
            _ => active = survivors,
        }
    }
}
