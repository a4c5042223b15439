//! Scenario comparison when top-of-block values are private and stochastic.
//!
//! At the OFA stage builders only know their value distributions. Winning
//! the OFA shifts a builder's interim probability of winning the block from
//! `F_opp(v - v_T)` to `F_opp(v + v_T)`; integrating the difference of the
//! resulting interim surpluses against the builder's own distribution gives
//! its OFA valuation. All integrals over `[0, ∞)` are truncated at the
//! relevant `support_hint`, and `F` at a negative argument is 0.
//!
//! Interim surpluses are anchored at zero surplus for a zero top-of-block
//! value. A builder with `v = 0` that holds the transaction still earns
//! `E[(v_T - v_opp)^+] = ∫₀^{v_T} F_opp(u) du` in the PBS auction; that
//! constant is exposed separately as [`zero_value_surplus`] and is what
//! separates [`ofa_valuation`] from the per-draw expectation computed in
//! [`crate::mc::direct_ofa_valuation`].

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::detgame::Builder;
use crate::dist::{fosd_dominates, ValueDistribution, FOSD_GRID_POINTS};
use crate::error::{ensure_nonneg, Error, Result};
use crate::quad::{integrate_with, QuadOptions, Quadrature, DEFAULT_ABS_TOL, DEFAULT_REL_TOL};

/// Inner integrals run this much tighter than the outer one.
const INNER_TIGHTENING: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Transaction available to both builders; PBS auction only.
    One,
    /// Transaction sold in an OFA before the PBS auction.
    Two,
}

impl TryFrom<u8> for Scenario {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Scenario::One),
            2 => Ok(Scenario::Two),
            _ => Err(Error::invalid("scenario", format!("must be 1 or 2, got {n}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticGame {
    pub dist_a: ValueDistribution,
    pub dist_b: ValueDistribution,
    pub v_t: f64,
}

impl StochasticGame {
    pub fn new(dist_a: ValueDistribution, dist_b: ValueDistribution, v_t: f64) -> Result<Self> {
        Ok(StochasticGame { dist_a, dist_b, v_t: ensure_nonneg("v_t", v_t)? })
    }

    pub fn dist(&self, builder: Builder) -> &ValueDistribution {
        match builder {
            Builder::A => &self.dist_a,
            Builder::B => &self.dist_b,
        }
    }

    /// True when A's values first-order stochastically dominate B's.
    pub fn is_ordered(&self) -> Result<bool> {
        fosd_dominates(&self.dist_a, &self.dist_b, FOSD_GRID_POINTS)
    }

    /// Fails unless A dominates B, which the Scenario-2 formulas presume
    /// (A then always wins the OFA).
    pub fn require_ordered(&self) -> Result<()> {
        if self.is_ordered()? {
            Ok(())
        } else {
            Err(Error::Precondition(
                "Scenario-2 formulas require dist_a to first-order stochastically dominate dist_b".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfaValuationReport {
    pub v_ta: f64,
    pub v_tb: f64,
    pub err_ta: f64,
    pub err_tb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioComparison {
    pub win_prob_s1: f64,
    pub win_prob_s2: f64,
    pub profit_a_s1: f64,
    pub profit_a_s2: f64,
    pub v_ta: f64,
    pub v_tb: f64,
    /// B's expected profit; B never holds the transaction in Scenario 2.
    pub profit_b_s1: f64,
    pub profit_b_s2: f64,
}

/// Probability that a builder with top-of-block value `v` wins the block,
/// given whether it holds the transaction.
pub fn interim_win_prob(opponent: &ValueDistribution, v: f64, v_t: f64, won_ofa: bool) -> Result<f64> {
    ensure_nonneg("v", v)?;
    ensure_nonneg("v_t", v_t)?;
    Ok(if won_ofa { opponent.cdf(v + v_t) } else { opponent.cdf(v - v_t) })
}

/// Interim PBS surplus `∫₀^v x(u) du` for the given OFA outcome.
pub fn interim_surplus(opponent: &ValueDistribution, v: f64, v_t: f64, won_ofa: bool) -> Result<Quadrature> {
    ensure_nonneg("v", v)?;
    ensure_nonneg("v_t", v_t)?;
    let shift = if won_ofa { v_t } else { -v_t };
    integrate_with(
        |u| opponent.cdf(u + shift),
        0.0,
        v,
        &QuadOptions { breaks: &[v_t], ..QuadOptions::default() },
    )
}

fn opts(breaks: &[f64], tighten: f64) -> QuadOptions<'_> {
    QuadOptions {
        abs_tol: DEFAULT_ABS_TOL / tighten,
        rel_tol: DEFAULT_REL_TOL / tighten,
        breaks,
        ..QuadOptions::default()
    }
}

/// `∫₀^{hint} own.pdf(a) · ∫₀^a inner(v) dv da`, with the combined error
/// bound `outer_err + max inner_err` (the outer weight integrates to ≤ 1).
fn nested<G: Fn(f64) -> f64>(own: &ValueDistribution, inner: G, breaks: &[f64]) -> Result<Quadrature> {
    let worst_inner = Cell::new(0.0f64);
    let failure: Cell<Option<Error>> = Cell::new(None);
    let inner_opts = opts(breaks, INNER_TIGHTENING);

    let outer = integrate_with(
        |a| {
            let density = own.pdf(a);
            if density == 0.0 {
                return 0.0;
            }
            match integrate_with(&inner, 0.0, a, &inner_opts) {
                Ok(q) => {
                    worst_inner.set(worst_inner.get().max(q.err_estimate));
                    density * q.value
                }
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            }
        },
        0.0,
        own.support_hint(),
        &opts(breaks, 1.0),
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let outer = outer?;
    Ok(Quadrature { value: outer.value, err_estimate: outer.err_estimate + worst_inner.get() })
}

/// `∫₀^{hint} F_opp(v + shift) f_own(v) dv`.
fn single(own: &ValueDistribution, opponent: &ValueDistribution, shift: f64, breaks: &[f64]) -> Result<Quadrature> {
    integrate_with(
        |v| opponent.cdf(v + shift) * own.pdf(v),
        0.0,
        own.support_hint(),
        &opts(breaks, 1.0),
    )
}

/// Builder's ex-ante value for the transaction: expected interim surplus
/// from winning the OFA minus that from losing it.
pub fn ofa_valuation(game: &StochasticGame, builder: Builder) -> Result<Quadrature> {
    let v_t = game.v_t;
    if v_t == 0.0 {
        return Ok(Quadrature { value: 0.0, err_estimate: 0.0 });
    }
    let own = game.dist(builder);
    let opp = game.dist(builder.other());
    nested(own, |v| opp.cdf(v + v_t) - opp.cdf(v - v_t), &[v_t])
}

pub fn ofa_valuations(game: &StochasticGame) -> Result<OfaValuationReport> {
    let a = ofa_valuation(game, Builder::A)?;
    let b = ofa_valuation(game, Builder::B)?;
    Ok(OfaValuationReport { v_ta: a.value, v_tb: b.value, err_ta: a.err_estimate, err_tb: b.err_estimate })
}

/// First-order expansion in `v_T`: `2 v_T ∫ F_opp(v) f_own(v) dv`.
pub fn taylor_ofa_valuation(game: &StochasticGame, builder: Builder) -> Result<f64> {
    if game.v_t == 0.0 {
        return Ok(0.0);
    }
    let own = game.dist(builder);
    let opp = game.dist(builder.other());
    Ok(2.0 * game.v_t * single(own, opp, 0.0, &[])?.value)
}

/// `∫₀^{v_T} F_opp(u) du`: PBS surplus a zero-value builder earns while
/// holding the transaction.
pub fn zero_value_surplus(game: &StochasticGame, builder: Builder) -> Result<Quadrature> {
    let opp = game.dist(builder.other());
    integrate_with(|u| opp.cdf(u), 0.0, game.v_t, &QuadOptions::default())
}

/// Ex-ante probability that A wins the block.
pub fn win_probability(game: &StochasticGame, scenario: Scenario) -> Result<f64> {
    let shift = match scenario {
        Scenario::One => 0.0,
        Scenario::Two => {
            game.require_ordered()?;
            game.v_t
        }
    };
    Ok(single(&game.dist_a, &game.dist_b, shift, &[])?.value)
}

/// A's total expected profit.
pub fn expected_profit(game: &StochasticGame, scenario: Scenario) -> Result<f64> {
    let opp = &game.dist_b;
    match scenario {
        Scenario::One => Ok(nested(&game.dist_a, |v| opp.cdf(v), &[])?.value),
        Scenario::Two => {
            game.require_ordered()?;
            let v_t = game.v_t;
            let margin = ofa_valuation(game, Builder::A)?.value - ofa_valuation(game, Builder::B)?.value;
            let pbs = nested(&game.dist_a, |v| opp.cdf(v + v_t), &[])?.value;
            Ok(margin + pbs)
        }
    }
}

/// B's expected profit. In Scenario 2 B loses the OFA and pays nothing there.
pub fn expected_profit_b(game: &StochasticGame, scenario: Scenario) -> Result<f64> {
    let opp = &game.dist_a;
    match scenario {
        Scenario::One => Ok(nested(&game.dist_b, |v| opp.cdf(v), &[])?.value),
        Scenario::Two => {
            game.require_ordered()?;
            let v_t = game.v_t;
            Ok(nested(&game.dist_b, |v| opp.cdf(v - v_t), &[v_t])?.value)
        }
    }
}

pub fn compare_scenarios(game: &StochasticGame) -> Result<ScenarioComparison> {
    game.require_ordered()?;
    let vals = ofa_valuations(game)?;
    let v_t = game.v_t;
    let opp = &game.dist_b;
    let pbs_s2 = nested(&game.dist_a, |v| opp.cdf(v + v_t), &[])?.value;
    Ok(ScenarioComparison {
        win_prob_s1: win_probability(game, Scenario::One)?,
        win_prob_s2: win_probability(game, Scenario::Two)?,
        profit_a_s1: expected_profit(game, Scenario::One)?,
        profit_a_s2: (vals.v_ta - vals.v_tb) + pbs_s2,
        v_ta: vals.v_ta,
        v_tb: vals.v_tb,
        profit_b_s1: expected_profit_b(game, Scenario::One)?,
        profit_b_s2: expected_profit_b(game, Scenario::Two)?,
    })
}
