//! Equilibrium and valuation tools for a two-builder market in which an order
//! flow auction (OFA) for a block-body transaction runs ahead of the
//! proposer-builder separation (PBS) block auction.
//!
//! The crate is split by concern:
//!
//! - [`dist`]: top-of-block value distributions, stochastic dominance checks
//!   and the adaptive quadrature engine used by everything downstream.
//! - [`detgame`]: complete-information equilibria for both market scenarios
//!   plus an ascending-clock auction used as a brute-force oracle.
//! - [`stochgame`]: OFA valuations, win probabilities and expected profits for
//!   arbitrary value distributions, evaluated by nested quadrature.
//! - [`analytic`]: closed forms for exponential values and the
//!   comparative-statics sweep.
//! - [`mc`]: seed-deterministic parallel Monte Carlo estimators of the same
//!   quantities.
//! - [`econometrics`]: logit/multinomial-logit prediction, IRLS logit fitting
//!   and synthetic data generation from the structural model.
//! - [`format`]: fixed-precision number rendering shared by CSV/JSON writers.

pub mod analytic;
pub mod detgame;
pub mod dist;
pub mod econometrics;
mod error;
pub mod format;
pub mod mc;
pub mod quad;
pub mod stochgame;

pub use analytic::{exp_closed_forms, sweep_comparative_statics, ClosedFormReport, ExpGameParams, SweepRow};
pub use detgame::{clock_auction, solve_scenario1, solve_scenario2, Builder, ClockResult, DeterministicGame, GameOutcome};
pub use dist::{fosd_dominates, DistSpec, ValueDistribution};
pub use error::{Error, Result};
pub use mc::{MCConfig, MCEstimate};
pub use quad::{integrate, Quadrature};
pub use stochgame::{Scenario, ScenarioComparison, StochasticGame};
