//! Distributions over nonnegative top-of-block values.
//!
//! Every distribution carries a `support_hint`, the point past which the
//! upper tail mass is at most [`TAIL_MASS`]. Integrals over `[0, ∞)` are
//! truncated there.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::quad::integrate;

/// Tail mass beyond `support_hint`.
pub const TAIL_MASS: f64 = 1e-10;
/// Default grid resolution for [`fosd_dominates`].
pub const FOSD_GRID_POINTS: usize = 10_000;
/// Slack allowed when comparing CDFs on the dominance grid.
pub const FOSD_SLACK: f64 = 1e-12;

/// Configuration form of a distribution, e.g. `{"family": "exponential", "rate": 2.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DistSpec {
    Exponential { rate: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistSpec", into = "DistSpec")]
pub struct ValueDistribution {
    spec: DistSpec,
    support_hint: f64,
}

impl TryFrom<DistSpec> for ValueDistribution {
    type Error = Error;

    fn try_from(spec: DistSpec) -> Result<Self> {
        match spec {
            DistSpec::Exponential { rate } => ValueDistribution::exponential(rate),
        }
    }
}

impl From<ValueDistribution> for DistSpec {
    fn from(d: ValueDistribution) -> Self {
        d.spec
    }
}

impl ValueDistribution {
    /// Exponential distribution with the given rate (mean `1 / rate`).
    pub fn exponential(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::invalid("rate", format!("must be finite and > 0, got {rate}")));
        }
        let mut d = ValueDistribution { spec: DistSpec::Exponential { rate }, support_hint: 0.0 };
        d.support_hint = d.quantile(1.0 - TAIL_MASS);
        Ok(d)
    }

    pub fn spec(&self) -> DistSpec {
        self.spec
    }

    pub fn support_hint(&self) -> f64 {
        self.support_hint
    }

    /// Rate parameter of an exponential distribution.
    pub fn rate(&self) -> Option<f64> {
        match self.spec {
            DistSpec::Exponential { rate } => Some(rate),
        }
    }

    pub fn cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        match self.spec {
            DistSpec::Exponential { rate } => -(-rate * v).exp_m1(),
        }
    }

    pub fn pdf(&self, v: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        match self.spec {
            DistSpec::Exponential { rate } => rate * (-rate * v).exp(),
        }
    }

    /// Inverse CDF. `quantile(1.0)` is `+∞`.
    pub fn quantile(&self, q: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&q), "quantile level {q} outside [0, 1]");
        match self.spec {
            DistSpec::Exponential { rate } => -(-q).ln_1p() / rate,
        }
    }

    pub fn mean(&self) -> f64 {
        match self.spec {
            DistSpec::Exponential { rate } => 1.0 / rate,
        }
    }

    /// Draws one value by inversion; the caller owns the generator.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u)
    }
}

/// Weak first-order stochastic dominance of `f` over `g`, checked on a
/// uniform grid of `grid_points` values spanning both supports.
pub fn fosd_dominates(f: &ValueDistribution, g: &ValueDistribution, grid_points: usize) -> Result<bool> {
    if grid_points < 2 {
        return Err(Error::invalid("grid_points", format!("must be >= 2, got {grid_points}")));
    }
    let upper = f.support_hint().max(g.support_hint());
    let step = upper / (grid_points - 1) as f64;
    Ok((0..grid_points).all(|i| {
        let v = i as f64 * step;
        f.cdf(v) <= g.cdf(v) + FOSD_SLACK
    }))
}
