//! Builder-win regressions on pre-block volatility.
//!
//! The predictor `x` is the absolute log10 CEX price change over the 12
//! seconds before a block. Published coefficients put "1% volatility" at
//! `x = 0.001` and "2%" at `x = 0.002`; that is the convention used here,
//! although `log10(1.01)` is about 0.0043.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detgame::{solve_scenario1, Builder, DeterministicGame};
use crate::dist::ValueDistribution;
use crate::error::{ensure_finite, ensure_nonneg, Error, Result};

pub const DEFAULT_FIT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100;
/// Coefficient magnitude treated as divergence to infinity.
pub const SEPARATION_LIMIT: f64 = 1e6;

/// Binary logit fitted to HFT-builder wins (intercept, slope per unit of `x`).
pub const TABLE1: LogitModel = LogitModel { beta0: -0.821, beta1: 2055.151 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogitModel {
    pub beta0: f64,
    pub beta1: f64,
}

impl LogitModel {
    pub fn new(beta0: f64, beta1: f64) -> Result<Self> {
        Ok(LogitModel { beta0: ensure_finite("beta0", beta0)?, beta1: ensure_finite("beta1", beta1)? })
    }

    pub fn log_odds(&self, x: f64) -> f64 {
        self.beta0 + self.beta1 * x
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `P(y = 1 | x)`.
pub fn logit_predict(m: &LogitModel, x: f64) -> f64 {
    sigmoid(m.log_odds(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub block_number: u64,
    pub builder: String,
    /// Absolute log10 price change before the block.
    pub x: f64,
    pub is_hft: bool,
}

impl Observation {
    pub fn new(block_number: u64, builder: impl Into<String>, x: f64, is_hft: bool) -> Result<Self> {
        Ok(Observation { block_number, builder: builder.into(), x: ensure_nonneg("x", x)?, is_hft })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogitFit {
    pub model: LogitModel,
    /// Standard errors of `(beta0, beta1)`.
    pub std_errors: [f64; 2],
    pub iterations: usize,
    pub log_likelihood: f64,
}

impl LogitFit {
    pub fn z_scores(&self) -> [f64; 2] {
        [self.model.beta0 / self.std_errors[0], self.model.beta1 / self.std_errors[1]]
    }
}

struct Newton {
    score: [f64; 2],
    info: [f64; 3],
    log_lik: f64,
}

fn newton_terms(data: &[Observation], b: [f64; 2]) -> Newton {
    let (mut g0, mut g1) = (0.0, 0.0);
    let (mut i00, mut i01, mut i11) = (0.0, 0.0, 0.0);
    let mut ll = 0.0;
    for obs in data {
        let eta = b[0] + b[1] * obs.x;
        let p = sigmoid(eta);
        let y = if obs.is_hft { 1.0 } else { 0.0 };
        let w = p * (1.0 - p);
        g0 += y - p;
        g1 += (y - p) * obs.x;
        i00 += w;
        i01 += w * obs.x;
        i11 += w * obs.x * obs.x;
        // y*eta - log(1 + e^eta)
        let softplus = eta.max(0.0) + (-eta.abs()).exp().ln_1p();
        ll += y * eta - softplus;
    }
    Newton { score: [g0, g1], info: [i00, i01, i11], log_lik: ll }
}

fn invert(info: [f64; 3]) -> Option<[f64; 3]> {
    let [a, b, d] = info;
    let det = a * d - b * b;
    if !(det.is_finite() && det > 0.0) {
        return None;
    }
    Some([d / det, -b / det, a / det])
}

/// With a single predictor, the likelihood has no finite maximum when the
/// two classes occupy non-overlapping ranges of `x`.
fn separated(data: &[Observation]) -> bool {
    let range = |class: bool| {
        data.iter()
            .filter(|o| o.is_hft == class)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| (lo.min(o.x), hi.max(o.x)))
    };
    let (lo1, hi1) = range(true);
    let (lo0, hi0) = range(false);
    hi0 <= lo1 || hi1 <= lo0
}

/// Maximum-likelihood binary logit by iteratively reweighted least squares
/// (Newton–Raphson on the binomial log-likelihood).
pub fn logit_fit(data: &[Observation], tol: f64, max_iter: usize) -> Result<LogitFit> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid("tol", format!("must be > 0, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter", "must be >= 1"));
    }
    let positives = data.iter().filter(|o| o.is_hft).count();
    if positives == 0 || positives == data.len() {
        return Err(Error::DegenerateData("outcome is constant; both classes are required".into()));
    }

    if separated(data) {
        return Err(Error::PerfectSeparation { iteration: 0, limit: SEPARATION_LIMIT });
    }

    let rate = positives as f64 / data.len() as f64;
    let mut beta = [(rate / (1.0 - rate)).ln(), 0.0];
    for iteration in 1..=max_iter {
        let terms = newton_terms(data, beta);
        let inv = invert(terms.info)
            .ok_or_else(|| Error::DegenerateData("information matrix is singular (constant predictor?)".into()))?;
        let step = [
            inv[0] * terms.score[0] + inv[1] * terms.score[1],
            inv[1] * terms.score[0] + inv[2] * terms.score[1],
        ];
        beta = [beta[0] + step[0], beta[1] + step[1]];
        if beta.iter().any(|b| !b.is_finite() || b.abs() > SEPARATION_LIMIT) {
            return Err(Error::PerfectSeparation { iteration, limit: SEPARATION_LIMIT });
        }
        if step[0].abs().max(step[1].abs()) < tol {
            let last = newton_terms(data, beta);
            let cov = invert(last.info)
                .ok_or_else(|| Error::DegenerateData("information matrix is singular at the optimum".into()))?;
            return Ok(LogitFit {
                model: LogitModel { beta0: beta[0], beta1: beta[1] },
                std_errors: [cov[0].sqrt(), cov[2].sqrt()],
                iterations: iteration,
                log_likelihood: last.log_lik,
            });
        }
    }
    Err(Error::FitNonConvergence { iterations: max_iter })
}

/// Draws `n` observations with `x ~ U[x_lo, x_hi]` and `y ~ Bernoulli(logit_predict(m, x))`.
pub fn sample_logit_data(m: &LogitModel, n: usize, x_lo: f64, x_hi: f64, seed: u64) -> Result<Vec<Observation>> {
    ensure_nonneg("x_lo", x_lo)?;
    ensure_finite("x_hi", x_hi)?;
    if x_hi < x_lo {
        return Err(Error::invalid("x_hi", format!("must be >= x_lo, got {x_hi} < {x_lo}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|i| {
            let x = x_lo + (x_hi - x_lo) * rng.random::<f64>();
            let y = rng.random::<f64>() < logit_predict(m, x);
            Observation { block_number: i as u64, builder: String::new(), x, is_hft: y }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    /// Mean top-of-block value per unit of volatility for builder A.
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub v_t: f64,
    pub volatility: ValueDistribution,
    pub n: usize,
    pub seed: u64,
}

/// Draws from `Exp(1 / (kappa * sigma))`. Zero volatility, or a rate too
/// large to represent, puts all mass at 0.
fn scaled_value<R: Rng + ?Sized>(kappa: f64, sigma: f64, rng: &mut R) -> f64 {
    match ValueDistribution::exponential(1.0 / (kappa * sigma)) {
        Ok(d) if sigma > 0.0 => d.sample(rng),
        _ => 0.0,
    }
}

/// Simulates blocks from the structural model: per block a volatility `σ`
/// is drawn, builder values are drawn from exponentials with means
/// `kappa_x * σ`, and `is_hft` records whether A wins the Scenario-1 PBS
/// auction. `x = σ`.
pub fn generate_synthetic(params: &SyntheticParams) -> Result<Vec<Observation>> {
    for (name, k) in [("kappa_a", params.kappa_a), ("kappa_b", params.kappa_b)] {
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::invalid(name, format!("must be finite and > 0, got {k}")));
        }
    }
    ensure_nonneg("v_t", params.v_t)?;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    (0..params.n)
        .map(|i| {
            let sigma = params.volatility.sample(&mut rng);
            let v_a = scaled_value(params.kappa_a, sigma, &mut rng);
            let v_b = scaled_value(params.kappa_b, sigma, &mut rng);
            let outcome = solve_scenario1(&DeterministicGame::new(v_a, v_b, params.v_t)?);
            let winner = outcome.block_winner;
            Observation::new(i as u64, winner.to_string(), sigma, winner == Builder::A)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnlClass {
    pub label: String,
    pub beta0: f64,
    pub beta1: f64,
}

/// Multinomial logit with an explicit reference class whose logit is 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MNLModel {
    pub classes: Vec<MnlClass>,
    pub reference: String,
}

impl MNLModel {
    pub fn new(classes: Vec<MnlClass>, reference: impl Into<String>) -> Result<Self> {
        let reference = reference.into();
        let mut seen = HashSet::new();
        for c in &classes {
            ensure_finite("beta0", c.beta0)?;
            ensure_finite("beta1", c.beta1)?;
            if !seen.insert(c.label.as_str()) || c.label == reference {
                return Err(Error::invalid("classes", format!("duplicate class label `{}`", c.label)));
            }
        }
        Ok(MNLModel { classes, reference })
    }

    /// Published six-builder coefficients. The reference class is not named
    /// in the source table.
    pub fn table2() -> Self {
        let rows = [
            ("BeaverBuild", -0.4144, 1386.2014),
            ("Blocknative", -2.4772, 1629.2443),
            ("Builder 69", 0.0152, -527.4993),
            ("Flashbots", -0.4522, -458.7271),
            ("Manta", -3.2312, 3824.6414),
            ("Rsync Builder", -0.6812, 2093.8362),
        ];
        let classes = rows
            .iter()
            .map(|&(label, beta0, beta1)| MnlClass { label: label.to_owned(), beta0, beta1 })
            .collect();
        MNLModel::new(classes, "reference").expect("table coefficients are valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProbability {
    pub label: String,
    pub probability: f64,
}

/// Softmax over the class logits plus the reference (listed last).
pub fn mnl_predict(m: &MNLModel, x: f64) -> Result<Vec<ClassProbability>> {
    ensure_finite("x", x)?;
    let logits: Vec<f64> = m
        .classes
        .iter()
        .map(|c| c.beta0 + c.beta1 * x)
        .chain(std::iter::once(0.0))
        .collect();
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let labels = m.classes.iter().map(|c| c.label.clone()).chain(std::iter::once(m.reference.clone()));
    Ok(labels
        .zip(weights)
        .map(|(label, w)| ClassProbability { label, probability: w / total })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn round3(p: f64) -> f64 {
        (p * 1000.0).round() / 1000.0
    }

    #[test]
    fn table1_points() {
        assert_eq!(round3(logit_predict(&TABLE1, 0.0)), 0.306);
        assert_eq!(round3(logit_predict(&TABLE1, 0.001)), 0.775);
        assert_eq!(round3(logit_predict(&TABLE1, 0.002)), 0.964);
        assert_eq!(logit_predict(&LogitModel::new(0.0, 0.0).unwrap(), 123.0), 0.5);
    }

    #[test]
    fn fit_recovers_truth() {
        let truth = LogitModel::new(-0.8, 2000.0).unwrap();
        let data = sample_logit_data(&truth, 10_000, 0.0, 0.003, 11).unwrap();
        let fit = logit_fit(&data, DEFAULT_FIT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((fit.model.beta0 - truth.beta0).abs() <= 3.0 * fit.std_errors[0], "{fit:?}");
        assert!((fit.model.beta1 - truth.beta1).abs() <= 3.0 * fit.std_errors[1], "{fit:?}");
    }

    #[test]
    fn fit_recovers_null_slope() {
        let truth = LogitModel::new(-0.8, 0.0).unwrap();
        let data = sample_logit_data(&truth, 10_000, 0.0, 0.003, 12).unwrap();
        let fit = logit_fit(&data, DEFAULT_FIT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!(fit.model.beta1.abs() <= 3.0 * fit.std_errors[1]);
    }

    #[test]
    fn fit_error_paths() {
        let constant: Vec<_> = (0..10).map(|i| Observation::new(i, "", i as f64, true).unwrap()).collect();
        assert!(matches!(logit_fit(&constant, 1e-10, 100), Err(Error::DegenerateData(_))));

        let separated: Vec<_> = (0..20)
            .map(|i| Observation::new(i, "", i as f64 * 0.1, i >= 10).unwrap())
            .collect();
        assert!(matches!(logit_fit(&separated, 1e-10, 100), Err(Error::PerfectSeparation { .. })));

        let data = sample_logit_data(&TABLE1, 1_000, 0.0, 0.003, 1).unwrap();
        assert!(matches!(logit_fit(&data, 1e-10, 1), Err(Error::FitNonConvergence { iterations: 1 })));
    }

    #[test]
    fn fit_error_shrinks_with_sample_size() {
        let truth = LogitModel::new(-0.8, 2000.0).unwrap();
        // root-mean-square slope error over 20 seeds per sample size
        let rmse = |n: usize| -> f64 {
            let sq: f64 = (0..20)
                .map(|s| {
                    let data = sample_logit_data(&truth, n, 0.0, 0.003, 100 + s).unwrap();
                    let fit = logit_fit(&data, DEFAULT_FIT_TOL, DEFAULT_MAX_ITER).unwrap();
                    (fit.model.beta1 - truth.beta1).powi(2)
                })
                .sum();
            (sq / 20.0).sqrt()
        };
        let errs = [rmse(1_000), rmse(10_000), rmse(100_000)];
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        // each tenfold increase should cut the error by roughly sqrt(10)
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 1.8 && ratio < 5.5, "{errs:?}");
        }
    }

    #[test]
    fn mnl_uniform_and_table_points() {
        let zero = MNLModel::new(
            (0..4).map(|i| MnlClass { label: format!("c{i}"), beta0: 0.0, beta1: 0.0 }).collect(),
            "ref",
        )
        .unwrap();
        for p in mnl_predict(&zero, 0.7).unwrap() {
            assert!((p.probability - 0.2).abs() < 1e-15);
        }

        let t2 = MNLModel::table2();
        let probs = mnl_predict(&t2, 0.0).unwrap();
        let reference = probs.last().unwrap().probability;
        let beaver = probs.iter().find(|p| p.label == "BeaverBuild").unwrap().probability;
        assert!((beaver / reference - (-0.4144f64).exp()).abs() < 1e-12);
        assert!((beaver / reference - 0.661).abs() < 5e-4);

        let probs = mnl_predict(&t2, 0.001).unwrap();
        let reference = probs.last().unwrap().probability;
        let manta = probs.iter().find(|p| p.label == "Manta").unwrap().probability;
        assert!(((manta / reference).ln() - 0.5934414).abs() < 1e-9);
    }

    #[test]
    fn mnl_rejects_duplicates() {
        let dup = vec![
            MnlClass { label: "x".into(), beta0: 0.0, beta1: 0.0 },
            MnlClass { label: "x".into(), beta0: 1.0, beta1: 0.0 },
        ];
        assert!(MNLModel::new(dup, "ref").is_err());
        let clash = vec![MnlClass { label: "ref".into(), beta0: 0.0, beta1: 0.0 }];
        assert!(MNLModel::new(clash, "ref").is_err());
    }

    #[test]
    fn synthetic_basics() {
        let params = SyntheticParams {
            kappa_a: 2.0,
            kappa_b: 1.0,
            v_t: 0.0,
            volatility: ValueDistribution::exponential(1000.0).unwrap(),
            n: 0,
            seed: 5,
        };
        assert!(generate_synthetic(&params).unwrap().is_empty());

        let params = SyntheticParams { n: 100_000, ..params };
        let a = generate_synthetic(&params).unwrap();
        assert_eq!(a, generate_synthetic(&params).unwrap());
        let wins = a.iter().filter(|o| o.is_hft).count() as f64 / a.len() as f64;
        let se = (2.0 / 9.0 / a.len() as f64).sqrt();
        assert!((wins - 2.0 / 3.0).abs() <= 4.0 * se, "{wins}");
        assert!(a.iter().all(|o| o.x >= 0.0 && (o.builder == "A") == o.is_hft));
    }

    #[test]
    fn zero_volatility_ties_go_to_a() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(scaled_value(2.0, 0.0, &mut rng), 0.0);
        assert_eq!(scaled_value(2.0, 1e-320, &mut rng), 0.0);
        assert!(scaled_value(2.0, 0.5, &mut rng) > 0.0);
        let o = solve_scenario1(&DeterministicGame::new(0.0, 0.0, 0.2).unwrap());
        assert_eq!(o.block_winner, Builder::A);
    }

    #[test]
    fn separation_detected_up_front() {
        let overlapping: Vec<_> = (0..20)
            .map(|i| Observation::new(i, "", (i % 7) as f64 * 0.1, i % 3 == 0).unwrap())
            .collect();
        assert!(!separated(&overlapping));
        let touching: Vec<_> = (0..4)
            .map(|i| Observation::new(i, "", [0.0, 0.1, 0.1, 0.2][i as usize], i >= 2).unwrap())
            .collect();
        assert!(separated(&touching));
    }

    proptest! {
        #[test]
        fn logit_increasing_and_mirror(b0 in -5.0f64..5.0, b1 in 0.1f64..3000.0, x in 0.0f64..0.01, dx in 1e-6f64..0.01) {
            let m = LogitModel::new(b0, b1).unwrap();
            prop_assert!(logit_predict(&m, x + dx) > logit_predict(&m, x) || logit_predict(&m, x) == 1.0);
            // intercept negated, evaluated at -x
            let mirror = LogitModel::new(-b0, b1).unwrap();
            prop_assert!((logit_predict(&m, x) + logit_predict(&mirror, -x) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn mnl_sums_to_one(x in -0.01f64..0.01) {
            let probs = mnl_predict(&MNLModel::table2(), x).unwrap();
            let total: f64 = probs.iter().map(|p| p.probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
