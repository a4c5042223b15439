//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Intervals are kept in a max-heap keyed on their local error estimate; the
//! worst one is bisected until the summed estimate drops below
//! `max(abs_tol, rel_tol * |value|)`. Evaluation order depends only on the
//! inputs, so results are reproducible bit for bit.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

pub const DEFAULT_ABS_TOL: f64 = 1e-9;
pub const DEFAULT_REL_TOL: f64 = 1e-8;
/// Subdivision limit: 2^20 intervals.
pub const MAX_INTERVALS: usize = 1 << 20;

// Kronrod abscissae (nonnegative half); odd indices are the 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub err_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct QuadOptions<'a> {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Interior points where the integrand is known to have a kink or jump.
    /// Points outside `(lo, hi)` are ignored.
    pub breaks: &'a [f64],
}

impl Default for QuadOptions<'_> {
    fn default() -> Self {
        QuadOptions {
            abs_tol: DEFAULT_ABS_TOL,
            rel_tol: DEFAULT_REL_TOL,
            max_intervals: MAX_INTERVALS,
            breaks: &[],
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        // ties on error fall back to position so the heap order is total
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteIntegrand { at: x })
        }
    };

    let fc = eval(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = eval(center - dx)? + eval(center + dx)?;
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Ok(Segment {
        lo,
        hi,
        value: kronrod * half,
        err: ((kronrod - gauss) * half).abs(),
    })
}

/// Integrates `f` over `[lo, hi]` with the default subdivision limit and no
/// break points.
pub fn integrate<F: FnMut(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Quadrature> {
    integrate_with(
        f,
        lo,
        hi,
        &QuadOptions {
            abs_tol,
            rel_tol,
            ..QuadOptions::default()
        },
    )
}

pub fn integrate_with<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    opts: &QuadOptions<'_>,
) -> Result<Quadrature> {
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("bounds", format!("must be finite, got [{lo}, {hi}]")));
    }
    if lo > hi {
        return Err(Error::invalid("bounds", format!("lo > hi ({lo} > {hi})")));
    }
    if [opts.abs_tol, opts.rel_tol].iter().any(|t| t.is_nan() || *t <= 0.0) {
        return Err(Error::invalid("tolerance", "abs_tol and rel_tol must be > 0"));
    }
    if opts.max_intervals == 0 {
        return Err(Error::invalid("max_intervals", "must be >= 1"));
    }
    if lo == hi {
        return Ok(Quadrature { value: 0.0, err_estimate: 0.0 });
    }

    let mut cuts: Vec<f64> = opts
        .breaks
        .iter()
        .copied()
        .filter(|b| *b > lo && *b < hi)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut heap = BinaryHeap::with_capacity(64);
    let mut start = lo;
    for end in cuts.into_iter().chain(std::iter::once(hi)) {
        heap.push(gauss_kronrod(&mut f, start, end)?);
        start = end;
    }

    loop {
        let (value, err) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.err));
        if err <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(Quadrature { value, err_estimate: err });
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::QuadratureNonConvergence {
                intervals: heap.len(),
                err_estimate: err,
            });
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // interval cannot be split further in floating point
            return Err(Error::QuadratureNonConvergence {
                intervals: heap.len() + 1,
                err_estimate: err,
            });
        }
        heap.push(gauss_kronrod(&mut f, worst.lo, mid)?);
        heap.push(gauss_kronrod(&mut f, mid, worst.hi)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64) -> Quadrature {
        integrate(f, lo, hi, DEFAULT_ABS_TOL, DEFAULT_REL_TOL).unwrap()
    }

    #[test]
    fn constant_integrand() {
        let q = quad(|_| 1.0, 0.0, 1.0);
        assert!((q.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_interval_is_zero() {
        let q = quad(|x| x.exp(), 3.0, 3.0);
        assert_eq!(q.value, 0.0);
        assert_eq!(q.err_estimate, 0.0);
    }

    #[test]
    fn one_minus_exp() {
        // v + e^{-v} from 0 to 1
        let expected = 1.0 + (-1.0f64).exp() - 1.0;
        let q = quad(|v| 1.0 - (-v).exp(), 0.0, 1.0);
        assert!((q.value - expected).abs() < 1e-12);
        assert!((q.value - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn error_estimate_within_tolerance() {
        let q = quad(|x| (10.0 * x).sin() * (-x).exp(), 0.0, 20.0);
        assert!(q.err_estimate <= DEFAULT_ABS_TOL.max(DEFAULT_REL_TOL * q.value.abs()));
    }

    #[test]
    fn kink_with_break_point() {
        let kink = |x: f64| (x - 0.3).abs();
        let exact = 0.5 * (0.3f64.powi(2) + 0.7f64.powi(2));
        let q = integrate_with(
            kink,
            0.0,
            1.0,
            &QuadOptions { breaks: &[0.3, 7.0], ..QuadOptions::default() },
        )
        .unwrap();
        assert!((q.value - exact).abs() < 1e-14);
        let plain = quad(kink, 0.0, 1.0);
        assert!((plain.value - exact).abs() < 1e-9);
    }

    #[test]
    fn deterministic() {
        let f = |x: f64| (x * x).cos() / (1.0 + x);
        assert_eq!(quad(f, 0.0, 7.0), quad(f, 0.0, 7.0));
    }

    #[test]
    fn reports_non_convergence() {
        let step = |x: f64| if x < std::f64::consts::FRAC_1_PI { 0.0 } else { 1.0 };
        let err = integrate_with(
            step,
            0.0,
            1.0,
            &QuadOptions { abs_tol: 1e-300, rel_tol: 1e-300, max_intervals: 16, breaks: &[] },
        )
        .unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { intervals: 16, .. }));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(integrate(|x| x, 1.0, 0.0, 1e-9, 1e-9).is_err());
        assert!(integrate(|x| x, 0.0, 1.0, 0.0, 1e-9).is_err());
        assert!(matches!(
            integrate(|x| 1.0 / x, 0.0, 1.0, 1e-9, 1e-9),
            Err(Error::NonFiniteIntegrand { .. }) | Err(Error::QuadratureNonConvergence { .. })
        ));
    }

    proptest! {
        #[test]
        fn exact_on_cubics(
            c in prop::array::uniform4(-10.0f64..10.0),
            lo in -5.0f64..5.0,
            width in 0.0f64..10.0,
        ) {
            let hi = lo + width;
            let p = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
            let anti = |x: f64| c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
            let q = quad(p, lo, hi);
            let exact = anti(hi) - anti(lo);
            prop_assert!((q.value - exact).abs() <= DEFAULT_ABS_TOL.max(1e-13 * exact.abs()));
        }
    }
}
