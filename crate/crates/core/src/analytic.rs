//! Closed forms for exponentially distributed top-of-block values and the
//! comparative-statics sweep over A's relative advantage.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_nonneg, Error, Result};
use crate::format::sig15;

pub const SWEEP_CSV_HEADER: &str = "ratio,win_s1,win_s2,profit_s1,profit_s2,v_ta,v_tb";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpGameParams {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub v_t: f64,
}

impl ExpGameParams {
    /// Requires `lambda_a < lambda_b` so that A dominates.
    pub fn new(lambda_a: f64, lambda_b: f64, v_t: f64) -> Result<Self> {
        let p = Self::unordered(lambda_a, lambda_b, v_t)?;
        if lambda_a >= lambda_b {
            return Err(Error::Precondition(format!(
                "builder A must be the stronger builder: lambda_a < lambda_b required, got {lambda_a} >= {lambda_b}"
            )));
        }
        Ok(p)
    }

    fn unordered(lambda_a: f64, lambda_b: f64, v_t: f64) -> Result<Self> {
        for (name, rate) in [("lambda_a", lambda_a), ("lambda_b", lambda_b)] {
            if !rate.is_finite() || rate <= 0.0 {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {rate}")));
            }
        }
        Ok(ExpGameParams { lambda_a, lambda_b, v_t: ensure_nonneg("v_t", v_t)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormReport {
    pub v_ta: f64,
    pub v_tb: f64,
    pub win_s1: f64,
    pub win_s2: f64,
    pub profit_s1: f64,
    pub profit_s2: f64,
    pub profit_gap: f64,
}

/// The two summands of `profit_s2 - profit_s1`: A's OFA margin and the gain
/// in A's PBS surplus from holding the transaction.
pub fn profit_gap_terms(p: &ExpGameParams) -> (f64, f64) {
    let (la, lb) = (p.lambda_a, p.lambda_b);
    let (ga, gb) = (-(-p.v_t * la).exp_m1(), -(-p.v_t * lb).exp_m1());
    let margin = (lb - la) * (la * gb + lb * ga) / (la * lb * (la + lb));
    (margin, gb / (la + lb))
}

fn evaluate(p: &ExpGameParams) -> ClosedFormReport {
    let (la, lb) = (p.lambda_a, p.lambda_b);
    // 1 - e^{-v_T λ}
    let (ga, gb) = (-(-p.v_t * la).exp_m1(), -(-p.v_t * lb).exp_m1());
    let (margin, pbs_gain) = profit_gap_terms(p);
    ClosedFormReport {
        v_ta: (la * gb + lb * ga) / (la * la + la * lb),
        v_tb: (lb * ga + la * gb) / (lb * lb + la * lb),
        win_s1: lb / (la + lb),
        win_s2: 1.0 - (-p.v_t * lb).exp() * la / (la + lb),
        profit_s1: lb / (la * (la + lb)),
        profit_s2: margin + (lb + la * gb) / (la * (la + lb)),
        profit_gap: margin + pbs_gain,
    }
}

pub fn exp_closed_forms(p: &ExpGameParams) -> Result<ClosedFormReport> {
    let p = ExpGameParams::new(p.lambda_a, p.lambda_b, p.v_t)?;
    Ok(evaluate(&p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `lambda_a / (lambda_a + lambda_b)`.
    pub ratio: f64,
    /// Set on the symmetric endpoint `ratio = 0.5`, which is evaluated as the
    /// limit of the closed forms rather than under strict ordering.
    pub boundary: bool,
    pub report: ClosedFormReport,
}

/// Evaluates the closed forms at `lambda_a = r * rate_sum`,
/// `lambda_b = (1 - r) * rate_sum` for each `r` in `ratios`, in order.
pub fn sweep_comparative_statics(v_t: f64, rate_sum: f64, ratios: &[f64]) -> Result<Vec<SweepRow>> {
    ensure_nonneg("v_t", v_t)?;
    if !rate_sum.is_finite() || rate_sum <= 0.0 {
        return Err(Error::invalid("rate_sum", format!("must be finite and > 0, got {rate_sum}")));
    }
    if let Some(bad) = ratios.iter().find(|r| !(**r > 0.0 && **r <= 0.5)) {
        return Err(Error::invalid("ratio", format!("must lie in (0, 0.5], got {bad}")));
    }
    ratios
        .par_iter()
        .map(|&ratio| {
            let boundary = ratio == 0.5;
            let p = if boundary {
                ExpGameParams::unordered(ratio * rate_sum, (1.0 - ratio) * rate_sum, v_t)?
            } else {
                ExpGameParams::new(ratio * rate_sum, (1.0 - ratio) * rate_sum, v_t)?
            };
            Ok(SweepRow { ratio, boundary, report: evaluate(&p) })
        })
        .collect()
}

/// Inclusive `lo..=hi` grid with spacing `step`. The final point snaps to
/// `hi` when it lands within floating-point noise of it.
pub fn ratio_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
        return Err(Error::invalid("grid", format!("need finite lo <= hi and step > 0, got {lo}:{hi}:{step}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| {
            let v = lo + i as f64 * step;
            if (v - hi).abs() <= 1e-9 * step {
                hi
            } else {
                v
            }
        })
        .collect())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        let r = &row.report;
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            sig15(row.ratio),
            sig15(r.win_s1),
            sig15(r.win_s2),
            sig15(r.profit_s1),
            sig15(r.profit_s2),
            sig15(r.v_ta),
            sig15(r.v_tb)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(la: f64, lb: f64, v_t: f64) -> ClosedFormReport {
        exp_closed_forms(&ExpGameParams { lambda_a: la, lambda_b: lb, v_t }).unwrap()
    }

    #[test]
    fn reference_point() {
        let r = report(1.0, 2.0, 1.0);
        let expect = [
            (r.v_ta, 0.709635),
            (r.v_tb, 0.354818),
            (r.win_s1, 0.666667),
            (r.win_s2, 0.954888),
            (r.profit_s1, 0.666667),
            (r.profit_s2, 1.309706),
        ];
        for (got, want) in expect {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        assert!((r.profit_gap - (r.profit_s2 - r.profit_s1)).abs() < 1e-12);
    }

    #[test]
    fn zero_transaction_value() {
        let r = report(1.0, 2.0, 0.0);
        assert_eq!(r.v_ta, 0.0);
        assert_eq!(r.v_tb, 0.0);
        assert!((r.win_s1 - r.win_s2).abs() < 1e-15);
        assert_eq!(r.profit_gap, 0.0);
    }

    #[test]
    fn small_transaction_ratio() {
        let r = report(1.0, 2.0, 1e-4);
        assert!((r.v_ta / r.v_tb - 2.0).abs() < 0.02);
    }

    #[test]
    fn rejects_unordered_rates() {
        let bad = ExpGameParams { lambda_a: 2.0, lambda_b: 1.0, v_t: 1.0 };
        assert!(matches!(exp_closed_forms(&bad), Err(Error::Precondition(_))));
        let eq = ExpGameParams { lambda_a: 1.0, lambda_b: 1.0, v_t: 1.0 };
        assert!(exp_closed_forms(&eq).is_err());
        let neg = ExpGameParams { lambda_a: -1.0, lambda_b: 1.0, v_t: 1.0 };
        assert!(matches!(exp_closed_forms(&neg), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn ordering_properties() {
        for la in [0.5, 1.0, 2.0] {
            for mult in [1.5, 2.0, 4.0] {
                for v_t in [0.1, 1.0, 2.0] {
                    let p = ExpGameParams { lambda_a: la, lambda_b: la * mult, v_t };
                    let r = exp_closed_forms(&p).unwrap();
                    assert!(r.v_ta > r.v_tb);
                    assert!(r.win_s2 >= r.win_s1);
                    let (t1, t2) = profit_gap_terms(&p);
                    assert!(t1 >= 0.0 && t2 >= 0.0);
                    assert!((t1 + t2 - r.profit_gap).abs() < 1e-12);
                    assert!((r.profit_gap - (r.profit_s2 - r.profit_s1)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sweep_symmetric_endpoint() {
        let rows = sweep_comparative_statics(1.0, 2.0, &[0.5]).unwrap();
        assert!(rows[0].boundary);
        assert_eq!(rows[0].report.win_s1, 0.5);
        assert!((rows[0].report.win_s2 - (1.0 - (-1.0f64).exp() / 2.0)).abs() < 1e-12);
        assert!((rows[0].report.win_s2 - 0.816060).abs() < 1e-6);
    }

    #[test]
    fn sweep_orders_and_monotonicity() {
        let grid = ratio_grid(0.1, 0.5, 0.05).unwrap();
        assert_eq!(grid.len(), 9);
        assert_eq!(*grid.last().unwrap(), 0.5);
        let rows = sweep_comparative_statics(1.0, 2.0, &grid).unwrap();
        for (row, r) in rows.iter().zip(&grid) {
            assert_eq!(row.ratio, *r);
            assert!(row.report.win_s2 >= row.report.win_s1);
        }
        for w in rows.windows(2) {
            assert!(w[1].report.win_s1 < w[0].report.win_s1);
        }
        for row in rows.iter().filter(|r| !r.boundary) {
            assert!(row.report.win_s2 - row.report.win_s1 > 0.0);
        }
    }

    #[test]
    fn sweep_rejects_out_of_range() {
        for bad in [0.0, 0.6, -0.1, f64::NAN] {
            assert!(sweep_comparative_statics(1.0, 2.0, &[0.1, bad]).is_err());
        }
        assert!(sweep_comparative_statics(1.0, 0.0, &[0.1]).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = sweep_comparative_statics(1.0, 2.0, &[0.25, 0.5]).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "ratio,win_s1,win_s2,profit_s1,profit_s2,v_ta,v_tb");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("0.5,0.5,0.816060"));
        assert_eq!(lines[1].split(',').count(), 7);
    }
}
