use serde::{Deserialize, Serialize};

use super::context::SlopeContext;
use super::direction::{ccf_at, f_primes, FPrimes};
use super::perturbation::{alpha_max_with_entry, perturb, Perturbation};
use crate::error::{Error, Result};
use crate::relaynet::{build_joint, eval_thm1_joint, CodingDist, RelayNetSpec, T_X_Y1V_U, T_X_Y1YR_U};
use crate::tol::TOL_NORM;

/// Default step sizes `1e-1, 3e-2, 1e-2, ..., 1e-6`.
pub const DEFAULT_ALPHAS: [f64; 11] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6];

/// [`DEFAULT_ALPHAS`] restricted to `α <= alpha_max / 2`.
pub fn default_schedule(alpha_max: f64) -> Vec<f64> {
    DEFAULT_ALPHAS
        .iter()
        .copied()
        .filter(|&a| a <= alpha_max / 2.0)
        .collect()
}

fn check_schedule(base: &CodingDist, pert: &Perturbation, alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::EmptySchedule);
    }
    let (amax, _) = alpha_max_with_entry(base, pert)?;
    for &a in alphas {
        // perturb produces the precise error, naming the binding entry
        if !(a >= 0.0 && a <= amax) {
            perturb(base, pert, a)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvaturePoint {
    pub alpha: f64,
    pub ccf: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curvature {
    pub points: Vec<CurvaturePoint>,
    /// Least-squares slope of `log ccf` against `log α`; absent when fewer
    /// than two points have positive `α` and `ccf`.
    pub fitted_exponent: Option<f64>,
}

/// Least-squares slope through `(ln x, ln y)` over positive pairs.
pub fn loglog_slope(pairs: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `C_CF(α)` and `C_CF(α) / α` along a schedule.
pub fn ccf_curvature(ctx: &SlopeContext, base: &CodingDist, pert: &Perturbation, alphas: &[f64]) -> Result<Curvature> {
    check_schedule(base, pert, alphas)?;
    let points: Vec<CurvaturePoint> = alphas
        .iter()
        .map(|&alpha| {
            let ccf = if alpha == 0.0 { 0.0 } else { ccf_at(ctx, pert, alpha) };
            CurvaturePoint {
                alpha,
                ccf,
                ratio: if alpha > 0.0 { ccf / alpha } else { 0.0 },
            }
        })
        .collect();
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.alpha, p.ccf)).collect();
    Ok(Curvature {
        fitted_exponent: loglog_slope(&pairs),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub ccf: f64,
    pub delta_rate: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeCurve {
    /// Rate of the base bundle without cooperation.
    pub base_rate: f64,
    pub f_primes: FPrimes,
    /// Derivative of the rate along the direction predicted from the active
    /// bound(s) of the base point.
    pub first_order_slope: f64,
    pub points: Vec<CurvePoint>,
    /// The largest `α` from which the ratio increases at every further
    /// (smaller) step of the schedule.
    pub monotone_below: Option<f64>,
}

impl SlopeCurve {
    /// CSV with header `alpha,ccf,delta_rate,ratio`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["alpha", "ccf", "delta_rate", "ratio"])?;
        for p in &self.points {
            w.serialize((p.alpha, p.ccf, p.delta_rate, p.ratio))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn monotone_tail(points: &[CurvePoint]) -> Option<f64> {
    let mut sorted: Vec<&CurvePoint> = points.iter().filter(|p| p.alpha > 0.0).collect();
    sorted.sort_by(|a, b| b.alpha.total_cmp(&a.alpha));
    let mut k = sorted.len().checked_sub(1)?;
    while k > 0 && sorted[k].ratio > sorted[k - 1].ratio {
        k -= 1;
    }
    (k + 1 < sorted.len()).then(|| sorted[k].alpha)
}

/// Rate gain of the perturbed bundle when the CF link carries exactly the
/// `C_CF(α)` it needs.
pub fn slope_curve(spec: &RelayNetSpec, cd: &CodingDist, pert: &Perturbation, alphas: &[f64]) -> Result<SlopeCurve> {
    let ctx = SlopeContext::from_coding(spec, cd)?;
    check_schedule(cd, pert, alphas)?;
    let base = eval_thm1_joint(ctx.joint(), spec.c0(), 0.0)?;
    let base_rate = base.bound1.min(base.bound2);
    let fp = f_primes(&ctx, pert);

    let t = &base.term_breakdown;
    let d1 = if t[T_X_Y1V_U] < t[T_X_Y1YR_U] - TOL_NORM {
        fp.f1
    } else {
        fp.f1.min(0.0)
    };
    let first_order_slope = if base.bound1 < base.bound2 - TOL_NORM {
        d1
    } else if base.bound2 < base.bound1 - TOL_NORM {
        fp.f2
    } else {
        d1.min(fp.f2)
    };

    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        if alpha == 0.0 || pert.is_zero() {
            points.push(CurvePoint {
                alpha,
                ccf: 0.0,
                delta_rate: 0.0,
                ratio: 0.0,
            });
            continue;
        }
        let q = perturb(cd, pert, alpha)?;
        let ccf = ccf_at(&ctx, pert, alpha);
        let rep = eval_thm1_joint(&build_joint(spec, &q)?, spec.c0(), ccf)?;
        // c_cf is set to the exact requirement, so both bounds apply
        let delta_rate = rep.bound1.min(rep.bound2) - base_rate;
        points.push(CurvePoint {
            alpha,
            ccf,
            delta_rate,
            ratio: if ccf > 0.0 { delta_rate / ccf } else { 0.0 },
        });
    }
    Ok(SlopeCurve {
        base_rate,
        f_primes: fp,
        first_order_slope,
        monotone_below: monotone_tail(&points),
        points,
    })
}
