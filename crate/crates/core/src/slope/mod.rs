//! Perturbation analysis of the compression test channel at zero
//! cooperation.
//!
//! Starting from a Markov-form bundle with test channel `p(v | u, y_r)`, the
//! family `q = p + α r` lets `V` depend on `(x, y_1)` as well. Along such a
//! direction the CF rate `C_CF(α)` grows like `α²` while the two rate terms
//! `f1 = I(X;V|U,Y1)` and `f2 = I(V;X,Y1|U) - I(Yr;V|U)` move linearly. A
//! direction with `f1'(0) > 0` and `f2'(0) > 0` therefore buys rate at an
//! unbounded ratio per bit of cooperation. Such a direction exists exactly
//! when no `λ ∈ [0, 1]` makes
//!
//! ```text
//! log p(v|u,x,y1) - λ log p(v|u,y1) - (1-λ) log p(v|u,yr)
//! ```
//!
//! constant in `v` on every supported tuple; [`find_direction`] solves the
//! primal LP and [`check_lambda`] searches the dual.

mod context;
mod curve;
mod direction;
mod perturbation;
mod reduction;

pub use context::{SlopeContext, Tuple};
pub use curve::{
    ccf_curvature, default_schedule, loglog_slope, slope_curve, Curvature, CurvaturePoint, CurvePoint, SlopeCurve,
    DEFAULT_ALPHAS,
};
pub use direction::{
    ccf_at, check_lambda, check_lambda_with, f_primes, find_direction, lambda_deviation, Direction, FPrimes,
    LambdaWitness,
};
pub use perturbation::{alpha_max, alpha_max_with_entry, perturb, Perturbation};
pub use reduction::{corollary_verdict, deterministic_reduction, CorollaryVerdict, Reduction};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::relaynet::{pdcf_joint, CodingDist, RelayNetSpec, T_X_Y1V_U, T_X_Y1YR_U};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "INFINITE_SLOPE_CERTIFIED")]
    InfiniteSlopeCertified,
    #[serde(rename = "CONDITION_12_HOLDS")]
    AlignmentHolds,
    #[serde(rename = "PRECONDITION_FAILS")]
    PreconditionFails,
    /// The LP and the λ search disagree beyond tolerance.
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeVerdict {
    /// `I(X;Y1,V|U) < I(X;Y1,Yr|U)`.
    pub precondition_strict: bool,
    /// `I(X;Y1,Yr|U) - I(X;Y1,V|U)`.
    pub precondition_gap: f64,
    /// Rate of the base bundle without cooperation.
    pub pdcf_rate: f64,
    pub lp_value: f64,
    /// Derivatives re-evaluated on the LP direction.
    pub direction_f_primes: FPrimes,
    pub lambda_witness: Option<LambdaWitness>,
    pub verdict: Verdict,
    pub tolerances: Tolerances,
}

/// The verdict together with the improving direction found by the LP.
#[derive(Debug, Clone, PartialEq)]
pub struct Certification {
    pub verdict: SlopeVerdict,
    pub direction: Direction,
}

pub fn certify(spec: &RelayNetSpec, cd: &CodingDist, tol: &Tolerances) -> Result<Certification> {
    let ctx = SlopeContext::from_coding_with(spec, cd, tol.supp)?;
    let pd = pdcf_joint(ctx.joint(), spec.c0())?;
    let rep = crate::relaynet::thm1_terms(ctx.joint())?;
    let precondition_gap = rep[T_X_Y1YR_U] - rep[T_X_Y1V_U];
    let precondition_strict = precondition_gap > tol.norm;
    let direction = find_direction(&ctx)?;
    let lambda_witness = check_lambda_with(&ctx, tol.lambda_grid, tol.dev);
    let fp = direction.f_primes;
    let certified = direction.lp_value > tol.lp && fp.f1 > tol.lp / 2.0 && fp.f2 > tol.lp / 2.0;
    let verdict = if !precondition_strict {
        Verdict::PreconditionFails
    } else if lambda_witness.is_some() && !certified {
        Verdict::AlignmentHolds
    } else if lambda_witness.is_none() && certified {
        Verdict::InfiniteSlopeCertified
    } else {
        Verdict::Inconclusive
    };
    Ok(Certification {
        verdict: SlopeVerdict {
            precondition_strict,
            precondition_gap,
            pdcf_rate: pd.rate,
            lp_value: direction.lp_value,
            direction_f_primes: fp,
            lambda_witness,
            verdict,
            tolerances: *tol,
        },
        direction,
    })
}

/// Decides whether cooperation has infinite slope at this bundle.
pub fn infinite_slope_verdict(spec: &RelayNetSpec, cd: &CodingDist) -> Result<SlopeVerdict> {
    Ok(certify(spec, cd, &Tolerances::default())?.verdict)
}
