use serde::{Deserialize, Serialize};

/// Normalization slack for pmfs and kernel rows, and feasibility slack for
/// the CF-rate comparison.
pub const TOL_NORM: f64 = 1e-9;
/// Probabilities at or below this value are treated as exact zeros.
pub const TOL_SUPP: f64 = 1e-12;
/// Maximum spread of the λ-alignment residual accepted as "constant".
pub const TOL_DEV: f64 = 1e-7;
/// Direction-LP optimum above this value certifies an improving direction.
pub const TOL_LP: f64 = 1e-9;
/// Default number of uniform λ grid points on [0, 1].
pub const LAMBDA_GRID: usize = 1001;

/// Numerical thresholds shared by the analyses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub norm: f64,
    pub supp: f64,
    pub dev: f64,
    pub lp: f64,
    pub lambda_grid: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            norm: TOL_NORM,
            supp: TOL_SUPP,
            dev: TOL_DEV,
            lp: TOL_LP,
            lambda_grid: LAMBDA_GRID,
        }
    }
}
