use serde::{Deserialize, Serialize};

use super::context::{SlopeContext, Tuple};
use super::perturbation::Perturbation;
use crate::error::Result;
use crate::lp::{LinearProgram, Relation};
use crate::tol::TOL_DEV;

/// First derivatives at `α = 0` of `f1 = I(X;V|U,Y1)` and
/// `f2 = I(V;X,Y1|U) - I(Yr;V|U)` along a direction, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FPrimes {
    pub f1: f64,
    pub f2: f64,
}

impl FPrimes {
    pub fn min(&self) -> f64 {
        self.f1.min(self.f2)
    }
}

/// Per-coordinate gradients `(a, b)` of `f1` and `f2`; zero off the free set.
fn gradients(ctx: &SlopeContext) -> (Vec<f64>, Vec<f64>) {
    let nv = ctx.n_v();
    let mut a = vec![0.0; ctx.n_tuples() * nv];
    let mut b = vec![0.0; ctx.n_tuples() * nv];
    for tp in ctx.tuples() {
        for v in 0..nv {
            if !ctx.is_free(&tp, v) {
                continue;
            }
            let pt = ctx.p_tuple(&tp);
            let num = ctx.v_given_uxy1(&tp, v);
            a[tp.t * nv + v] = pt * (num / ctx.v_given_uy1(&tp, v)).log2();
            b[tp.t * nv + v] = pt * (num / ctx.v_given_uyr(&tp, v)).log2();
        }
    }
    (a, b)
}

pub fn f_primes(ctx: &SlopeContext, pert: &Perturbation) -> FPrimes {
    let (a, b) = gradients(ctx);
    let r = pert.values();
    FPrimes {
        f1: a.iter().zip(r).map(|(x, y)| x * y).sum(),
        f2: b.iter().zip(r).map(|(x, y)| x * y).sum(),
    }
}

/// `φ(1 + δ) = (1 + δ) ln(1 + δ) - δ`, accurate for tiny `δ`.
fn phi(delta: f64) -> f64 {
    if delta.abs() < 1e-2 {
        // alternating series sum_{k>=2} (-δ)^k / (k (k - 1))
        let mut term = delta * delta;
        let mut sum = 0.0;
        for k in 2..12 {
            sum += term / (k * (k - 1)) as f64;
            term *= -delta;
        }
        sum
    } else {
        (1.0 + delta) * delta.ln_1p() - delta
    }
}

/// The CF rate `I_q(X,Y1;V|U,Yr)` of the perturbed bundle, computed as a sum
/// of divergences so that the `O(α²)` value keeps full relative precision.
pub fn ccf_at(ctx: &SlopeContext, pert: &Perturbation, alpha: f64) -> f64 {
    let nv = ctx.n_v();
    let [nu, _, _, nyr, _] = ctx.dims();
    // r̄(v | u, y_r) = Σ p(x, y_1 | u, y_r) r(v | u, x, y_1, y_r)
    let mut rbar = vec![0.0; nu * nyr * nv];
    for tp in ctx.tuples() {
        let m = ctx.p_uyr_at(ctx.uyr(&tp));
        if m <= 0.0 {
            continue;
        }
        let w = ctx.p_tuple(&tp) / m;
        for v in 0..nv {
            rbar[ctx.uyr(&tp) * nv + v] += w * pert.at(tp.t, v);
        }
    }
    let mut total = 0.0;
    for tp in ctx.tuples() {
        let pt = ctx.p_tuple(&tp);
        if pt <= 0.0 {
            continue;
        }
        let mut d = 0.0;
        for v in 0..nv {
            let rb = rbar[ctx.uyr(&tp) * nv + v];
            let qbar = ctx.v_given_uyr(&tp, v) + alpha * rb;
            if qbar <= 0.0 {
                continue;
            }
            d += qbar * phi(alpha * (pert.at(tp.t, v) - rb) / qbar);
        }
        total += pt * d;
    }
    (total / std::f64::consts::LN_2).max(0.0)
}

/// Result of the direction LP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub perturbation: Perturbation,
    /// Optimal `min(f1', f2')` over directions in the unit box.
    pub lp_value: f64,
    /// Derivatives re-evaluated on the returned direction.
    pub f_primes: FPrimes,
}

/// Maximises `min(f1'(r), f2'(r))` over zero-row-sum directions supported
/// on the base joint with `|r| <= 1` entrywise.
pub fn find_direction(ctx: &SlopeContext) -> Result<Direction> {
    let nv = ctx.n_v();
    let (a, b) = gradients(ctx);
    let rows: Vec<(Tuple, Vec<usize>)> = ctx
        .tuples()
        .map(|tp| {
            let free: Vec<usize> = (0..nv).filter(|&v| ctx.is_free(&tp, v)).collect();
            (tp, free)
        })
        .filter(|(_, f)| f.len() >= 2)
        .collect();
    let coords: Vec<usize> = rows
        .iter()
        .flat_map(|(tp, f)| f.iter().map(move |&v| tp.t * nv + v))
        .collect();
    let scale = coords
        .iter()
        .map(|&i| a[i].abs().max(b[i].abs()))
        .fold(0.0_f64, f64::max);
    if coords.is_empty() || scale == 0.0 {
        let zero = Perturbation::zero(ctx);
        return Ok(Direction {
            f_primes: f_primes(ctx, &zero),
            perturbation: zero,
            lp_value: 0.0,
        });
    }

    // variables w_i = r_i + 1 in [0, 2], then t >= 0
    let n = coords.len();
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LinearProgram::maximize(objective);
    for g in [&a, &b] {
        let mut c: Vec<f64> = coords.iter().map(|&i| g[i] / scale).collect();
        let rhs: f64 = c.iter().sum();
        c.push(-1.0);
        lp.add_constraint(c, Relation::Ge, rhs);
    }
    let mut k = 0;
    for (_, free) in &rows {
        let terms: Vec<(usize, f64)> = (k..k + free.len()).map(|j| (j, 1.0)).collect();
        lp.add_sparse(&terms, Relation::Eq, free.len() as f64);
        k += free.len();
    }
    for j in 0..n {
        lp.upper_bound(j, 2.0);
    }
    let sol = lp.solve()?;

    let mut r = vec![0.0; ctx.n_tuples() * nv];
    for (j, &i) in coords.iter().enumerate() {
        r[i] = sol.x[j] - 1.0;
    }
    let pert = Perturbation::from_raw(ctx, r);
    Ok(Direction {
        f_primes: f_primes(ctx, &pert),
        perturbation: pert,
        lp_value: sol.objective * scale,
    })
}

/// A `λ` satisfying the alignment condition, with the largest spread of the
/// residual `d(v)` over all supported tuples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaWitness {
    pub lambda: f64,
    pub max_dev: f64,
}

/// For each supported tuple, the pairs `(D(v), E(v))` with
/// `D = log p(v|u,x,y1) - log p(v|u,yr)` and `E = log p(v|u,y1) - log p(v|u,yr)`,
/// so that `d_λ(v) = D(v) - λ E(v)`.
fn residual_rows(ctx: &SlopeContext) -> Vec<Vec<(f64, f64)>> {
    ctx.tuples()
        .filter(|tp| ctx.p_tuple(tp) > ctx.support_threshold())
        .map(|tp| {
            ctx.support(&tp)
                .into_iter()
                .map(|v| {
                    let c = ctx.v_given_uyr(&tp, v).log2();
                    (ctx.v_given_uxy1(&tp, v).log2() - c, ctx.v_given_uy1(&tp, v).log2() - c)
                })
                .collect::<Vec<_>>()
        })
        .filter(|row| row.len() >= 2)
        .collect()
}

fn deviation(rows: &[Vec<(f64, f64)>], lambda: f64) -> f64 {
    rows.iter()
        .map(|row| {
            let (lo, hi) = row
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(d, e)| {
                    let x = d - lambda * e;
                    (lo.min(x), hi.max(x))
                });
            hi - lo
        })
        .fold(0.0, f64::max)
}

/// Spread of `d_λ(v)` at a given `λ`.
pub fn lambda_deviation(ctx: &SlopeContext, lambda: f64) -> f64 {
    deviation(&residual_rows(ctx), lambda)
}

/// Roots of the pairwise equations `d_λ(v_a) = d_λ(v_b)` lying in `[0, 1]`.
fn analytic_candidates(rows: &[Vec<(f64, f64)>]) -> Vec<f64> {
    let mut out = Vec::new();
    for row in rows {
        for (i, &(d1, e1)) in row.iter().enumerate() {
            for &(d2, e2) in &row[i + 1..] {
                let de = e1 - e2;
                if de.abs() <= 1e-12 {
                    continue;
                }
                let l = (d1 - d2) / de;
                if (-1e-9..=1.0 + 1e-9).contains(&l) {
                    out.push(l.clamp(0.0, 1.0));
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-12);
    out
}

/// Searches for `λ ∈ [0, 1]` making `d_λ(v)` constant on every support,
/// trying the analytic pairwise roots before a uniform grid.
pub fn check_lambda_with(ctx: &SlopeContext, grid: usize, tol_dev: f64) -> Option<LambdaWitness> {
    let rows = residual_rows(ctx);
    let grid_points = (0..grid.max(2)).map(|i| i as f64 / (grid.max(2) - 1) as f64);
    analytic_candidates(&rows)
        .into_iter()
        .chain(grid_points)
        .map(|lambda| LambdaWitness {
            lambda,
            max_dev: deviation(&rows, lambda),
        })
        .find(|w| w.max_dev <= tol_dev)
}

pub fn check_lambda(ctx: &SlopeContext, grid: usize) -> Option<LambdaWitness> {
    check_lambda_with(ctx, grid, TOL_DEV)
}
