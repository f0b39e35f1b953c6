use rand::Rng;
use serde::{Deserialize, Serialize};

use super::context::SlopeContext;
use crate::error::{Error, Result};
use crate::prob::CondKernel;
use crate::relaynet::CodingDist;

/// Row sums of a direction must vanish to this accuracy, scaled by its size.
const ROW_SUM_SLACK: f64 = 1e-12;
/// Perturbed entries this close to 0 or 1 are snapped onto the boundary.
const SNAP: f64 = 1e-14;

/// A signed direction `r(v | u, x, y_1, y_r)` with zero row sums, laid out
/// like the `v_kernel` of the base bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    dims: [usize; 5],
    r: Vec<f64>,
}

fn label(dims: [usize; 5], i: usize) -> String {
    let [_, nx, ny1, nyr, nv] = dims;
    let v = i % nv;
    let t = i / nv;
    format!(
        "(u={}, x={}, y1={}, yr={}, v={v})",
        t / (nx * ny1 * nyr),
        (t / (ny1 * nyr)) % nx,
        (t / nyr) % ny1,
        t % nyr
    )
}

impl Perturbation {
    /// Validates `r` against the support of the base joint.
    pub fn new(ctx: &SlopeContext, r: Vec<f64>) -> Result<Self> {
        let nv = ctx.n_v();
        if r.len() != ctx.n_tuples() * nv {
            return Err(Error::InvalidPerturbation(format!(
                "expected {} entries, found {}",
                ctx.n_tuples() * nv,
                r.len()
            )));
        }
        if let Some(i) = r.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidPerturbation(format!(
                "entry {} is not finite",
                label(ctx.dims(), i)
            )));
        }
        let scale = r.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
        for tp in ctx.tuples() {
            let row = &r[tp.t * nv..(tp.t + 1) * nv];
            let sum: f64 = row.iter().sum();
            if sum.abs() > ROW_SUM_SLACK * scale {
                return Err(Error::InvalidPerturbation(format!(
                    "row (u={}, x={}, y1={}, yr={}) sums to {sum:e}",
                    tp.u, tp.x, tp.y1, tp.yr
                )));
            }
            for (v, &x) in row.iter().enumerate() {
                if x != 0.0 && !ctx.is_free(&tp, v) {
                    return Err(Error::InvalidPerturbation(format!(
                        "entry {} is {x} outside the support of the base joint",
                        label(ctx.dims(), tp.t * nv + v)
                    )));
                }
            }
        }
        Ok(Self { dims: ctx.dims(), r })
    }

    pub fn zero(ctx: &SlopeContext) -> Self {
        Self {
            dims: ctx.dims(),
            r: vec![0.0; ctx.n_tuples() * ctx.n_v()],
        }
    }

    /// A uniformly drawn direction on the free coordinates, centred per row
    /// and scaled to unit sup-norm (zero if nothing can move).
    pub fn random<R: Rng>(ctx: &SlopeContext, rng: &mut R) -> Self {
        let nv = ctx.n_v();
        let mut r = vec![0.0; ctx.n_tuples() * nv];
        for tp in ctx.tuples() {
            let free: Vec<usize> = (0..nv).filter(|&v| ctx.is_free(&tp, v)).collect();
            if free.len() < 2 {
                continue;
            }
            let draws: Vec<f64> = free.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean = draws.iter().sum::<f64>() / draws.len() as f64;
            for (&v, d) in free.iter().zip(draws) {
                r[tp.t * nv + v] = d - mean;
            }
        }
        Self::from_raw(ctx, r)
    }

    /// Rescales to unit sup-norm and re-centres rows exactly; zero vectors
    /// stay zero.
    pub(crate) fn from_raw(ctx: &SlopeContext, mut r: Vec<f64>) -> Self {
        let nv = ctx.n_v();
        let m = r.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if m > 0.0 {
            r.iter_mut().for_each(|x| *x /= m);
        }
        for tp in ctx.tuples() {
            let free: Vec<usize> = (0..nv).filter(|&v| ctx.is_free(&tp, v)).collect();
            for v in 0..nv {
                if !free.contains(&v) {
                    r[tp.t * nv + v] = 0.0;
                }
            }
            if let Some((&last, rest)) = free.split_last() {
                // put the rounding residue of the row sum on one coordinate
                r[tp.t * nv + last] = -rest.iter().map(|&v| r[tp.t * nv + v]).sum::<f64>();
            }
        }
        Self { dims: ctx.dims(), r }
    }

    pub fn dims(&self) -> [usize; 5] {
        self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.r
    }

    /// `r(v | tuple)` by flat tuple index.
    pub fn at(&self, t: usize, v: usize) -> f64 {
        self.r[t * self.dims[4] + v]
    }

    pub fn is_zero(&self) -> bool {
        self.r.iter().all(|&x| x == 0.0)
    }

    pub fn negated(&self) -> Self {
        Self {
            dims: self.dims,
            r: self.r.iter().map(|x| -x).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.r.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

fn check_dims(base: &CodingDist, pert: &Perturbation) -> Result<()> {
    if base.dims() != pert.dims {
        return Err(Error::InvalidPerturbation(format!(
            "direction has shape {:?}, base bundle {:?}",
            pert.dims,
            base.dims()
        )));
    }
    Ok(())
}

/// Largest `α` keeping every `p(v | u, y_r) + α r` inside `[0, 1]`, with the
/// entry that binds. Infinite only for the zero direction.
pub fn alpha_max_with_entry(base: &CodingDist, pert: &Perturbation) -> Result<(f64, Option<usize>)> {
    check_dims(base, pert)?;
    let p = base.v_kernel().data();
    let mut best = (f64::INFINITY, None);
    for (i, (&pi, &ri)) in p.iter().zip(&pert.r).enumerate() {
        let room = if ri < 0.0 {
            pi / -ri
        } else if ri > 0.0 {
            (1.0 - pi) / ri
        } else {
            continue;
        };
        if room < best.0 {
            best = (room, Some(i));
        }
    }
    Ok(best)
}

pub fn alpha_max(base: &CodingDist, pert: &Perturbation) -> Result<f64> {
    Ok(alpha_max_with_entry(base, pert)?.0)
}

/// `q(v | u, x, y_1, y_r) = p(v | u, y_r) + α r(v | u, x, y_1, y_r)`.
pub fn perturb(base: &CodingDist, pert: &Perturbation, alpha: f64) -> Result<CodingDist> {
    let (amax, binding) = alpha_max_with_entry(base, pert)?;
    if alpha == 0.0 {
        return Ok(base.clone());
    }
    if !(alpha > 0.0 && alpha <= amax * (1.0 + 1e-12)) || !alpha.is_finite() {
        let entry = match binding {
            Some(i) if alpha > 0.0 => label(pert.dims, i),
            _ => "alpha (must be a finite non-negative number)".to_string(),
        };
        return Err(Error::AlphaOutOfRange {
            alpha,
            alpha_max: amax,
            entry,
        });
    }
    let p = base.v_kernel().data();
    let q: Vec<f64> = p
        .iter()
        .zip(&pert.r)
        .map(|(&pi, &ri)| {
            if ri == 0.0 {
                return pi;
            }
            let x = (pi + alpha * ri).clamp(0.0, 1.0);
            if x <= SNAP {
                0.0
            } else if 1.0 - x <= SNAP {
                1.0
            } else {
                x
            }
        })
        .collect();
    let k = CondKernel::from_flat(base.v_kernel().from().to_vec(), base.v_kernel().to().to_vec(), &q)?;
    CodingDist::new(base.ux().clone(), k, false)
}
