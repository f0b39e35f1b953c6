//! Seeded generators for random relay instances.
//!
//! Every generator takes an explicit RNG so that runs are reproducible; use
//! [`seeded`] to obtain one from a `u64`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::prob::{Alphabet, CondKernel, FiniteDist};
use crate::relaynet::{CodingDist, RelayNetSpec, U, V, X, Y1, YR};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Alphabet sizes of a relay instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub u: usize,
    pub x: usize,
    pub y1: usize,
    pub yr: usize,
    pub v: usize,
}

impl Shape {
    pub fn new(u: usize, x: usize, y1: usize, yr: usize, v: usize) -> Self {
        Self { u, x, y1, yr, v }
    }

    /// Each size uniform in `1..=max` (`2..=max` for `x`, `y1`, `yr`, `v`).
    pub fn random<R: Rng>(rng: &mut R, max: usize) -> Self {
        let max = max.max(2);
        Self {
            u: rng.gen_range(1..=max),
            x: rng.gen_range(2..=max),
            y1: rng.gen_range(2..=max),
            yr: rng.gen_range(2..=max),
            v: rng.gen_range(2..=max),
        }
    }
}

/// A pmf of length `n`. With `zero_prob > 0` each entry is dropped with that
/// probability, keeping at least one positive entry.
pub fn random_pmf<R: Rng>(rng: &mut R, n: usize, zero_prob: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| {
            if zero_prob > 0.0 && rng.gen_bool(zero_prob.min(1.0)) {
                0.0
            } else {
                // bounded away from zero so full-support draws stay well inside
                0.05 + rng.gen::<f64>()
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        let i = rng.gen_range(0..n);
        w[i] = 1.0;
    }
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

fn random_kernel<R: Rng>(rng: &mut R, from: Vec<Alphabet>, to: Vec<Alphabet>, zero_prob: f64) -> Result<CondKernel> {
    let rows: usize = from.iter().map(Alphabet::size).product();
    let cols: usize = to.iter().map(Alphabet::size).product();
    let flat: Vec<f64> = (0..rows).flat_map(|_| random_pmf(rng, cols, zero_prob)).collect();
    CondKernel::from_flat(from, to, &flat)
}

fn alpha(name: &str, n: usize) -> Alphabet {
    Alphabet::new(name, n).expect("sizes are positive")
}

/// A random broadcast channel; `zero_prob = 0` gives full support.
pub fn random_spec<R: Rng>(rng: &mut R, shape: Shape, zero_prob: f64, c0: f64, c_cf: f64) -> Result<RelayNetSpec> {
    let (x, y1, yr) = (alpha(X, shape.x), alpha(Y1, shape.y1), alpha(YR, shape.yr));
    let broadcast = random_kernel(rng, vec![x.clone()], vec![yr.clone(), y1.clone()], zero_prob)?;
    RelayNetSpec::new(x, y1, yr, broadcast, c0, c_cf)
}

pub fn random_ux<R: Rng>(rng: &mut R, shape: Shape, zero_prob: f64) -> Result<FiniteDist> {
    let pmf = random_pmf(rng, shape.u * shape.x, zero_prob);
    FiniteDist::new(vec![alpha(U, shape.u), alpha(X, shape.x)], pmf)
}

/// A random Markov-form bundle `p(u, x) p(v | u, y_r)`.
pub fn random_markov<R: Rng>(rng: &mut R, shape: Shape, zero_prob: f64) -> Result<CodingDist> {
    let ux = random_ux(rng, shape, zero_prob)?;
    let tc = random_kernel(
        rng,
        vec![alpha(U, shape.u), alpha(YR, shape.yr)],
        vec![alpha(V, shape.v)],
        zero_prob,
    )?;
    CodingDist::markov(ux, &tc, &alpha(Y1, shape.y1))
}

/// A random bundle with `v` depending on all of `(u, x, y_1, y_r)`.
pub fn random_general<R: Rng>(rng: &mut R, shape: Shape, zero_prob: f64) -> Result<CodingDist> {
    let ux = random_ux(rng, shape, zero_prob)?;
    let from = vec![
        alpha(U, shape.u),
        alpha(X, shape.x),
        alpha(Y1, shape.y1),
        alpha(YR, shape.yr),
    ];
    let k = random_kernel(rng, from, vec![alpha(V, shape.v)], zero_prob)?;
    CodingDist::new(ux, k, false)
}
