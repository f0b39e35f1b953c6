//! The two worked relay channels: the modulo-additive channel
//! `Y1 = X ⊕ Z`, `Yr = Z ⊕ W` and the pair of independent binary erasure
//! channels, with their reference computations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{binary_entropy, Alphabet, CondKernel, FiniteDist};
use crate::relaynet::{CodingDist, RelayNetSpec, U, V, X, Y1, YR};
use crate::tol::TOL_DEV;

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {x} must lie in [0, 1]")))
    }
}

fn check_c0(c0: f64) -> Result<()> {
    if c0.is_finite() && c0 >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "c0 = {c0} must be finite and non-negative"
        )))
    }
}

fn ber(p: f64, b: usize) -> f64 {
    if b == 1 {
        p
    } else {
        1.0 - p
    }
}

/// `Z ~ Ber(p)`, `W ~ Ber(delta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModAddParams {
    pub p: f64,
    pub delta: f64,
    pub c0: f64,
}

impl ModAddParams {
    pub fn new(p: f64, delta: f64, c0: f64) -> Result<Self> {
        check_unit("p", p)?;
        check_unit("delta", delta)?;
        check_c0(c0)?;
        Ok(Self { p, delta, c0 })
    }

    /// `P(Yr = 1) = p(1 - δ) + δ(1 - p)`.
    pub fn yr_crossover(&self) -> f64 {
        self.p * (1.0 - self.delta) + self.delta * (1.0 - self.p)
    }

    /// `H(Z | Yr)`.
    pub fn h_z_given_yr(&self) -> f64 {
        binary_entropy(self.p) + binary_entropy(self.delta) - binary_entropy(self.yr_crossover())
    }
}

pub fn make_modadd(params: &ModAddParams) -> Result<RelayNetSpec> {
    let &ModAddParams { p, delta, c0 } = params;
    RelayNetSpec::from_law(
        Alphabet::binary(X),
        Alphabet::binary(Y1),
        Alphabet::binary(YR),
        |x, yr, y1| {
            let mut s = 0.0;
            for z in 0..2 {
                for w in 0..2 {
                    if y1 == x ^ z && yr == z ^ w {
                        s += ber(p, z) * ber(delta, w);
                    }
                }
            }
            s
        },
        c0,
        0.0,
    )
}

/// `1 - H(Z | V)` and `I(Yr; V)` for a test channel given as rows
/// `p(· | yr = 0)` and `p(· | yr = 1)`.
fn modadd_objective(pz: [[f64; 2]; 2], k0: &[f64], k1: &[f64]) -> (f64, f64) {
    // pz[z][yr] = P(Z = z, Yr = yr)
    let mut h_zv = 0.0;
    let mut h_v = 0.0;
    let mut h_v_given_yr = 0.0;
    let pyr = [pz[0][0] + pz[1][0], pz[0][1] + pz[1][1]];
    for v in 0..k0.len() {
        let a = pz[0][0] * k0[v] + pz[0][1] * k1[v];
        let b = pz[1][0] * k0[v] + pz[1][1] * k1[v];
        for m in [a, b] {
            if m > 0.0 {
                h_zv -= m * m.log2();
            }
        }
        let s = a + b;
        if s > 0.0 {
            h_v -= s * s.log2();
        }
        for (row, w) in [(k0, pyr[0]), (k1, pyr[1])] {
            if row[v] > 0.0 {
                h_v_given_yr -= w * row[v] * row[v].log2();
            }
        }
    }
    (1.0 - (h_zv - h_v), (h_v - h_v_given_yr).max(0.0))
}

fn z_yr_table(params: &ModAddParams) -> [[f64; 2]; 2] {
    let mut t = [[0.0; 2]; 2];
    for z in 0..2 {
        for w in 0..2 {
            t[z][z ^ w] += ber(params.p, z) * ber(params.delta, w);
        }
    }
    t
}

/// Points of the probability simplex on `n` letters with denominator `res`.
pub fn simplex_grid(n: usize, res: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, res: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if n == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / res as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(n - 1, left - k, res, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, res, res, &mut Vec::new(), &mut out);
    out
}

/// Best value of `1 - H(Z|V)` over all pairs of grid rows meeting
/// `I(Yr;V) <= c0 + slack`, with the maximising rows.
pub fn modadd_grid_search(params: &ModAddParams, n_v: usize, res: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let pz = z_yr_table(params);
    let grid = simplex_grid(n_v, res);
    let mut best = (f64::NEG_INFINITY, grid[0].clone(), grid[0].clone());
    for k0 in &grid {
        for k1 in &grid {
            let (val, info) = modadd_objective(pz, k0, k1);
            if info <= params.c0 + CAPACITY_SLACK && val > best.0 {
                best = (val, k0.clone(), k1.clone());
            }
        }
    }
    best
}

/// Slack on the relay-link constraint `I(Yr;V) <= c0`.
const CAPACITY_SLACK: f64 = 1e-9;

/// Result of the Example-1 optimiser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModAddCapacity {
    /// Best `1 - H(Z|V)` found; a lower bound on the maximum.
    pub value: f64,
    /// `I(Yr;V)` at the optimiser.
    pub relay_rate: f64,
    /// The maximising test channel `p(v | y_r)`.
    pub kernel: CondKernel,
    /// `(grid resolution or refinement step, value)` after each stage.
    pub trace: Vec<(f64, f64)>,
}

/// Pulls both rows towards their average until `I(Yr;V) <= c0`.
fn project(pz: [[f64; 2]; 2], k0: &[f64], k1: &[f64], c0: f64) -> (Vec<f64>, Vec<f64>) {
    let mix = |t: f64| -> (Vec<f64>, Vec<f64>) {
        let mean: Vec<f64> = k0.iter().zip(k1).map(|(a, b)| 0.5 * (a + b)).collect();
        (
            k0.iter().zip(&mean).map(|(a, m)| t * a + (1.0 - t) * m).collect(),
            k1.iter().zip(&mean).map(|(b, m)| t * b + (1.0 - t) * m).collect(),
        )
    };
    if modadd_objective(pz, k0, k1).1 <= c0 {
        return (k0.to_vec(), k1.to_vec());
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (a, b) = mix(mid);
        if modadd_objective(pz, &a, &b).1 <= c0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mix(lo)
}

/// Moves mass `h` from letter `j` to letter `i` of a row, if possible.
fn shift(row: &[f64], i: usize, j: usize, h: f64) -> Option<Vec<f64>> {
    if i == j || row[j] < h {
        return None;
    }
    let mut r = row.to_vec();
    r[i] += h;
    r[j] -= h;
    if r[j] < 1e-15 {
        r[j] = 0.0;
    }
    Some(r)
}

/// Maximises `1 - H(Z|V)` over `p(v | y_r)` with `|V| = n_v` subject to
/// `I(Yr;V) <= c0`: a simplex grid of the given resolution, then a pattern
/// search with projection onto the constraint.
pub fn modadd_capacity(params: &ModAddParams, grid_resolution: usize, n_v: usize) -> Result<ModAddCapacity> {
    if grid_resolution < 2 || n_v < 1 {
        return Err(Error::InvalidParameter(
            "need grid_resolution >= 2 and at least one letter for V".into(),
        ));
    }
    let pz = z_yr_table(params);
    let (mut best, mut k0, mut k1) = modadd_grid_search(params, n_v, grid_resolution);
    let mut trace = vec![(grid_resolution as f64, best)];
    let mut h = 1.0 / grid_resolution as f64;
    let limit = params.c0 + CAPACITY_SLACK;
    while h > 1e-10 {
        let mut improved = false;
        for row in 0..2 {
            for i in 0..n_v {
                for j in 0..n_v {
                    let src = if row == 0 { &k0 } else { &k1 };
                    let Some(moved) = shift(src, i, j, h) else { continue };
                    let (a, b) = if row == 0 {
                        (moved, k1.clone())
                    } else {
                        (k0.clone(), moved)
                    };
                    let (a, b) = project(pz, &a, &b, params.c0);
                    let (val, info) = modadd_objective(pz, &a, &b);
                    if info <= limit && val > best + 1e-15 {
                        best = val;
                        k0 = a;
                        k1 = b;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            h *= 0.5;
            trace.push((h, best));
        }
    }
    let relay_rate = modadd_objective(pz, &k0, &k1).1;
    let v = Alphabet::new(V, n_v)?;
    let kernel = CondKernel::new(vec![Alphabet::binary(YR)], vec![v], vec![Some(k0), Some(k1)])?;
    Ok(ModAddCapacity {
        value: best,
        relay_rate,
        kernel,
        trace,
    })
}

/// `1 - H(Z|V)` and `I(Yr;V)` for any test channel `p(v | y_r)`.
pub fn modadd_value(params: &ModAddParams, kernel: &CondKernel) -> (f64, f64) {
    let k0 = kernel.row(0).expect("defined");
    let k1 = kernel.row(1).expect("defined");
    modadd_objective(z_yr_table(params), k0, k1)
}

/// Uniform `X`, trivial `U`, and the test channel `p(v | y_r)`.
pub fn modadd_coding_dist(kernel: &CondKernel) -> Result<CodingDist> {
    let ux = FiniteDist::uniform(vec![Alphabet::trivial(U), Alphabet::binary(X)])?;
    let tc = CondKernel::from_fn(
        vec![Alphabet::trivial(U), Alphabet::binary(YR)],
        kernel.to().to_vec(),
        |f, t| kernel.row(f[1]).expect("defined")[t[0]],
    )?;
    CodingDist::markov(ux, &tc, &Alphabet::binary(Y1))
}

/// Erasure probability `p` of both links, further erasure `q` at the relay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BecParams {
    pub p: f64,
    pub q: f64,
    pub c0: f64,
}

impl BecParams {
    pub fn new(p: f64, q: f64, c0: f64) -> Result<Self> {
        check_unit("p", p)?;
        check_unit("q", q)?;
        check_c0(c0)?;
        Ok(Self { p, q, c0 })
    }
}

/// Index of the erasure symbol in `{0, 1, e}`.
pub const ERASED: usize = 2;

fn ternary(name: &str) -> Alphabet {
    Alphabet::with_labels(name, ["0", "1", "e"]).expect("distinct labels")
}

fn bec(p: f64, x: usize, y: usize) -> f64 {
    if y == ERASED {
        p
    } else if y == x {
        1.0 - p
    } else {
        0.0
    }
}

/// Two independent BECs with erasure probability `p`.
pub fn make_bec_pair(p: f64, c0: f64) -> Result<RelayNetSpec> {
    check_unit("p", p)?;
    RelayNetSpec::from_law(
        Alphabet::binary(X),
        ternary(Y1),
        ternary(YR),
        |x, yr, y1| bec(p, x, y1) * bec(p, x, yr),
        c0,
        0.0,
    )
}

/// The relay test channel erasing each unerased bit with probability `q`.
pub fn bec_test_channel(q: f64) -> Result<CondKernel> {
    check_unit("q", q)?;
    CondKernel::from_fn(vec![Alphabet::trivial(U), ternary(YR)], vec![ternary(V)], |f, t| {
        let (yr, v) = (f[1], t[0]);
        match (yr == ERASED, v) {
            (true, v) => (v == ERASED) as u8 as f64,
            (false, v) if v == yr => 1.0 - q,
            (false, ERASED) => q,
            _ => 0.0,
        }
    })
}

/// Trivial `U`, uniform `X`, and [`bec_test_channel`].
pub fn bec_coding_dist(q: f64) -> Result<CodingDist> {
    let ux = FiniteDist::uniform(vec![Alphabet::trivial(U), Alphabet::binary(X)])?;
    CodingDist::markov(ux, &bec_test_channel(q)?, &ternary(Y1))
}

/// The closed-form pair of rate bounds for the BEC pair.
pub fn bec_bounds(p: f64, q: f64, c0: f64) -> (f64, f64) {
    let b1 = (1.0 - p) * (1.0 + p * (1.0 - q));
    let b2 = 1.0 - p - binary_entropy((1.0 - p) * (1.0 - q)) + (1.0 - p) * binary_entropy(q) + c0;
    (b1, b2)
}

pub fn bec_rate(p: f64, q: f64, c0: f64) -> f64 {
    let (b1, b2) = bec_bounds(p, q, c0);
    b1.min(b2)
}

/// Maximises [`bec_rate`] over `q ∈ [0, 1]`: a scan, golden-section
/// refinement around the best scan point, and both endpoints.
pub fn bec_best_q(p: f64, c0: f64) -> (f64, f64) {
    let f = |q: f64| bec_rate(p, q, c0);
    let n = 400;
    let mut best = (0.0, f(0.0));
    for i in 1..=n {
        let q = i as f64 / n as f64;
        let r = f(q);
        if r > best.1 {
            best = (q, r);
        }
    }
    let (mut a, mut b) = ((best.0 - 1.0 / n as f64).max(0.0), (best.0 + 1.0 / n as f64).min(1.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-12 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    for q in [0.5 * (a + b), 0.0, 1.0] {
        let r = f(q);
        if r > best.1 {
            best = (q, r);
        }
    }
    best
}

/// Outcome of the two-branch ratio test for the BEC pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BecLambdaReport {
    pub feasible: bool,
    /// A `λ` matching every branch, when one exists.
    pub lambda: Option<f64>,
    /// Left-hand log-ratio `log2 P(V=x|x) / P(V=e|x)`; absent when either
    /// side vanishes.
    pub lhs: Option<f64>,
    /// Branches `y_1 = x` and `y_1 = e` that occur with positive probability.
    pub branches: Vec<String>,
    /// Largest branch residual at the returned `λ` (or the best grid `λ`).
    pub max_residual: f64,
}

/// Searches for `λ` equating, in log form,
/// `P(V=x|x)/P(V=e|x)` with `((1-q)/q)^(1-λ) (P(V=x|y1)/P(V=e|y1))^λ` on
/// both the `y_1 = x` and the `y_1 = e` branch.
pub fn bec_lambda_infeasibility(p: f64, q: f64, grid: usize) -> Result<BecLambdaReport> {
    check_unit("p", p)?;
    check_unit("q", q)?;
    let kept = (1.0 - p) * (1.0 - q);
    // the ratio test only constrains λ when V = x and V = e are both possible
    // given an unerased relay output
    if q == 0.0 || q == 1.0 || p == 1.0 {
        return Ok(BecLambdaReport {
            feasible: true,
            lambda: Some(0.0),
            lhs: None,
            branches: Vec::new(),
            max_residual: 0.0,
        });
    }
    let lhs = (kept / (1.0 - kept)).log2();
    let base = ((1.0 - q) / q).log2();
    let mut branches = Vec::new();
    let mut slopes = Vec::new();
    if p < 1.0 {
        branches.push("y1=x".to_string());
        slopes.push((kept / (1.0 - kept)).log2());
    }
    if p > 0.0 {
        branches.push("y1=e".to_string());
        slopes.push((0.5 * kept / (1.0 - kept)).log2());
    }
    // residual of branch b: base + λ (slope_b - base) - lhs
    let residual = |l: f64| {
        slopes
            .iter()
            .map(|s| (base + l * (s - base) - lhs).abs())
            .fold(0.0, f64::max)
    };
    let mut candidates: Vec<f64> = slopes
        .iter()
        .filter(|s| (*s - base).abs() > 1e-12)
        .map(|s| (lhs - base) / (s - base))
        .filter(|l| (-1e-9..=1.0 + 1e-9).contains(l))
        .map(|l| l.clamp(0.0, 1.0))
        .collect();
    let g = grid.max(2);
    candidates.extend((0..g).map(|i| i as f64 / (g - 1) as f64));
    let hit = candidates.iter().copied().find(|&l| residual(l) <= TOL_DEV);
    let max_residual = match hit {
        Some(l) => residual(l),
        None => candidates.iter().map(|&l| residual(l)).fold(f64::INFINITY, f64::min),
    };
    Ok(BecLambdaReport {
        feasible: hit.is_some(),
        lambda: hit,
        lhs: Some(lhs),
        branches,
        max_residual,
    })
}
