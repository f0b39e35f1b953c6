use crate::error::{Error, Result};
use crate::prob::FiniteDist;
use crate::relaynet::{build_joint, CodingDist, RelayNetSpec, JOINT_ORDER};
use crate::tol::TOL_SUPP;

/// Largest accepted gap between `p(v | u, x, y_1, y_r)` and `p(v | u, y_r)`
/// when checking that a joint has the Markov form.
const MARKOV_SLACK: f64 = 1e-9;

/// One conditioning tuple `(u, x, y_1, y_r)` with its flat index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tuple {
    pub u: usize,
    pub x: usize,
    pub y1: usize,
    pub yr: usize,
    pub t: usize,
}

/// Conditionals of a Markov-form joint `p(u, x, y_1, y_r) p(v | u, y_r)`
/// that the perturbation formulas need.
#[derive(Debug, Clone)]
pub struct SlopeContext {
    joint: FiniteDist,
    dims: [usize; 5],
    p_t: Vec<f64>,
    p_uyr: Vec<f64>,
    v_uyr: Vec<f64>,
    v_uxy1: Vec<f64>,
    v_uy1: Vec<f64>,
    supp: f64,
}

impl SlopeContext {
    /// Wraps a joint over `(u, x, y1, yr, v)` after checking the Markov form.
    pub fn new(joint: FiniteDist) -> Result<Self> {
        Self::with_support_threshold(joint, TOL_SUPP)
    }

    /// As [`SlopeContext::new`], treating probabilities `<= supp` as zero.
    pub fn with_support_threshold(joint: FiniteDist, supp: f64) -> Result<Self> {
        if joint.names() != JOINT_ORDER {
            return Err(Error::AlphabetMismatch {
                name: "joint".into(),
                detail: format!("expected variables {JOINT_ORDER:?}, found {:?}", joint.names()),
            });
        }
        let s = joint.sizes();
        let dims = [s[0], s[1], s[2], s[3], s[4]];
        let [nu, nx, ny1, nyr, nv] = dims;
        let nt = nu * nx * ny1 * nyr;
        let pmf = joint.pmf();

        let mut p_t = vec![0.0; nt];
        let mut p_uyr = vec![0.0; nu * nyr];
        let mut p_uxy1 = vec![0.0; nu * nx * ny1];
        let mut p_uy1 = vec![0.0; nu * ny1];
        let mut j_uyr = vec![0.0; nu * nyr * nv];
        let mut j_uxy1 = vec![0.0; nu * nx * ny1 * nv];
        let mut j_uy1 = vec![0.0; nu * ny1 * nv];
        let mut ctx = Self {
            joint: joint.clone(),
            dims,
            p_t: Vec::new(),
            p_uyr: Vec::new(),
            v_uyr: Vec::new(),
            v_uxy1: Vec::new(),
            v_uy1: Vec::new(),
            supp,
        };
        for tp in ctx.tuples() {
            for v in 0..nv {
                let p = pmf[tp.t * nv + v];
                p_t[tp.t] += p;
                p_uyr[ctx.uyr(&tp)] += p;
                p_uxy1[ctx.uxy1(&tp)] += p;
                p_uy1[ctx.uy1(&tp)] += p;
                j_uyr[ctx.uyr(&tp) * nv + v] += p;
                j_uxy1[ctx.uxy1(&tp) * nv + v] += p;
                j_uy1[ctx.uy1(&tp) * nv + v] += p;
            }
        }
        let normalize = |j: &mut Vec<f64>, m: &[f64]| {
            for (i, &mass) in m.iter().enumerate() {
                for v in 0..nv {
                    j[i * nv + v] = if mass > supp { j[i * nv + v] / mass } else { 0.0 };
                }
            }
        };
        normalize(&mut j_uyr, &p_uyr);
        normalize(&mut j_uxy1, &p_uxy1);
        normalize(&mut j_uy1, &p_uy1);

        for tp in ctx.tuples() {
            if p_t[tp.t] <= supp {
                continue;
            }
            for v in 0..nv {
                let cond = pmf[tp.t * nv + v] / p_t[tp.t];
                let test = j_uyr[ctx.uyr(&tp) * nv + v];
                if (cond - test).abs() > MARKOV_SLACK {
                    return Err(Error::NotMarkov(format!(
                        "p(v={v}|u={},x={},y1={},yr={}) = {cond} but p(v|u,yr) = {test}",
                        tp.u, tp.x, tp.y1, tp.yr
                    )));
                }
            }
        }
        ctx.p_t = p_t;
        ctx.p_uyr = p_uyr;
        ctx.v_uyr = j_uyr;
        ctx.v_uxy1 = j_uxy1;
        ctx.v_uy1 = j_uy1;
        Ok(ctx)
    }

    /// Builds the joint of a Markov-form bundle and wraps it.
    pub fn from_coding(spec: &RelayNetSpec, cd: &CodingDist) -> Result<Self> {
        Self::from_coding_with(spec, cd, TOL_SUPP)
    }

    pub fn from_coding_with(spec: &RelayNetSpec, cd: &CodingDist, supp: f64) -> Result<Self> {
        if !cd.markov_form() {
            return Err(Error::NotMarkov(
                "the base coding distribution must have the form p(v | u, y_r)".into(),
            ));
        }
        Self::with_support_threshold(build_joint(spec, cd)?, supp)
    }

    pub fn support_threshold(&self) -> f64 {
        self.supp
    }

    pub fn joint(&self) -> &FiniteDist {
        &self.joint
    }

    /// `[|U|, |X|, |Y1|, |Yr|, |V|]`.
    pub fn dims(&self) -> [usize; 5] {
        self.dims
    }

    pub fn n_tuples(&self) -> usize {
        self.p_t.len()
    }

    pub fn n_v(&self) -> usize {
        self.dims[4]
    }

    pub fn tuples(&self) -> impl Iterator<Item = Tuple> + '_ {
        let [nu, nx, ny1, nyr, _] = self.dims;
        (0..nu * nx * ny1 * nyr).map(move |t| Tuple {
            u: t / (nx * ny1 * nyr),
            x: (t / (ny1 * nyr)) % nx,
            y1: (t / nyr) % ny1,
            yr: t % nyr,
            t,
        })
    }

    pub(crate) fn uyr(&self, tp: &Tuple) -> usize {
        tp.u * self.dims[3] + tp.yr
    }

    fn uxy1(&self, tp: &Tuple) -> usize {
        (tp.u * self.dims[1] + tp.x) * self.dims[2] + tp.y1
    }

    fn uy1(&self, tp: &Tuple) -> usize {
        tp.u * self.dims[2] + tp.y1
    }

    /// `p(u, x, y_1, y_r)`.
    pub fn p_tuple(&self, tp: &Tuple) -> f64 {
        self.p_t[tp.t]
    }

    /// `p(u, y_r)` by flat `(u, y_r)` index.
    pub(crate) fn p_uyr_at(&self, uyr: usize) -> f64 {
        self.p_uyr[uyr]
    }

    /// `p(v | u, y_r)`; zero on rows of zero mass.
    pub fn v_given_uyr(&self, tp: &Tuple, v: usize) -> f64 {
        self.v_uyr[self.uyr(tp) * self.dims[4] + v]
    }

    pub fn v_given_uxy1(&self, tp: &Tuple, v: usize) -> f64 {
        self.v_uxy1[self.uxy1(tp) * self.dims[4] + v]
    }

    pub fn v_given_uy1(&self, tp: &Tuple, v: usize) -> f64 {
        self.v_uy1[self.uy1(tp) * self.dims[4] + v]
    }

    /// Whether `(tuple, v)` is a coordinate the perturbation may move.
    pub fn is_free(&self, tp: &Tuple, v: usize) -> bool {
        self.p_t[tp.t] > self.supp && self.v_given_uyr(tp, v) > self.supp
    }

    /// Letters `v` in the support of `p(· | u, y_r)`.
    pub fn support(&self, tp: &Tuple) -> Vec<usize> {
        (0..self.dims[4])
            .filter(|&v| self.v_given_uyr(tp, v) > self.supp)
            .collect()
    }
}
