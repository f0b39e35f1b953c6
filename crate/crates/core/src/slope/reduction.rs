use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::context::SlopeContext;
use super::direction::{check_lambda_with, LambdaWitness};
use crate::error::{Error, Result};
use crate::prob::{mutual_information, Alphabet, CondKernel};
use crate::relaynet::{build_joint, CodingDist, RelayNetSpec, U, V, X, Y1, YR};
use crate::tol::Tolerances;

/// Replacement of the compression output by the connected component of
/// its support graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    /// `w_map[u][y_r]`: component of the support of `p(· | u, y_r)`.
    pub w_map: Vec<Vec<usize>>,
    /// Number of components found for each `u`.
    pub components: Vec<usize>,
    pub i_x_y1v: f64,
    pub i_x_y1w: f64,
    /// `I(Yr;V|U,X,Y1)`, the compression penalty with `V`.
    pub penalty_v: f64,
    /// `I(Yr;W|U,X,Y1)`.
    pub penalty_w: f64,
    /// `|I(X;Y1,V|U) - I(X;Y1,W|U)|`.
    pub rate_residual: f64,
    /// `I(Yr;V|U,X,Y1) - I(Yr;W|U,X,Y1)`; non-negative up to round-off.
    pub penalty_gap: f64,
}

fn require_full_support(spec: &RelayNetSpec) -> Result<()> {
    if spec.has_full_support() {
        Ok(())
    } else {
        Err(Error::Precondition(
            "the broadcast channel needs p(y1, yr | x) > 0 for all letters".into(),
        ))
    }
}

/// Builds, for each `u`, the graph on `V` joining letters that share a
/// `y_r` in their support, and maps `(u, y_r)` to the component of the
/// support of `p(· | u, y_r)`.
pub fn deterministic_reduction(spec: &RelayNetSpec, cd: &CodingDist) -> Result<Reduction> {
    require_full_support(spec)?;
    let tc = cd
        .test_channel()
        .ok_or_else(|| Error::NotMarkov("the reduction needs a test channel p(v | u, y_r)".into()))?;
    let [nu, _, _, nyr, nv] = cd.dims();
    let supp = crate::tol::TOL_SUPP;
    let mut w_map = vec![vec![0; nyr]; nu];
    let mut components = vec![0; nu];
    for u in 0..nu {
        let mut uf = UnionFind::<usize>::new(nv);
        let supports: Vec<Vec<usize>> = (0..nyr)
            .map(|yr| {
                let row = tc.row(tc.row_index(&[u, yr])).expect("test channel rows are defined");
                (0..nv).filter(|&v| row[v] > supp).collect()
            })
            .collect();
        for s in &supports {
            for w in s.windows(2) {
                uf.union(w[0], w[1]);
            }
        }
        // number components by first appearance along y_r
        let mut labels: Vec<Option<usize>> = vec![None; nv];
        for (yr, s) in supports.iter().enumerate() {
            let root = uf.find(s[0]);
            let next = components[u];
            let id = *labels[root].get_or_insert(next);
            if id == next {
                components[u] += 1;
            }
            w_map[u][yr] = id;
        }
    }

    let nw = components.iter().copied().max().unwrap_or(1).max(1);
    let w_alpha = Alphabet::new(V, nw)?;
    let u_alpha = cd.u_alphabet().clone();
    let yr_alpha = tc.from()[1].clone();
    let wk = CondKernel::from_fn(vec![u_alpha, yr_alpha], vec![w_alpha], |f, t| {
        if w_map[f[0]][f[1]] == t[0] {
            1.0
        } else {
            0.0
        }
    })?;
    let cw = CodingDist::markov(cd.ux().clone(), &wk, spec.y1_alphabet())?;
    let jv = build_joint(spec, cd)?;
    let jw = build_joint(spec, &cw)?;
    let i_x_y1v = mutual_information(&jv, &[X], &[Y1, V], &[U])?;
    let i_x_y1w = mutual_information(&jw, &[X], &[Y1, V], &[U])?;
    let penalty_v = mutual_information(&jv, &[YR], &[V], &[U, X, Y1])?;
    let penalty_w = mutual_information(&jw, &[YR], &[V], &[U, X, Y1])?;
    Ok(Reduction {
        w_map,
        components,
        i_x_y1v,
        i_x_y1w,
        penalty_v,
        penalty_w,
        rate_residual: (i_x_y1v - i_x_y1w).abs(),
        penalty_gap: penalty_v - penalty_w,
    })
}

/// The two alternatives for a full-support channel: either the alignment
/// condition fails and cooperation has infinite slope, or the test channel
/// can be replaced by a deterministic function of `(u, y_r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CorollaryVerdict {
    DeterministicReplacement {
        lambda: LambdaWitness,
        g: Vec<Vec<usize>>,
        reduction: Reduction,
    },
    InfiniteSlope,
}

pub fn corollary_verdict(spec: &RelayNetSpec, cd: &CodingDist, tol: &Tolerances) -> Result<CorollaryVerdict> {
    require_full_support(spec)?;
    let ctx = SlopeContext::from_coding_with(spec, cd, tol.supp)?;
    match check_lambda_with(&ctx, tol.lambda_grid, tol.dev) {
        None => Ok(CorollaryVerdict::InfiniteSlope),
        Some(lambda) => {
            let reduction = deterministic_reduction(spec, cd)?;
            Ok(CorollaryVerdict::DeterministicReplacement {
                lambda,
                g: reduction.w_map.clone(),
                reduction,
            })
        }
    }
}
