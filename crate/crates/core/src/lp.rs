//! Dense two-phase primal simplex for small linear programs.
//!
//! Problems have the form: maximize `c·x` subject to linear rows with `≤`,
//! `≥` or `=` relations and `x ≥ 0`. The tableau is dense; the solver is
//! meant for the few-hundred-variable programs produced by the direction
//! search, not for general use.

use thiserror::Error;

const PIVOT_EPS: f64 = 1e-10;
const COST_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 50;
const MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("infeasible (phase-one residual {0:e})")]
    Infeasible(f64),
    #[error("unbounded objective")]
    Unbounded,
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    objective: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LinearProgram {
    /// A program maximizing `objective · x` over `x ≥ 0`.
    pub fn maximize(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.n_vars(), "constraint width");
        self.rows.push(Row { coeffs, relation, rhs });
    }

    /// Adds a row given as `(variable, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) {
        let mut coeffs = vec![0.0; self.n_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add_constraint(coeffs, relation, rhs);
    }

    pub fn upper_bound(&mut self, var: usize, bound: f64) {
        self.add_sparse(&[(var, 1.0)], Relation::Le, bound);
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        Tableau::build(self).solve(self)
    }
}

struct Tableau {
    /// Each row holds `width` coefficients followed by the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
    n_real: usize,
    artificial_from: usize,
    iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.n_vars();
        let m = lp.rows.len();
        let n_slack = lp.rows.iter().filter(|r| r.relation != Relation::Eq).count();
        // rows are sign-normalized first so every rhs is non-negative
        let normalized: Vec<(Vec<f64>, Relation, f64)> = lp
            .rows
            .iter()
            .map(|r| {
                if r.rhs < 0.0 {
                    let flipped = match r.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (r.coeffs.iter().map(|a| -a).collect(), flipped, -r.rhs)
                } else {
                    (r.coeffs.clone(), r.relation, r.rhs)
                }
            })
            .collect();
        let n_art = normalized.iter().filter(|r| r.1 != Relation::Le).count();
        let width = n + n_slack + n_art;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut slack, mut art) = (n, n + n_slack);
        for (coeffs, relation, rhs) in normalized {
            let mut row = vec![0.0; width + 1];
            row[..n].copy_from_slice(&coeffs);
            row[width] = rhs;
            match relation {
                Relation::Le => {
                    row[slack] = 1.0;
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = 1.0;
                    basis.push(art);
                    art += 1;
                }
            }
            rows.push(row);
        }
        Self {
            rows,
            basis,
            width,
            n_real: n,
            artificial_from: n + n_slack,
            iterations: 0,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut rc = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (r, a) in rc.iter_mut().zip(row) {
                    *r -= cb * a;
                }
            }
        }
        rc
    }

    fn value(&self, cost: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.basis)
            .map(|(row, &b)| cost[b] * row[self.width])
            .sum()
    }

    /// Primal simplex on `cost` until no admissible column improves.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<(), LpError> {
        let mut degenerate = 0;
        loop {
            if self.iterations >= MAX_ITERATIONS {
                return Err(LpError::IterationLimit(MAX_ITERATIONS));
            }
            let rc = self.reduced_costs(cost);
            let bland = degenerate > DEGENERATE_STREAK;
            let mut entering = None;
            let mut best = COST_EPS;
            for (j, &r) in rc[..allowed].iter().enumerate() {
                if r > best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = r;
                }
            }
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > PIVOT_EPS {
                    let ratio = row[self.width] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best_ratio)) => {
                            let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                            if (tie && self.basis[i] < self.basis[k]) || (!tie && ratio < best_ratio) {
                                Some((i, ratio))
                            } else {
                                Some((k, best_ratio))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            degenerate = if ratio.abs() < 1e-14 { degenerate + 1 } else { 0 };
            self.pivot(r, c);
        }
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        if self.artificial_from < self.width {
            let mut phase_one = vec![0.0; self.width];
            for c in phase_one[self.artificial_from..].iter_mut() {
                *c = -1.0;
            }
            self.optimize(&phase_one, self.width)?;
            let residual = -self.value(&phase_one);
            let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
            if residual > FEAS_EPS * scale {
                return Err(LpError::Infeasible(residual));
            }
            self.expel_artificials();
        }
        let mut cost = vec![0.0; self.width];
        cost[..self.n_real].copy_from_slice(&lp.objective);
        self.optimize(&cost, self.artificial_from)?;

        let mut x = vec![0.0; self.n_real];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < self.n_real {
                x[b] = row[self.width].max(0.0);
            }
        }
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        log::trace!(
            "simplex: {} rows, {} columns, {} pivots",
            self.rows.len(),
            self.width,
            self.iterations
        );
        Ok(LpSolution {
            x,
            objective,
            iterations: self.iterations,
        })
    }

    /// Pivots zero-valued artificials out of the basis; rows where that is
    /// impossible are linearly dependent and get dropped.
    fn expel_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.artificial_from {
                let col = (0..self.artificial_from)
                    .filter(|&j| self.rows[i][j].abs() > PIVOT_EPS)
                    .max_by(|&a, &b| self.rows[i][a].abs().total_cmp(&self.rows[i][b].abs()));
                match col {
                    Some(c) => self.pivot(i, c),
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.upper_bound(0, 4.0);
        lp.add_constraint(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.add_constraint(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows_need_phase_one() {
        // max x - y, x + y = 1, x >= 0.25, y >= 0.5
        let mut lp = LinearProgram::maximize(vec![1.0, -1.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add_constraint(vec![1.0, 0.0], Relation::Ge, 0.25);
        lp.add_constraint(vec![0.0, 1.0], Relation::Ge, 0.5);
        let s = lp.solve().unwrap();
        assert!((s.objective - 0.0).abs() < 1e-9);
        assert!((s.x[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // max -x, -x <= -2 (x >= 2)
        let mut lp = LinearProgram::maximize(vec![-1.0]);
        lp.add_constraint(vec![-1.0], Relation::Le, -2.0);
        let s = lp.solve().unwrap();
        assert!((s.x[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 1.0);
        lp.add_constraint(vec![1.0], Relation::Ge, 2.0);
        assert!(matches!(lp.solve(), Err(LpError::Infeasible(_))));

        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.add_constraint(vec![0.0, 1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    /// Brute force over all vertices of a bounded 2-D polytope.
    fn vertex_oracle(c: [f64; 2], rows: &[([f64; 2], f64)]) -> Option<f64> {
        let mut lines: Vec<([f64; 2], f64)> = rows.to_vec();
        lines.push(([1.0, 0.0], 0.0));
        lines.push(([0.0, 1.0], 0.0));
        let feasible = |p: [f64; 2]| {
            p[0] >= -1e-9 && p[1] >= -1e-9 && rows.iter().all(|(a, b)| a[0] * p[0] + a[1] * p[1] <= b + 1e-9)
        };
        let mut best: Option<f64> = None;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a, b) = (lines[i], lines[j]);
                let det = a.0[0] * b.0[1] - a.0[1] * b.0[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let p = [(a.1 * b.0[1] - a.0[1] * b.1) / det, (a.0[0] * b.1 - a.1 * b.0[0]) / det];
                if feasible(p) {
                    let v = c[0] * p[0] + c[1] * p[1];
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
            }
        }
        best
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn matches_vertex_enumeration(
            c in prop::array::uniform2(-2.0f64..2.0),
            rows in prop::collection::vec((prop::array::uniform2(-1.0f64..1.0), -0.5f64..2.0), 1..5),
        ) {
            // box keeps the polytope bounded
            let mut all: Vec<([f64; 2], f64)> = rows.clone();
            all.push(([1.0, 0.0], 3.0));
            all.push(([0.0, 1.0], 3.0));
            let mut lp = LinearProgram::maximize(c.to_vec());
            for (a, b) in &all {
                lp.add_constraint(a.to_vec(), Relation::Le, *b);
            }
            match (lp.solve(), vertex_oracle(c, &all)) {
                (Ok(s), Some(v)) => prop_assert!((s.objective - v).abs() < 1e-7, "{} vs {}", s.objective, v),
                (Err(LpError::Infeasible(_)), None) => {}
                (got, want) => prop_assert!(false, "solver {:?} oracle {:?}", got, want),
            }
        }
    }
}
