use serde::{Deserialize, Serialize};

use super::{advance, strides, Alphabet, CondKernel};
use crate::error::{Error, Result};
use crate::tol::{TOL_NORM, TOL_SUPP};

/// A joint pmf over an ordered list of named finite variables.
///
/// The pmf is stored densely in row-major order over `variables`; the
/// variable order is part of the value and is only changed by an explicit
/// [`FiniteDist::permute`] or by the order requested in
/// [`FiniteDist::marginalize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDist")]
pub struct FiniteDist {
    variables: Vec<Alphabet>,
    pmf: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDist {
    variables: Vec<Alphabet>,
    pmf: Vec<f64>,
}

impl TryFrom<RawDist> for FiniteDist {
    type Error = Error;

    fn try_from(raw: RawDist) -> Result<Self> {
        FiniteDist::new(raw.variables, raw.pmf)
    }
}

pub(crate) fn check_unique(variables: &[Alphabet]) -> Result<()> {
    for (i, a) in variables.iter().enumerate() {
        if variables[..i].iter().any(|b| b.name() == a.name()) {
            return Err(Error::DuplicateVariable(a.name().to_string()));
        }
    }
    Ok(())
}

pub(crate) fn check_entries(values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() || !(0.0..=1.0 + TOL_NORM).contains(&value) {
            return Err(Error::InvalidEntry { index, value });
        }
    }
    Ok(())
}

impl FiniteDist {
    /// Validates shape, entry range and normalization.
    pub fn new(variables: Vec<Alphabet>, pmf: Vec<f64>) -> Result<Self> {
        check_unique(&variables)?;
        let expected: usize = variables.iter().map(Alphabet::size).product();
        if pmf.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: pmf.len(),
            });
        }
        check_entries(&pmf)?;
        let sum: f64 = pmf.iter().sum();
        if (sum - 1.0).abs() > TOL_NORM {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { variables, pmf })
    }

    /// Builds a pmf by evaluating `f` at every multi-index.
    pub fn from_fn(variables: Vec<Alphabet>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let sizes: Vec<usize> = variables.iter().map(Alphabet::size).collect();
        let total: usize = sizes.iter().product();
        let mut pmf = Vec::with_capacity(total);
        let mut idx = vec![0; sizes.len()];
        loop {
            pmf.push(f(&idx));
            if !advance(&mut idx, &sizes) {
                break;
            }
        }
        Self::new(variables, pmf)
    }

    pub fn uniform(variables: Vec<Alphabet>) -> Result<Self> {
        let total: usize = variables.iter().map(Alphabet::size).product();
        Self::new(variables, vec![1.0 / total as f64; total])
    }

    /// All mass on the multi-index `at`.
    pub fn point(variables: Vec<Alphabet>, at: &[usize]) -> Result<Self> {
        Self::from_fn(variables, |idx| if idx == at { 1.0 } else { 0.0 })
    }

    pub fn variables(&self) -> &[Alphabet] {
        &self.variables
    }

    pub fn names(&self) -> Vec<&str> {
        self.variables.iter().map(Alphabet::name).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.variables.iter().map(Alphabet::size).collect()
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|a| a.name() == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn alphabet(&self, name: &str) -> Result<&Alphabet> {
        Ok(&self.variables[self.position(name)?])
    }

    /// Positions of `names`, rejecting unknown or repeated names.
    pub fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::DuplicateVariable(n.to_string()));
            }
            out.push(self.position(n)?);
        }
        Ok(out)
    }

    /// Probability of one multi-index.
    pub fn prob(&self, index: &[usize]) -> f64 {
        let s = strides(&self.sizes());
        self.pmf[index.iter().zip(&s).map(|(i, s)| i * s).sum::<usize>()]
    }

    /// Number of entries strictly above the support threshold.
    pub fn support_size(&self) -> usize {
        self.pmf.iter().filter(|&&p| p > TOL_SUPP).count()
    }

    /// Dense marginal over the variables at `positions`, in that order.
    pub(crate) fn marginal_array(&self, positions: &[usize]) -> Vec<f64> {
        let sizes = self.sizes();
        let out_sizes: Vec<usize> = positions.iter().map(|&p| sizes[p]).collect();
        let out_strides = strides(&out_sizes);
        let mut out = vec![0.0; out_sizes.iter().product()];
        let mut idx = vec![0; sizes.len()];
        for &p in &self.pmf {
            let o: usize = positions.iter().zip(&out_strides).map(|(&pos, s)| idx[pos] * s).sum();
            out[o] += p;
            advance(&mut idx, &sizes);
        }
        out
    }

    /// Marginal on `keep`, with variables in the order given.
    pub fn marginalize(&self, keep: &[&str]) -> Result<FiniteDist> {
        let positions = self.positions(keep)?;
        let pmf = self.marginal_array(&positions);
        let variables = positions.iter().map(|&p| self.variables[p].clone()).collect();
        Ok(FiniteDist { variables, pmf })
    }

    /// Reorders the variables; `order` must name every variable exactly once.
    pub fn permute(&self, order: &[&str]) -> Result<FiniteDist> {
        if order.len() != self.variables.len() {
            return Err(Error::LengthMismatch {
                expected: self.variables.len(),
                found: order.len(),
            });
        }
        self.marginalize(order)
    }

    /// The conditional kernel `p(rest | given)`, where `rest` lists the
    /// remaining variables in their current order. Rows whose conditioning
    /// configuration has probability at most the support threshold are left
    /// undefined.
    pub fn condition(&self, given: &[&str]) -> Result<CondKernel> {
        let given_pos = self.positions(given)?;
        let rest_pos: Vec<usize> = (0..self.variables.len()).filter(|p| !given_pos.contains(p)).collect();
        let sizes = self.sizes();
        let g_sizes: Vec<usize> = given_pos.iter().map(|&p| sizes[p]).collect();
        let r_sizes: Vec<usize> = rest_pos.iter().map(|&p| sizes[p]).collect();
        let (g_strides, r_strides) = (strides(&g_sizes), strides(&r_sizes));
        let n_rows: usize = g_sizes.iter().product();
        let row_len: usize = r_sizes.iter().product();

        let marginal = self.marginal_array(&given_pos);
        let mut data = vec![0.0; n_rows * row_len];
        let mut idx = vec![0; sizes.len()];
        for &p in &self.pmf {
            let g: usize = given_pos.iter().zip(&g_strides).map(|(&q, s)| idx[q] * s).sum();
            let r: usize = rest_pos.iter().zip(&r_strides).map(|(&q, s)| idx[q] * s).sum();
            if marginal[g] > TOL_SUPP {
                data[g * row_len + r] = p / marginal[g];
            }
            advance(&mut idx, &sizes);
        }
        let defined = marginal.iter().map(|&m| m > TOL_SUPP).collect();
        let from = given_pos.iter().map(|&p| self.variables[p].clone()).collect();
        let to = rest_pos.iter().map(|&p| self.variables[p].clone()).collect();
        Ok(CondKernel::from_parts(from, to, data, defined))
    }

    /// Attaches `k.to` to this joint: the result is `d(a) k(b | a_from)` over
    /// `self.variables ++ k.to`.
    pub fn compose(&self, k: &CondKernel) -> Result<FiniteDist> {
        let mut from_pos = Vec::with_capacity(k.from().len());
        for a in k.from() {
            let pos = self.position(a.name())?;
            if !self.variables[pos].compatible(a) {
                return Err(Error::AlphabetMismatch {
                    name: a.name().to_string(),
                    detail: format!(
                        "joint has size {}, kernel expects {}",
                        self.variables[pos].size(),
                        a.size()
                    ),
                });
            }
            from_pos.push(pos);
        }
        for a in k.to() {
            if self.position(a.name()).is_ok() {
                return Err(Error::DuplicateVariable(a.name().to_string()));
            }
        }
        let sizes = self.sizes();
        let f_strides = strides(&k.from().iter().map(Alphabet::size).collect::<Vec<_>>());
        let row_len = k.row_len();
        let mut pmf = Vec::with_capacity(self.pmf.len() * row_len);
        let mut idx = vec![0; sizes.len()];
        for &p in &self.pmf {
            let row: usize = from_pos.iter().zip(&f_strides).map(|(&q, s)| idx[q] * s).sum();
            match k.row(row) {
                Some(values) => pmf.extend(values.iter().map(|v| p * v)),
                None if p <= TOL_SUPP => pmf.extend(std::iter::repeat_n(0.0, row_len)),
                None => return Err(Error::UndefinedRow { row, mass: p }),
            }
            advance(&mut idx, &sizes);
        }
        let mut variables = self.variables.clone();
        variables.extend(k.to().iter().cloned());
        FiniteDist::new(variables, pmf)
    }
}
