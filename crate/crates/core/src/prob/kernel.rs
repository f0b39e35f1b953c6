use serde::{Deserialize, Serialize};

use super::dist::{check_entries, check_unique};
use super::{advance, strides, Alphabet};
use crate::error::{Error, Result};
use crate::tol::TOL_NORM;

/// A conditional pmf `p(to | from)`: one row per joint index of `from`.
///
/// Rows may be undefined, which marks a conditioning configuration of zero
/// probability. Undefined rows serialize as `null`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondKernel {
    from: Vec<Alphabet>,
    to: Vec<Alphabet>,
    data: Vec<f64>,
    defined: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct RawKernel {
    from: Vec<Alphabet>,
    to: Vec<Alphabet>,
    rows: Vec<Option<Vec<f64>>>,
}

impl Serialize for CondKernel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawKernel {
            from: self.from.clone(),
            to: self.to.clone(),
            rows: (0..self.n_rows()).map(|i| self.row(i).map(<[f64]>::to_vec)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CondKernel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawKernel::deserialize(d)?;
        CondKernel::new(raw.from, raw.to, raw.rows).map_err(serde::de::Error::custom)
    }
}

impl CondKernel {
    /// Validates that every defined row is a pmf over `to`.
    pub fn new(from: Vec<Alphabet>, to: Vec<Alphabet>, rows: Vec<Option<Vec<f64>>>) -> Result<Self> {
        let mut all = from.clone();
        all.extend(to.iter().cloned());
        check_unique(&all)?;
        let n_rows: usize = from.iter().map(Alphabet::size).product();
        let row_len: usize = to.iter().map(Alphabet::size).product();
        if rows.len() != n_rows {
            return Err(Error::LengthMismatch {
                expected: n_rows,
                found: rows.len(),
            });
        }
        let mut data = Vec::with_capacity(n_rows * row_len);
        let mut defined = Vec::with_capacity(n_rows);
        for row in rows {
            match row {
                Some(values) => {
                    if values.len() != row_len {
                        return Err(Error::LengthMismatch {
                            expected: row_len,
                            found: values.len(),
                        });
                    }
                    check_entries(&values)?;
                    let sum: f64 = values.iter().sum();
                    if (sum - 1.0).abs() > TOL_NORM {
                        return Err(Error::NotNormalized { sum });
                    }
                    data.extend(values);
                    defined.push(true);
                }
                None => {
                    data.extend(std::iter::repeat_n(0.0, row_len));
                    defined.push(false);
                }
            }
        }
        Ok(Self {
            from,
            to,
            data,
            defined,
        })
    }

    /// Builds every row from `f(from_index, to_index)`.
    pub fn from_fn(
        from: Vec<Alphabet>,
        to: Vec<Alphabet>,
        mut f: impl FnMut(&[usize], &[usize]) -> f64,
    ) -> Result<Self> {
        let f_sizes: Vec<usize> = from.iter().map(Alphabet::size).collect();
        let t_sizes: Vec<usize> = to.iter().map(Alphabet::size).collect();
        let mut rows = Vec::new();
        let mut fi = vec![0; f_sizes.len()];
        loop {
            let mut row = Vec::new();
            let mut ti = vec![0; t_sizes.len()];
            loop {
                row.push(f(&fi, &ti));
                if !advance(&mut ti, &t_sizes) {
                    break;
                }
            }
            rows.push(Some(row));
            if !advance(&mut fi, &f_sizes) {
                break;
            }
        }
        Self::new(from, to, rows)
    }

    /// Rows given as a flat row-major array, all defined.
    pub fn from_flat(from: Vec<Alphabet>, to: Vec<Alphabet>, flat: &[f64]) -> Result<Self> {
        let row_len: usize = to.iter().map(Alphabet::size).product();
        if row_len == 0 || !flat.len().is_multiple_of(row_len) {
            return Err(Error::LengthMismatch {
                expected: row_len,
                found: flat.len(),
            });
        }
        let rows = flat.chunks(row_len).map(|c| Some(c.to_vec())).collect();
        Self::new(from, to, rows)
    }

    pub(crate) fn from_parts(from: Vec<Alphabet>, to: Vec<Alphabet>, data: Vec<f64>, defined: Vec<bool>) -> Self {
        Self {
            from,
            to,
            data,
            defined,
        }
    }

    pub fn from(&self) -> &[Alphabet] {
        &self.from
    }

    pub fn to(&self) -> &[Alphabet] {
        &self.to
    }

    pub fn n_rows(&self) -> usize {
        self.defined.len()
    }

    pub fn row_len(&self) -> usize {
        self.to.iter().map(Alphabet::size).product()
    }

    pub fn is_defined(&self, row: usize) -> bool {
        self.defined[row]
    }

    /// Row `i`, or `None` when it is undefined.
    pub fn row(&self, i: usize) -> Option<&[f64]> {
        if self.defined[i] {
            let n = self.row_len();
            Some(&self.data[i * n..(i + 1) * n])
        } else {
            None
        }
    }

    /// Flat row index of a multi-index over `from`.
    pub fn row_index(&self, from_index: &[usize]) -> usize {
        let s = strides(&self.from.iter().map(Alphabet::size).collect::<Vec<_>>());
        from_index.iter().zip(&s).map(|(i, s)| i * s).sum()
    }

    /// Raw row-major data; undefined rows hold zeros.
    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc(eps: f64) -> CondKernel {
        CondKernel::from_fn(vec![Alphabet::binary("x")], vec![Alphabet::binary("y")], |f, t| {
            if f[0] == t[0] {
                1.0 - eps
            } else {
                eps
            }
        })
        .unwrap()
    }

    #[test]
    fn rows_and_indices() {
        let k = bsc(0.1);
        assert_eq!(k.n_rows(), 2);
        assert_eq!(k.row(1).unwrap(), &[0.1, 0.9]);
        assert_eq!(k.row_index(&[1]), 1);
    }

    #[test]
    fn rejects_bad_rows() {
        let from = vec![Alphabet::binary("x")];
        let to = vec![Alphabet::binary("y")];
        assert!(CondKernel::new(from.clone(), to.clone(), vec![Some(vec![0.5, 0.5])]).is_err());
        assert!(CondKernel::new(
            from.clone(),
            to.clone(),
            vec![Some(vec![0.5, 0.4]), Some(vec![1.0, 0.0])]
        )
        .is_err());
        assert!(CondKernel::new(from.clone(), from.clone(), vec![None, None]).is_err());
        let k = CondKernel::new(from, to, vec![None, Some(vec![0.0, 1.0])]).unwrap();
        assert!(!k.is_defined(0));
    }

    #[test]
    fn json_uses_null_for_undefined_rows() {
        let k = CondKernel::new(
            vec![Alphabet::binary("x")],
            vec![Alphabet::binary("y")],
            vec![None, Some(vec![0.25, 0.75])],
        )
        .unwrap();
        let s = serde_json::to_string(&k).unwrap();
        assert!(s.contains("\"rows\":[null,[0.25,0.75]]"));
        let back: CondKernel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
    }
}
