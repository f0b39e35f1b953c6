//! Exact finite-alphabet probability arithmetic.
//!
//! Joints are dense row-major arrays over an ordered list of named variables.
//! Logarithms are base 2 and entries at or below [`TOL_SUPP`] count as zero.
//!
//! [`TOL_SUPP`]: crate::tol::TOL_SUPP

mod alphabet;
mod dist;
mod info;
mod kernel;

pub use alphabet::Alphabet;
pub use dist::FiniteDist;
pub use info::{binary_entropy, conditional_entropy, entropy, entropy_of, mutual_information, mutual_information_raw};
pub use kernel::CondKernel;

/// Row-major strides for the given dimension sizes.
pub(crate) fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * sizes[i + 1];
    }
    strides
}

/// Advances a row-major multi-index; returns false after the last index.
pub(crate) fn advance(index: &mut [usize], sizes: &[usize]) -> bool {
    for k in (0..index.len()).rev() {
        index[k] += 1;
        if index[k] < sizes[k] {
            return true;
        }
        index[k] = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strides_are_row_major() {
        assert_eq!(strides(&[2, 3, 4]), vec![12, 4, 1]);
        assert_eq!(strides(&[5]), vec![1]);
        assert!(strides(&[]).is_empty());
    }

    #[test]
    fn advance_walks_every_index_once() {
        let sizes = [2, 3];
        let mut idx = vec![0, 0];
        let mut seen = vec![idx.clone()];
        while advance(&mut idx, &sizes) {
            seen.push(idx.clone());
        }
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[1], vec![0, 1]);
        assert_eq!(seen[5], vec![1, 2]);
    }
}
