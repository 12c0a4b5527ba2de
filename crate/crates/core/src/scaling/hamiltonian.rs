use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{SpinChainSpec, MAX_SPARSE_SPINS};
use crate::error::{Error, Result};

/// Real symmetric operator in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseHamiltonian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `y = H·x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        for (row, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for idx in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += x[self.cols[idx]] * self.values[idx];
            }
            *out = acc;
        }
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.dim)
            .map(|r| {
                self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for row in 0..self.dim {
            for idx in self.row_ptr[row]..self.row_ptr[row + 1] {
                m[(row, self.cols[idx])] += self.values[idx];
            }
        }
        m
    }
}

/// Transverse-field Ising chain with open boundaries:
/// `H = J·Σ σᶻᵢσᶻᵢ₊₁ + Σ hᵢσˣᵢ`.
///
/// Spin `i` is tensor factor `i` (left factor major), i.e. bit `N−1−i` of the
/// basis index; a clear bit is `|↑⟩` with `σᶻ = +1`.
pub fn build_hamiltonian(spec: &SpinChainSpec) -> Result<SparseHamiltonian> {
    let n = spec.n_spins();
    if n > MAX_SPARSE_SPINS {
        return Err(Error::TooLarge {
            what: "spin chain",
            size: n,
            cap: MAX_SPARSE_SPINS,
        });
    }
    let dim = 1usize << n;
    let bit = |i: usize| 1usize << (n - 1 - i);
    let flips: Vec<(usize, f64)> = spec
        .fields()
        .iter()
        .enumerate()
        .filter(|(_, h)| **h != 0.0)
        .map(|(i, &h)| (bit(i), h))
        .collect();

    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::with_capacity(dim * (flips.len() + 1));
    let mut values = Vec::with_capacity(dim * (flips.len() + 1));
    row_ptr.push(0);
    for state in 0..dim {
        let zz: f64 = (0..n.saturating_sub(1))
            .map(|i| {
                let aligned = (state & bit(i) == 0) == (state & bit(i + 1) == 0);
                if aligned {
                    1.0
                } else {
                    -1.0
                }
            })
            .sum();
        let diag = spec.coupling() * zz;
        if diag != 0.0 {
            cols.push(state);
            values.push(diag);
        }
        for &(mask, h) in &flips {
            cols.push(state ^ mask);
            values.push(h);
        }
        row_ptr.push(cols.len());
    }
    Ok(SparseHamiltonian {
        dim,
        row_ptr,
        cols,
        values,
    })
}
