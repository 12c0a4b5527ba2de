use nalgebra::DMatrix;

use super::state::{Amplitude, StateVector};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;

/// A dense `d×d` density operator stored row-major, with its subsystem
/// factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    entries: Vec<Amplitude>,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Wraps a row-major entry grid. Shape and finiteness are checked here;
    /// the physical invariants are checked by [`DensityMatrix::validate`].
    pub fn from_entries(entries: Vec<Amplitude>, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::BadDims {
                dims,
                reason: "every subsystem needs a positive dimension",
            });
        }
        let dim: usize = dims.iter().product();
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite {
                what: "density matrix",
            });
        }
        Ok(Self { dim, entries, dims })
    }

    /// `|ψ⟩⟨ψ|`, inheriting the state's factorization.
    pub fn from_pure(state: &StateVector) -> Self {
        let amps = state.amplitudes();
        let dim = amps.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in amps {
            entries.extend(amps.iter().map(|b| a * b.conj()));
        }
        Self {
            dim,
            entries,
            dims: state.dims().to_vec(),
        }
    }

    /// Diagonal matrix `Σ pᵢ|i⟩⟨i|` over a single factor.
    pub fn diagonal(probabilities: &[f64]) -> Result<Self> {
        let dim = probabilities.len();
        let mut entries = vec![Amplitude::new(0.0, 0.0); dim * dim];
        for (i, &p) in probabilities.iter().enumerate() {
            entries[i * dim + i] = Amplitude::new(p, 0.0);
        }
        Self::from_entries(entries, vec![dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn entries(&self) -> &[Amplitude] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Amplitude {
        self.entries[row * self.dim + col]
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [Amplitude] {
        &mut self.entries
    }

    pub fn trace(&self) -> Amplitude {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// `max |ρᵢⱼ − conj(ρⱼᵢ)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_fn(self.dim, self.dim, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        });
        let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Checks Hermiticity, unit trace and positivity at the module tolerances.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let herm = self.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(format!("not Hermitian (max deviation {herm:e})"));
        }
        let tr = self.trace();
        if tr.im.abs() > TRACE_TOL || (tr.re - 1.0).abs() > TRACE_TOL {
            return Err(format!("trace {tr} differs from 1"));
        }
        let min = self.eigenvalues().first().copied().unwrap_or(0.0);
        if min < -PSD_TOL {
            return Err(format!("negative eigenvalue {min:e}"));
        }
        Ok(())
    }

    /// `self ⊗ other` with `self` as the major index.
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        let (da, db) = (self.dim, other.dim);
        let dim = da * db;
        let mut entries = vec![Amplitude::new(0.0, 0.0); dim * dim];
        for i in 0..da {
            for j in 0..da {
                let a = self.get(i, j);
                for k in 0..db {
                    let row = (i * db + k) * dim + j * db;
                    for l in 0..db {
                        entries[row + l] = a * other.get(k, l);
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix { dim, entries, dims }
    }
}

/// Traces out every factor except `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: usize) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if dims.len() < 2 || keep >= dims.len() {
        return Err(Error::BadSubsystem {
            keep,
            dims: dims.to_vec(),
        });
    }
    let left: usize = dims[..keep].iter().product();
    let kept = dims[keep];
    let right: usize = dims[keep + 1..].iter().product();
    let index = |l: usize, a: usize, r: usize| (l * kept + a) * right + r;

    let mut entries = vec![Amplitude::new(0.0, 0.0); kept * kept];
    for a in 0..kept {
        for b in 0..kept {
            let mut acc = Amplitude::new(0.0, 0.0);
            for l in 0..left {
                for r in 0..right {
                    acc += rho.get(index(l, a, r), index(l, b, r));
                }
            }
            entries[a * kept + b] = acc;
        }
    }
    Ok(DensityMatrix {
        dim: kept,
        entries,
        dims: vec![kept],
    })
}
