//! Pure states over a tensor-product computational basis.
//!
//! Basis ordering is fixed: `|↑⟩` is index 0, `|↓⟩` is index 1, and composite
//! indices are row-major with the left factor most significant.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A single complex amplitude.
pub type Amplitude = Complex64;

/// Norms below this are treated as the zero vector.
pub const ZERO_NORM: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Amplitude>,
    dims: Vec<usize>,
}

impl StateVector {
    /// Builds a state from raw amplitudes and a subsystem factorization.
    ///
    /// The product of `dims` must equal the number of amplitudes and every
    /// amplitude must be finite. No normalization is applied.
    pub fn new(amplitudes: Vec<Amplitude>, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::BadDims {
                dims,
                reason: "every subsystem needs a positive dimension",
            });
        }
        let total: usize = dims.iter().product();
        if total != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite {
                what: "state amplitudes",
            });
        }
        Ok(Self { amplitudes, dims })
    }

    /// Single-factor state whose dimension is the number of amplitudes.
    pub fn from_amplitudes(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let d = amplitudes.len();
        Self::new(amplitudes, vec![d])
    }

    /// Computational basis vector `|index⟩` over the given factorization.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: index,
            });
        }
        let mut amplitudes = vec![Amplitude::new(0.0, 0.0); total];
        amplitudes[index] = Amplitude::new(1.0, 0.0);
        Self::new(amplitudes, dims)
    }

    /// `|↑⟩`, the spin-z `+½` eigenstate.
    pub fn spin_up() -> Self {
        Self {
            amplitudes: vec![Amplitude::new(1.0, 0.0), Amplitude::new(0.0, 0.0)],
            dims: vec![2],
        }
    }

    /// `|↓⟩`, the spin-z `−½` eigenstate.
    pub fn spin_down() -> Self {
        Self {
            amplitudes: vec![Amplitude::new(0.0, 0.0), Amplitude::new(1.0, 0.0)],
            dims: vec![2],
        }
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Amplitude> {
        self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm, keeping the direction.
    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        // NaN norms fail this test too.
        if norm.is_nan() || norm < ZERO_NORM {
            return Err(Error::ZeroVector { norm });
        }
        let amplitudes = self.amplitudes.iter().map(|a| a / norm).collect();
        Ok(Self {
            amplitudes,
            dims: self.dims.clone(),
        })
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Amplitude> {
        inner_product(self, other)
    }
}

/// `⟨a|b⟩`, conjugate-linear in the first argument.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Amplitude> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum())
}

/// `a ⊗ b` with `a` as the major index; dims are concatenated.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> StateVector {
    let mut amplitudes = Vec::with_capacity(a.len() * b.len());
    for x in &a.amplitudes {
        amplitudes.extend(b.amplitudes.iter().map(|y| x * y));
    }
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    StateVector { amplitudes, dims }
}

/// Applies `exp(−i·t·diag(energies))` (ħ = 1): amplitude `i` picks up the
/// phase `e^{−i·Eᵢ·t}`.
pub fn evolve_diagonal(energies: &[f64], t: f64, state: &StateVector) -> Result<StateVector> {
    if energies.len() != state.len() {
        return Err(Error::DimensionMismatch {
            expected: state.len(),
            found: energies.len(),
        });
    }
    if !t.is_finite() || energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::NonFinite {
            what: "diagonal evolution inputs",
        });
    }
    let amplitudes = state
        .amplitudes
        .iter()
        .zip(energies)
        .map(|(a, &e)| a * Amplitude::from_polar(1.0, -e * t))
        .collect();
    Ok(StateVector {
        amplitudes,
        dims: state.dims.clone(),
    })
}
