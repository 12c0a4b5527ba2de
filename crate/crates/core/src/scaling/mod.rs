//! Exact many-body evolution and its cost.
//!
//! An interacting spin chain needs the full `2^N` amplitude vector; a chain
//! without coupling factorizes and evolves spin by spin in `Θ(N)`. The runner
//! times both and fits their growth.

mod evolve;
mod hamiltonian;
mod runner;

use num_bigint::BigUint;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;

pub use evolve::{
    evolve_exact, evolve_exact_with_steps, evolve_product, rk4_steps, ProductState,
    NORM_DRIFT_BOUND,
};
pub use hamiltonian::{build_hamiltonian, SparseHamiltonian};
pub use runner::{run_scaling, FitKind, ScalingPlan, ScalingReport, SlopeFit};

/// Cap for the dense eigendecomposition backend.
pub const MAX_DENSE_SPINS: usize = 12;
/// Cap for anything that materializes the `2^N` vector (16·2²⁴ B = 256 MiB).
pub const MAX_SPARSE_SPINS: usize = 24;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    #[default]
    Open,
}

/// Transverse-field Ising chain parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinChainSpec {
    n_spins: usize,
    coupling: f64,
    fields: Vec<f64>,
    seed: u64,
    boundary: Boundary,
}

impl SpinChainSpec {
    pub fn new(n_spins: usize, coupling: f64, fields: Vec<f64>, seed: u64) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::InvalidChain("at least one spin is required".into()));
        }
        if fields.len() != n_spins {
            return Err(Error::InvalidChain(format!(
                "{} fields for {} spins",
                fields.len(),
                n_spins
            )));
        }
        if !coupling.is_finite() || fields.iter().any(|h| !h.is_finite()) {
            return Err(Error::InvalidChain("parameters must be finite".into()));
        }
        Ok(Self {
            n_spins,
            coupling,
            fields,
            seed,
            boundary: Boundary::Open,
        })
    }

    /// Fields `hᵢ ~ U[−1, 1]` drawn from substream `i` of `seed`, so a chain
    /// of `N` spins is a prefix of any longer chain with the same seed.
    pub fn with_random_fields(n_spins: usize, coupling: f64, seed: u64) -> Result<Self> {
        let fields = (0..n_spins as u64)
            .map(|i| substream(seed, i).random_range(-1.0..=1.0))
            .collect();
        Self::new(n_spins, coupling, fields, seed)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// `|J|(N−1) + Σ|hᵢ|`, an upper bound on `‖H‖`.
    pub fn norm_bound(&self) -> f64 {
        self.coupling.abs() * (self.n_spins - 1) as f64
            + self.fields.iter().map(|h| h.abs()).sum::<f64>()
    }

    /// Same chain with every amplitude-scale energy divided by `hbar`.
    pub fn rescaled(&self, hbar: f64) -> Self {
        Self {
            coupling: self.coupling / hbar,
            fields: self.fields.iter().map(|h| h / hbar).collect(),
            ..self.clone()
        }
    }
}

/// `(2^N, 2^N − 1)`: basis size and the number of free complex parameters of
/// a normalized state modulo global phase.
pub fn hilbert_dim(n_spins: usize) -> (BigUint, BigUint) {
    let dim = BigUint::from(1u8) << n_spins;
    let params = &dim - 1u8;
    (dim, params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Backend {
    /// `exp(−iHt)` from a dense eigendecomposition.
    DenseExpm,
    /// Fixed-step fourth-order Runge–Kutta on the sparse Hamiltonian.
    SparseStep,
    /// Independent single-spin propagators (`J = 0` only).
    ProductExact,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::DenseExpm => "DenseExpm",
            Backend::SparseStep => "SparseStep",
            Backend::ProductExact => "ProductExact",
        }
    }
}

/// Backends that evolve the full `2^N` vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExactBackend {
    DenseExpm,
    SparseStep,
}

impl From<ExactBackend> for Backend {
    fn from(b: ExactBackend) -> Self {
        match b {
            ExactBackend::DenseExpm => Backend::DenseExpm,
            ExactBackend::SparseStep => Backend::SparseStep,
        }
    }
}

/// One timed evolution.
///
/// `matvec_count` counts operator rows applied to a state vector: a full
/// sparse `H·ψ` contributes `2^N`, a single-spin 2×2 propagator contributes 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRecord {
    pub n_spins: usize,
    pub dim: BigUint,
    pub param_count: BigUint,
    pub backend: Backend,
    pub matvec_count: u64,
    pub wall_time: f64,
    pub peak_state_bytes: u64,
}

impl ScalingRecord {
    fn new(
        n_spins: usize,
        backend: Backend,
        matvec_count: u64,
        wall_time: f64,
        peak_state_bytes: u64,
    ) -> Self {
        let (dim, param_count) = hilbert_dim(n_spins);
        Self {
            n_spins,
            dim,
            param_count,
            backend,
            matvec_count,
            wall_time,
            peak_state_bytes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hilbert_dim_examples() {
        assert_eq!(hilbert_dim(1), (BigUint::from(2u8), BigUint::from(1u8)));
        assert_eq!(
            hilbert_dim(10),
            (BigUint::from(1024u32), BigUint::from(1023u32))
        );
        let (dim, params) = hilbert_dim(100);
        assert_eq!(dim.to_string(), "1267650600228229401496703205376");
        assert_eq!(params.to_string(), "1267650600228229401496703205375");
        assert_eq!(dim.bits(), 101);
    }

    #[test]
    fn hilbert_dim_doubles() {
        for n in 1..200 {
            let (a, pa) = hilbert_dim(n);
            let (b, _) = hilbert_dim(n + 1);
            assert_eq!(&a * 2u8, b);
            assert_eq!(pa + 1u8, a);
        }
    }

    #[test]
    fn random_fields_are_prefix_stable() {
        let short = SpinChainSpec::with_random_fields(4, 1.0, 9).unwrap();
        let long = SpinChainSpec::with_random_fields(10, 1.0, 9).unwrap();
        assert_eq!(short.fields(), &long.fields()[..4]);
        assert!(long.fields().iter().all(|h| h.abs() <= 1.0));
    }

    #[test]
    fn spec_validation() {
        assert!(SpinChainSpec::new(0, 1.0, vec![], 0).is_err());
        assert!(SpinChainSpec::new(2, 1.0, vec![0.0], 0).is_err());
        assert!(SpinChainSpec::new(1, f64::NAN, vec![0.0], 0).is_err());
        assert!(SpinChainSpec::new(1, 1.0, vec![f64::INFINITY], 0).is_err());
    }
}
