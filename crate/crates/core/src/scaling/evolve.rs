use std::time::Instant;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{
    build_hamiltonian, Backend, ExactBackend, ScalingRecord, SparseHamiltonian, SpinChainSpec,
    MAX_DENSE_SPINS, MAX_SPARSE_SPINS,
};
use crate::error::{Error, Result};
use crate::qcore::StateVector;

/// Largest tolerated `|‖ψ(t)‖ − ‖ψ(0)‖|` for the Runge–Kutta backend.
pub const NORM_DRIFT_BOUND: f64 = 1e-9;

const PHASE_ERROR_TARGET: f64 = 1e-8;

const AMPLITUDE_BYTES: u64 = std::mem::size_of::<Complex64>() as u64;

/// Number of RK4 steps over `|t|` for an operator with `‖H‖ ≤ norm_bound`.
///
/// For an eigenvalue `λ` one RK4 step scales the norm by
/// `1 − (λh)⁶/144 + O((λh)⁸)`, so `n` steps of size `x = ‖H‖h` drift by
/// about `‖H‖|t|·x⁵/144`; the accumulated phase error is about
/// `‖H‖|t|·x⁴/120`. The step keeps drift at half the bound and phase error
/// below `PHASE_ERROR_TARGET`.
pub fn rk4_steps(norm_bound: f64, t: f64) -> usize {
    let span = norm_bound * t.abs();
    if span == 0.0 {
        return 0;
    }
    let drift_limited = (144.0 * 0.5 * NORM_DRIFT_BOUND / span).powf(0.2);
    let phase_limited = (120.0 * PHASE_ERROR_TARGET / span).powf(0.25);
    let x = drift_limited.min(phase_limited).min(0.1);
    (span / x).ceil() as usize
}

fn check_initial(spec: &SpinChainSpec, initial: &StateVector) -> Result<()> {
    let dim = 1usize << spec.n_spins();
    if initial.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: initial.len(),
        });
    }
    Ok(())
}

fn chain_state(spec: &SpinChainSpec, amplitudes: Vec<Complex64>) -> Result<StateVector> {
    StateVector::new(amplitudes, vec![2; spec.n_spins()])
}

/// Evolves a chain state for time `t` with the chosen full-vector backend.
pub fn evolve_exact(
    spec: &SpinChainSpec,
    t: f64,
    initial: &StateVector,
    backend: ExactBackend,
) -> Result<(StateVector, ScalingRecord)> {
    match backend {
        ExactBackend::DenseExpm => evolve_dense(spec, t, initial),
        ExactBackend::SparseStep => {
            let steps = rk4_steps(spec.norm_bound(), t);
            evolve_exact_with_steps(spec, t, initial, steps)
        }
    }
}

fn evolve_dense(
    spec: &SpinChainSpec,
    t: f64,
    initial: &StateVector,
) -> Result<(StateVector, ScalingRecord)> {
    let n = spec.n_spins();
    if n > MAX_DENSE_SPINS {
        return Err(Error::TooLarge {
            what: "dense spin chain",
            size: n,
            cap: MAX_DENSE_SPINS,
        });
    }
    check_initial(spec, initial)?;
    let start = Instant::now();
    let h = build_hamiltonian(spec)?.to_dense();
    let dim = h.nrows();
    let eig = SymmetricEigen::new(h);
    let vectors = &eig.eigenvectors;

    let re = DVector::from_iterator(dim, initial.amplitudes().iter().map(|a| a.re));
    let im = DVector::from_iterator(dim, initial.amplitudes().iter().map(|a| a.im));
    let c_re = vectors.tr_mul(&re);
    let c_im = vectors.tr_mul(&im);
    let mut rot_re = DVector::zeros(dim);
    let mut rot_im = DVector::zeros(dim);
    for k in 0..dim {
        let phase = Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
        let c = Complex64::new(c_re[k], c_im[k]) * phase;
        rot_re[k] = c.re;
        rot_im[k] = c.im;
    }
    let out_re = vectors * rot_re;
    let out_im = vectors * rot_im;
    let amplitudes = out_re
        .iter()
        .zip(out_im.iter())
        .map(|(&r, &i)| Complex64::new(r, i))
        .collect();
    let wall = start.elapsed().as_secs_f64();

    let record = ScalingRecord::new(
        n,
        Backend::DenseExpm,
        2 * dim as u64,
        wall,
        AMPLITUDE_BYTES << n,
    );
    Ok((chain_state(spec, amplitudes)?, record))
}

/// RK4 for `iψ' = Hψ` with an explicit step count.
///
/// The scaling runner fixes one step count for a whole sweep so that the
/// operation count depends on the dimension alone.
pub fn evolve_exact_with_steps(
    spec: &SpinChainSpec,
    t: f64,
    initial: &StateVector,
    steps: usize,
) -> Result<(StateVector, ScalingRecord)> {
    let n = spec.n_spins();
    if n > MAX_SPARSE_SPINS {
        return Err(Error::TooLarge {
            what: "sparse spin chain",
            size: n,
            cap: MAX_SPARSE_SPINS,
        });
    }
    check_initial(spec, initial)?;
    let start = Instant::now();
    let h = build_hamiltonian(spec)?;
    let mut psi = initial.amplitudes().to_vec();
    let applications = if steps == 0 {
        0
    } else {
        rk4(&h, &mut psi, t / steps as f64, steps)
    };
    let wall = start.elapsed().as_secs_f64();

    let norm_in = initial.norm();
    let norm_out = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let drift = (norm_out - norm_in).abs();
    if drift > NORM_DRIFT_BOUND {
        return Err(Error::StepUnstable {
            drift,
            bound: NORM_DRIFT_BOUND,
        });
    }
    let record = ScalingRecord::new(
        n,
        Backend::SparseStep,
        applications * h.dim() as u64,
        wall,
        AMPLITUDE_BYTES << n,
    );
    Ok((chain_state(spec, psi)?, record))
}

/// Classic RK4 on `ψ' = −iHψ`. Returns the number of `H·ψ` products.
fn rk4(h: &SparseHamiltonian, psi: &mut [Complex64], dt: f64, steps: usize) -> u64 {
    let dim = psi.len();
    let zero = Complex64::new(0.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut k1 = vec![zero; dim];
    let mut k2 = vec![zero; dim];
    let mut k3 = vec![zero; dim];
    let mut k4 = vec![zero; dim];
    let mut tmp = vec![zero; dim];

    // f(x) = −i·H·x, written into `out`.
    let deriv = |x: &[Complex64], out: &mut [Complex64]| {
        h.apply(x, out);
        for v in out.iter_mut() {
            *v *= minus_i;
        }
    };

    for _ in 0..steps {
        deriv(psi, &mut k1);
        for i in 0..dim {
            tmp[i] = psi[i] + k1[i] * (0.5 * dt);
        }
        deriv(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = psi[i] + k2[i] * (0.5 * dt);
        }
        deriv(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = psi[i] + k3[i] * dt;
        }
        deriv(&tmp, &mut k4);
        for i in 0..dim {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
    4 * steps as u64
}

/// Product of single-spin states, stored factor by factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductState {
    factors: Vec<[Complex64; 2]>,
}

impl ProductState {
    pub fn new(factors: Vec<[Complex64; 2]>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidChain("product state needs a factor".into()));
        }
        if factors.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite {
                what: "product state",
            });
        }
        Ok(Self { factors })
    }

    /// `|↑…↑⟩`.
    pub fn all_up(n_spins: usize) -> Self {
        let up = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        Self {
            factors: vec![up; n_spins],
        }
    }

    pub fn factors(&self) -> &[[Complex64; 2]] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Expands to the full `2^N` vector. Refuses chains above the memory cap.
    pub fn to_state_vector(&self) -> Result<StateVector> {
        let n = self.factors.len();
        if n > MAX_SPARSE_SPINS {
            return Err(Error::TooLarge {
                what: "product expansion",
                size: n,
                cap: MAX_SPARSE_SPINS,
            });
        }
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for f in &self.factors {
            amps = amps.iter().flat_map(|a| [a * f[0], a * f[1]]).collect();
        }
        StateVector::new(amps, vec![2; n])
    }
}

/// Evolves each spin under its own `hᵢσˣ`:
/// `exp(−i hᵢ t σˣ) = cos(hᵢt)·1 − i sin(hᵢt)·σˣ`. Never touches `2^N` storage.
pub fn evolve_product(
    spec: &SpinChainSpec,
    t: f64,
    initial: &ProductState,
) -> Result<(ProductState, ScalingRecord)> {
    if spec.coupling() != 0.0 {
        return Err(Error::NotProductForm {
            coupling: spec.coupling(),
        });
    }
    if initial.len() != spec.n_spins() {
        return Err(Error::DimensionMismatch {
            expected: spec.n_spins(),
            found: initial.len(),
        });
    }
    let start = Instant::now();
    let factors: Vec<[Complex64; 2]> = initial
        .factors
        .iter()
        .zip(spec.fields())
        .map(|(&[up, down], &h)| {
            let (s, c) = (h * t).sin_cos();
            let c = Complex64::new(c, 0.0);
            let mis = Complex64::new(0.0, -s);
            [c * up + mis * down, mis * up + c * down]
        })
        .collect();
    let wall = start.elapsed().as_secs_f64();
    let n = spec.n_spins();
    let record = ScalingRecord::new(
        n,
        Backend::ProductExact,
        2 * n as u64,
        wall,
        2 * AMPLITUDE_BYTES * n as u64,
    );
    Ok((ProductState { factors }, record))
}
