//! Exact finite-environment model.
//!
//! The particle couples to a detector with orthonormal configurations
//! `|ε_k⟩` through `H = |↑⟩⟨↑| ⊗ Σ u_k|ε_k⟩⟨ε_k| + |↓⟩⟨↓| ⊗ Σ d_k|ε_k⟩⟨ε_k|`.
//! The detector starts in the classical mixture `Σ w_k|ε_k⟩⟨ε_k|`. Tracing the
//! detector out reproduces the stochastic model exactly when the
//! configurations are the noise draws.

use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qcore::{evolve_diagonal, partial_trace, DensityMatrix, StateVector};
use crate::rng::substream;
use crate::stats::pairwise_sum;
use crate::stern_gerlach::{
    estimate_from_samples, initial_state_xplus, sample_noise_batch, transition_probability,
    NoiseSpec, TransitionEstimate,
};

/// Largest detector handled by the dense joint-matrix path.
pub const MAX_DENSE_CONFIGS: usize = 64;
/// Largest detector handled by the closed-form path.
pub const MAX_CLOSED_FORM_CONFIGS: usize = 100_000;

const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSpectrum {
    u_energies: Vec<f64>,
    d_energies: Vec<f64>,
    weights: Vec<f64>,
}

impl DetectorSpectrum {
    pub fn new(u_energies: Vec<f64>, d_energies: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let k = u_energies.len();
        if k == 0 {
            return Err(Error::BadSpectrum(
                "at least one configuration is required".into(),
            ));
        }
        if d_energies.len() != k || weights.len() != k {
            return Err(Error::BadSpectrum(format!(
                "length mismatch: {} u, {} d, {} weights",
                k,
                d_energies.len(),
                weights.len()
            )));
        }
        if u_energies.iter().chain(&d_energies).any(|e| !e.is_finite()) {
            return Err(Error::BadSpectrum("energies must be finite".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::BadSpectrum(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total = pairwise_sum(&weights);
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::BadSpectrum(format!("weights sum to {total}, not 1")));
        }
        Ok(Self {
            u_energies,
            d_energies,
            weights,
        })
    }

    /// Equal weights `1/K`.
    pub fn uniform(u_energies: Vec<f64>, d_energies: Vec<f64>) -> Result<Self> {
        let k = u_energies.len();
        Self::new(u_energies, d_energies, vec![1.0 / k as f64; k])
    }

    /// One configuration per noise draw: `u_k = ū + Δu_k`, `d_k = d̄ + Δd_k`.
    pub fn from_noise(
        spec: &NoiseSpec,
        samples: &[crate::stern_gerlach::NoiseSample],
    ) -> Result<Self> {
        let u = samples.iter().map(|s| spec.u_mean() + s.delta_u).collect();
        let d = samples.iter().map(|s| spec.d_mean() + s.delta_d).collect();
        Self::uniform(u, d)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn u_energies(&self) -> &[f64] {
        &self.u_energies
    }

    pub fn d_energies(&self) -> &[f64] {
        &self.d_energies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Joint basis energies in `(spin, k)` row-major order.
    fn joint_energies(&self) -> Vec<f64> {
        let mut e = self.u_energies.clone();
        e.extend_from_slice(&self.d_energies);
        e
    }
}

/// `|p⟩⟨p| ⊗ Σ w_k|ε_k⟩⟨ε_k|` with dims `[2, K]`.
pub fn build_joint(particle: &StateVector, spectrum: &DetectorSpectrum) -> Result<DensityMatrix> {
    if particle.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: particle.len(),
        });
    }
    if spectrum.len() > MAX_DENSE_CONFIGS {
        return Err(Error::TooLarge {
            what: "dense detector",
            size: spectrum.len(),
            cap: MAX_DENSE_CONFIGS,
        });
    }
    let detector = DensityMatrix::diagonal(spectrum.weights())?;
    Ok(DensityMatrix::from_pure(particle).kron(&detector))
}

/// `U ρ U†` with `U` diagonal: phase `e^{−i u_k t}` on `(↑, k)` and
/// `e^{−i d_k t}` on `(↓, k)`.
pub fn evolve_joint(
    rho: &DensityMatrix,
    spectrum: &DetectorSpectrum,
    t: f64,
) -> Result<DensityMatrix> {
    let k = spectrum.len();
    if rho.dims() != [2, k] {
        return Err(Error::DimensionMismatch {
            expected: 2 * k,
            found: rho.dim(),
        });
    }
    let phases: Vec<Complex64> = spectrum
        .joint_energies()
        .iter()
        .map(|e| Complex64::from_polar(1.0, -e * t))
        .collect();
    let n = rho.dim();
    let mut out = rho.clone();
    for (i, row) in out.entries_mut().chunks_mut(n).enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry *= phases[i] * phases[j].conj();
        }
    }
    Ok(out)
}

/// Reduced particle state after joint evolution of `particle ⊗ detector`,
/// computed through the dense matrices.
pub fn reduced_particle_state(
    particle: &StateVector,
    spectrum: &DetectorSpectrum,
    t: f64,
) -> Result<DensityMatrix> {
    let joint = evolve_joint(&build_joint(particle, spectrum)?, spectrum, t)?;
    partial_trace(&joint, 0)
}

fn check_closed_form_size(spectrum: &DetectorSpectrum) -> Result<()> {
    if spectrum.len() > MAX_CLOSED_FORM_CONFIGS {
        return Err(Error::TooLarge {
            what: "closed-form detector",
            size: spectrum.len(),
            cap: MAX_CLOSED_FORM_CONFIGS,
        });
    }
    Ok(())
}

/// Probability of returning to `|ψ_x+⟩`: `Σ_k w_k [½ + ½ cos((u_k − d_k)t)]`.
pub fn exact_probability(spectrum: &DetectorSpectrum, t: f64) -> Result<f64> {
    check_closed_form_size(spectrum)?;
    let terms: Vec<f64> = spectrum
        .u_energies
        .iter()
        .zip(&spectrum.d_energies)
        .zip(&spectrum.weights)
        .map(|((u, d), w)| w * (0.5 + 0.5 * ((u - d) * t).cos()))
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `|ρ₀₁|` of a single-spin density matrix.
pub fn coherence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    Ok(rho.get(0, 1).norm())
}

/// `½ |Σ_k w_k e^{−i(u_k − d_k)t}|`, the coherence left in the reduced state
/// of an initially `|ψ_x+⟩` particle.
pub fn coherence_closed_form(spectrum: &DetectorSpectrum, t: f64) -> Result<f64> {
    check_closed_form_size(spectrum)?;
    let (re, im): (Vec<f64>, Vec<f64>) = spectrum
        .u_energies
        .iter()
        .zip(&spectrum.d_energies)
        .zip(&spectrum.weights)
        .map(|((u, d), w)| {
            let phase = -(u - d) * t;
            (w * phase.cos(), w * phase.sin())
        })
        .unzip();
    Ok(0.5 * pairwise_sum(&re).hypot(pairwise_sum(&im)))
}

/// Monte-Carlo estimate of [`exact_probability`]: draw configuration `k` with
/// probability `w_k` (substream `i` of `seed` for draw `i`), evolve `|ψ_x+⟩`
/// with that configuration's branch energies and average the probabilities.
pub fn mc_configuration_probability(
    spectrum: &DetectorSpectrum,
    t: f64,
    m: usize,
    seed: u64,
) -> Result<TransitionEstimate> {
    if m == 0 {
        return Err(Error::NoSamples);
    }
    let picker =
        WeightedIndex::new(&spectrum.weights).map_err(|e| Error::BadSpectrum(e.to_string()))?;
    let xplus = initial_state_xplus();
    let probabilities: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|i| {
            let k = substream(seed, i).sample(&picker);
            let energies = [spectrum.u_energies[k], spectrum.d_energies[k]];
            let evolved = evolve_diagonal(&energies, t, &xplus)?;
            transition_probability(&xplus, &evolved)
        })
        .collect::<Result<_>>()?;
    TransitionEstimate::from_probabilities(&probabilities, seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equivalence {
    pub exact_probability: f64,
    pub mc_probability: f64,
    pub deviation: f64,
    pub coherence: f64,
}

/// Runs the stochastic estimator and the `K = M` configuration environment on
/// the same `M` noise draws and compares them.
pub fn equivalence(spec: &NoiseSpec, t: f64, m: usize) -> Result<Equivalence> {
    if m == 0 {
        return Err(Error::NoSamples);
    }
    let samples = sample_noise_batch(spec, m);
    let spectrum = DetectorSpectrum::from_noise(spec, &samples)?;
    let exact = exact_probability(&spectrum, t)?;
    let mc = estimate_from_samples(&initial_state_xplus(), spec, &samples, t)?;
    Ok(Equivalence {
        exact_probability: exact,
        mc_probability: mc.mean,
        deviation: (exact - mc.mean).abs(),
        coherence: coherence_closed_form(&spectrum, t)?,
    })
}

/// Maximum absolute deviation between the environment prediction and the
/// Monte-Carlo mean on shared draws.
pub fn equivalence_check(spec: &NoiseSpec, t: f64, m: usize) -> Result<f64> {
    Ok(equivalence(spec, t, m)?.deviation)
}
