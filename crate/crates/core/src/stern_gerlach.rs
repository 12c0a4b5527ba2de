//! Coarse-grained Stern–Gerlach measurement model.
//!
//! A spin-½ particle prepared in `|ψ_x+⟩` passes a detector on the upward
//! branch. The interaction Hamiltonian is diagonal in the spin basis with
//! energies `ū + Δu` (up) and `d̄ + Δd` (down), where the deviations are
//! random. Each noise draw gives one evolved state; the model's prediction
//! is the expectation of the transition probability back to `|ψ_x+⟩`.
//!
//! Aggregation always averages probabilities. Complex amplitudes from
//! different draws are never averaged.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{evolve_diagonal, inner_product, Amplitude, StateVector};
use crate::rng::substream;
use crate::stats::{mean_and_stderr, sinc};

/// Distribution family of the energy deviations `Δu`, `Δd`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDistribution {
    /// `Δu ~ U[−ū, ū]`, `Δd ~ U[−d̄, d̄]`, independent.
    #[default]
    UniformSymmetric,
    /// `Δu ~ N(0, ū²)`, `Δd ~ N(0, d̄²)`, independent.
    GaussianSigmaEqualsMean,
    /// `Δu = Δd = 0`: deterministic interaction energies.
    Noiseless,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    u_mean: f64,
    d_mean: f64,
    distribution: NoiseDistribution,
    seed: u64,
}

impl NoiseSpec {
    /// Mean interaction energies must be finite and non-negative.
    pub fn new(
        u_mean: f64,
        d_mean: f64,
        distribution: NoiseDistribution,
        seed: u64,
    ) -> Result<Self> {
        for (name, v) in [("u_mean", u_mean), ("d_mean", d_mean)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidNoise(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(Self {
            u_mean,
            d_mean,
            distribution,
            seed,
        })
    }

    pub fn uniform(u_mean: f64, d_mean: f64, seed: u64) -> Result<Self> {
        Self::new(u_mean, d_mean, NoiseDistribution::UniformSymmetric, seed)
    }

    pub fn u_mean(&self) -> f64 {
        self.u_mean
    }

    pub fn d_mean(&self) -> f64 {
        self.d_mean
    }

    pub fn distribution(&self) -> NoiseDistribution {
        self.distribution
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// One draw of the energy deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSample {
    pub delta_u: f64,
    pub delta_d: f64,
}

impl NoiseSample {
    pub const ZERO: NoiseSample = NoiseSample {
        delta_u: 0.0,
        delta_d: 0.0,
    };

    /// Random relative phase `ζ = (Δu − Δd)·t`.
    pub fn zeta(&self, t: f64) -> f64 {
        (self.delta_u - self.delta_d) * t
    }
}

/// Monte-Carlo estimate of an expected transition probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl TransitionEstimate {
    pub(crate) fn from_probabilities(probabilities: &[f64], seed: u64) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(Error::NoSamples);
        }
        let (mean, stderr) = mean_and_stderr(probabilities);
        Ok(Self {
            mean: mean.clamp(0.0, 1.0),
            stderr,
            samples: probabilities.len(),
            seed,
        })
    }
}

/// How the mean of `cos ζ` is evaluated analytically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingVariant {
    /// `ζ` treated as uniform on `±(ū + d̄)t`, giving `sin(a)/a`.
    UniformPhase,
    /// Exact expectation under the `NoiseSpec` distribution.
    ExactConvolution,
}

/// `|ψ_x+⟩ = (|↑⟩ + |↓⟩)/√2`.
pub fn initial_state_xplus() -> StateVector {
    StateVector::from_amplitudes(vec![
        Amplitude::new(FRAC_1_SQRT_2, 0.0),
        Amplitude::new(FRAC_1_SQRT_2, 0.0),
    ])
    .expect("two finite amplitudes")
}

/// Draws `(Δu, Δd)` from substream `index` of the noise seed.
pub fn sample_noise(spec: &NoiseSpec, index: u64) -> NoiseSample {
    let mut rng = substream(spec.seed, index);
    match spec.distribution {
        NoiseDistribution::UniformSymmetric => {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            NoiseSample {
                delta_u: spec.u_mean * (2.0 * a - 1.0),
                delta_d: spec.d_mean * (2.0 * b - 1.0),
            }
        }
        NoiseDistribution::GaussianSigmaEqualsMean => {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            NoiseSample {
                delta_u: spec.u_mean * a,
                delta_d: spec.d_mean * b,
            }
        }
        NoiseDistribution::Noiseless => NoiseSample::ZERO,
    }
}

/// `M` draws on substreams `0..M`.
pub fn sample_noise_batch(spec: &NoiseSpec, m: usize) -> Vec<NoiseSample> {
    (0..m as u64)
        .into_par_iter()
        .map(|k| sample_noise(spec, k))
        .collect()
}

/// Applies the stochastic propagator for one noise draw to a spin state.
pub fn evolve_sample(
    initial: &StateVector,
    spec: &NoiseSpec,
    sample: &NoiseSample,
    t: f64,
) -> Result<StateVector> {
    if initial.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: initial.len(),
        });
    }
    let energies = [spec.u_mean + sample.delta_u, spec.d_mean + sample.delta_d];
    evolve_diagonal(&energies, t, initial)
}

/// `|⟨a|b⟩|²`.
pub fn transition_probability(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(inner_product(a, b)?.norm_sqr())
}

/// Probability that a spin-x measurement on `state` yields `+½`.
pub fn spin_x_plus_probability(state: &StateVector) -> Result<f64> {
    transition_probability(&initial_state_xplus(), state)
}

/// Per-sample transition probabilities from `initial` back onto itself after
/// evolving with each of the given draws.
pub fn probabilities_for_samples(
    initial: &StateVector,
    spec: &NoiseSpec,
    samples: &[NoiseSample],
    t: f64,
) -> Result<Vec<f64>> {
    samples
        .par_iter()
        .map(|s| {
            let evolved = evolve_sample(initial, spec, s, t)?;
            transition_probability(initial, &evolved)
        })
        .collect()
}

/// Expected transition probability estimated over an explicit set of draws.
pub fn estimate_from_samples(
    initial: &StateVector,
    spec: &NoiseSpec,
    samples: &[NoiseSample],
    t: f64,
) -> Result<TransitionEstimate> {
    let probabilities = probabilities_for_samples(initial, spec, samples, t)?;
    TransitionEstimate::from_probabilities(&probabilities, spec.seed)
}

/// Monte-Carlo estimate of `E|⟨ψ_x+|ψ(t)⟩|²` over `m` independent draws.
/// The result is identical for any thread count.
pub fn mc_expected_probability(spec: &NoiseSpec, t: f64, m: usize) -> Result<TransitionEstimate> {
    if m == 0 {
        return Err(Error::NoSamples);
    }
    let samples = sample_noise_batch(spec, m);
    estimate_from_samples(&initial_state_xplus(), spec, &samples, t)
}

/// Monte-Carlo estimate of `E[cos ζ]`, returned as `(mean, stderr)`.
pub fn mc_mean_cos(spec: &NoiseSpec, t: f64, m: usize) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::NoSamples);
    }
    let values: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|k| sample_noise(spec, k).zeta(t).cos())
        .collect();
    Ok(mean_and_stderr(&values))
}

/// Mean of `cos ζ` with `ζ` taken uniform on `[−a, a]`, `a = (ū + d̄)t`:
/// `sin(a)/a`.
pub fn mean_cos_uniform_phase(spec: &NoiseSpec, t: f64) -> f64 {
    sinc((spec.u_mean + spec.d_mean) * t)
}

/// Exact `E[cos ζ]` under the configured noise distribution.
///
/// For independent uniform deviations `ζ` has a trapezoidal density and the
/// expectation factorizes into `sinc(ū t)·sinc(d̄ t)`. Gaussian deviations
/// give `exp(−(ū² + d̄²)t²/2)`.
pub fn mean_cos_exact(spec: &NoiseSpec, t: f64) -> f64 {
    let (u, d) = (spec.u_mean, spec.d_mean);
    match spec.distribution {
        NoiseDistribution::UniformSymmetric => sinc(u * t) * sinc(d * t),
        NoiseDistribution::GaussianSigmaEqualsMean => (-(u * u + d * d) * t * t / 2.0).exp(),
        NoiseDistribution::Noiseless => 1.0,
    }
}

pub fn mean_cos(spec: &NoiseSpec, t: f64, variant: AveragingVariant) -> f64 {
    match variant {
        AveragingVariant::UniformPhase => mean_cos_uniform_phase(spec, t),
        AveragingVariant::ExactConvolution => mean_cos_exact(spec, t),
    }
}

/// `½ + ½·cos((ū − d̄)t)·E[cos ζ]`.
pub fn expected_probability_analytic(spec: &NoiseSpec, t: f64, variant: AveragingVariant) -> f64 {
    0.5 + 0.5 * ((spec.u_mean - spec.d_mean) * t).cos() * mean_cos(spec, t, variant)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenstateRun {
    pub estimate: TransitionEstimate,
    /// Largest `|P − 1|` over all samples.
    pub max_deviation: f64,
}

/// Sends `|↑⟩` through the apparatus `m` times. The noise only contributes a
/// global phase, so every sample returns probability 1.
pub fn eigenstate_run(spec: &NoiseSpec, t: f64, m: usize) -> Result<EigenstateRun> {
    if m == 0 {
        return Err(Error::NoSamples);
    }
    let samples = sample_noise_batch(spec, m);
    let probabilities = probabilities_for_samples(&StateVector::spin_up(), spec, &samples, t)?;
    let max_deviation = probabilities
        .iter()
        .map(|p| (p - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(EigenstateRun {
        estimate: TransitionEstimate::from_probabilities(&probabilities, spec.seed)?,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn uniform(u: f64, d: f64) -> NoiseSpec {
        NoiseSpec::uniform(u, d, 2024).unwrap()
    }

    #[test]
    fn xplus_amplitudes() {
        let s = initial_state_xplus();
        for a in s.amplitudes() {
            assert_eq!(a.re, std::f64::consts::FRAC_1_SQRT_2);
            assert_eq!(a.im, 0.0);
        }
        assert!((s.norm() - 1.0).abs() <= 1e-15);
        let overlap = inner_product(&StateVector::spin_up(), &s).unwrap();
        assert!((overlap.re - FRAC_1_SQRT_2).abs() < 1e-16 && overlap.im == 0.0);
    }

    #[test]
    fn negative_means_rejected() {
        assert!(matches!(
            NoiseSpec::uniform(-1.0, 0.0, 0),
            Err(Error::InvalidNoise(_))
        ));
        assert!(NoiseSpec::uniform(0.0, f64::NAN, 0).is_err());
    }

    #[test]
    fn zero_width_uniform_draws_zero() {
        let spec = uniform(0.0, 3.0);
        for k in 0..100 {
            let s = sample_noise(&spec, k);
            assert_eq!(s.delta_u, 0.0);
            assert!(s.delta_d.abs() <= 3.0);
        }
    }

    #[test]
    fn samples_are_reproducible_per_substream() {
        let spec = uniform(1.0, 2.0);
        assert_eq!(sample_noise(&spec, 17), sample_noise(&spec, 17));
        assert_ne!(sample_noise(&spec, 17), sample_noise(&spec, 18));
        let batch = sample_noise_batch(&spec, 32);
        assert_eq!(batch[17], sample_noise(&spec, 17));
    }

    #[test]
    fn uniform_moments() {
        let spec = uniform(1.0, 1.0);
        let draws: Vec<f64> = sample_noise_batch(&spec, 100_000)
            .iter()
            .map(|s| s.delta_u)
            .collect();
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let sd = (1.0f64 / 3.0).sqrt();
        assert!(mean.abs() <= 3.0 * sd / n.sqrt(), "mean {mean}");
        // Var of the sample variance for U[−1,1] is (μ₄ − σ⁴)/n = (1/5 − 1/9)/n.
        let var_sd = ((0.2 - 1.0 / 9.0) / n).sqrt();
        assert!((var - 1.0 / 3.0).abs() <= 4.0 * var_sd, "var {var}");
        assert!(draws.iter().all(|x| x.abs() <= 1.0));
    }

    #[test]
    fn evolve_sample_examples() {
        let spec = uniform(2.0, 1.0);
        let s = NoiseSample {
            delta_u: 0.5,
            delta_d: -0.25,
        };
        let xplus = initial_state_xplus();
        assert_eq!(evolve_sample(&xplus, &spec, &s, 0.0).unwrap(), xplus);

        let up = evolve_sample(&StateVector::spin_up(), &spec, &s, 4.2).unwrap();
        assert!((up.amplitudes()[0].norm_sqr() - 1.0).abs() <= 1e-15);
        assert_eq!(up.amplitudes()[1].norm_sqr(), 0.0);

        let spec = NoiseSpec::new(PI, 0.0, NoiseDistribution::Noiseless, 0).unwrap();
        let out = evolve_sample(&xplus, &spec, &NoiseSample::ZERO, 1.0).unwrap();
        assert!(transition_probability(&xplus, &out).unwrap() <= 1e-30);

        let wide = StateVector::basis(vec![3], 0).unwrap();
        assert!(matches!(
            evolve_sample(&wide, &spec, &NoiseSample::ZERO, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transition_probability_examples() {
        let up = StateVector::spin_up();
        let down = StateVector::spin_down();
        assert_eq!(transition_probability(&up, &up).unwrap(), 1.0);
        assert_eq!(transition_probability(&up, &down).unwrap(), 0.0);

        let (u, d, du, dd, t) = (2.0, 1.0, 0.5, -0.25, 1.3);
        let spec = uniform(u, d);
        let sample = NoiseSample {
            delta_u: du,
            delta_d: dd,
        };
        let xplus = initial_state_xplus();
        let out = evolve_sample(&xplus, &spec, &sample, t).unwrap();
        let expected = 0.5 + 0.5 * ((u - d + du - dd) * t).cos();
        assert!((transition_probability(&xplus, &out).unwrap() - expected).abs() <= 1e-15);
        assert!((spin_x_plus_probability(&out).unwrap() - expected).abs() <= 1e-15);
    }

    #[test]
    fn no_interaction_gives_certainty() {
        let est = mc_expected_probability(&uniform(0.0, 0.0), 3.0, 1).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn zero_noise_keeps_deterministic_interference() {
        for (u, d, t) in [(2.0, 0.5, 0.7), (1.0, 3.0, -2.0), (PI, 0.0, 1.0)] {
            let spec = NoiseSpec::new(u, d, NoiseDistribution::Noiseless, 5).unwrap();
            let est = mc_expected_probability(&spec, t, 50).unwrap();
            let expected = 0.5 + 0.5 * ((u - d) * t).cos();
            assert!((est.mean - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn estimator_averages_probabilities_not_amplitudes() {
        let spec = NoiseSpec::new(0.0, 0.0, NoiseDistribution::Noiseless, 0).unwrap();
        let t = 1.0;
        let samples = [
            NoiseSample {
                delta_u: PI / 2.0,
                delta_d: 0.0,
            },
            NoiseSample {
                delta_u: -PI / 2.0,
                delta_d: 0.0,
            },
        ];
        let xplus = initial_state_xplus();
        let est = estimate_from_samples(&xplus, &spec, &samples, t).unwrap();

        let mut amplitude_mean = [Amplitude::new(0.0, 0.0); 2];
        let mut probability_mean = 0.0;
        for s in &samples {
            let out = evolve_sample(&xplus, &spec, s, t).unwrap();
            for (acc, a) in amplitude_mean.iter_mut().zip(out.amplitudes()) {
                *acc += a / samples.len() as f64;
            }
            probability_mean += transition_probability(&xplus, &out).unwrap() / 2.0;
        }
        let averaged = StateVector::from_amplitudes(amplitude_mean.to_vec()).unwrap();
        let amplitude_first = transition_probability(&xplus, &averaged).unwrap();

        assert!((est.mean - probability_mean).abs() <= 1e-15);
        assert!((est.mean - 0.5).abs() <= 1e-15);
        assert!((amplitude_first - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn uniform_phase_mean_cos_examples() {
        assert_eq!(mean_cos_uniform_phase(&uniform(0.0, 0.0), 5.0), 1.0);
        assert_eq!(mean_cos_uniform_phase(&uniform(3.0, 4.0), 0.0), 1.0);
        // ∫_{−π}^{π} cos ζ dζ / 2π = 0.
        assert!(mean_cos_uniform_phase(&uniform(PI / 2.0, PI / 2.0), 1.0).abs() <= 1e-15);
        assert!(mean_cos_uniform_phase(&uniform(1000.0, 1000.0), 1.0).abs() <= 5e-4);
    }

    #[test]
    fn exact_mean_cos_examples() {
        assert_eq!(mean_cos_exact(&uniform(3.0, 4.0), 0.0), 1.0);
        assert!(mean_cos_exact(&uniform(PI, 2.0), 1.0).abs() <= 1e-15);
        assert!((mean_cos_exact(&uniform(1.0, 1.0), 1.0) - 0.7080734182735712).abs() <= 1e-15);

        let gauss =
            NoiseSpec::new(0.5, 1.5, NoiseDistribution::GaussianSigmaEqualsMean, 0).unwrap();
        assert!((mean_cos_exact(&gauss, 2.0) - (-5.0f64).exp()).abs() <= 1e-15);
    }

    #[test]
    fn exact_mean_cos_matches_double_integral() {
        // Midpoint rule for E[cos(x − y)], x ~ U[−ū, ū], y ~ U[−d̄, d̄].
        for (u, d, t) in [(1.0, 1.0, 1.0), (0.7, 2.3, 1.4)] {
            let n = 800;
            let (hx, hy) = (2.0 * u / n as f64, 2.0 * d / n as f64);
            let mut acc = 0.0;
            for i in 0..n {
                let x = -u + (i as f64 + 0.5) * hx;
                for j in 0..n {
                    let y = -d + (j as f64 + 0.5) * hy;
                    acc += ((x - y) * t).cos();
                }
            }
            let integral = acc / (n * n) as f64;
            assert!((mean_cos_exact(&uniform(u, d), t) - integral).abs() < 1e-5);
        }
    }

    #[test]
    fn exact_mean_cos_matches_independent_monte_carlo() {
        use rand::SeedableRng;
        let mut rng = rand::rngs::StdRng::seed_from_u64(99);
        let n = 1_000_000;
        let (u, d) = (PI, 2.0);
        let mut acc = 0.0;
        for _ in 0..n {
            let x: f64 = rng.random_range(-u..u);
            let y: f64 = rng.random_range(-d..d);
            acc += (x - y).cos();
        }
        let mc = acc / n as f64;
        // |cos| ≤ 1 so the standard error is below 1/√n.
        assert!((mc - mean_cos_exact(&uniform(u, d), 1.0)).abs() <= 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn analytic_probability_examples() {
        for variant in [
            AveragingVariant::UniformPhase,
            AveragingVariant::ExactConvolution,
        ] {
            assert_eq!(
                expected_probability_analytic(&uniform(5.0, 2.0), 0.0, variant),
                1.0
            );
            let p = expected_probability_analytic(&uniform(1e4, 1e4), 1.0, variant);
            assert!((p - 0.5).abs() <= 1e-4);
        }
        let p = expected_probability_analytic(
            &uniform(1.0, 1.0),
            1.0,
            AveragingVariant::ExactConvolution,
        );
        assert!((p - 0.8540367091367855).abs() <= 1e-15);
    }

    #[test]
    fn variants_agree_at_zero_time_and_decay() {
        for (u, d) in [(1.0, 1.0), (3.0, 0.5), (10.0, 20.0)] {
            let spec = uniform(u, d);
            assert!(
                (mean_cos_uniform_phase(&spec, 0.0) - mean_cos_exact(&spec, 0.0)).abs() <= 1e-12
            );
            for t in [1.0, 2.5, 10.0, 100.0] {
                let a = (u + d) * t;
                if a < 1.0 {
                    continue;
                }
                assert!(mean_cos_uniform_phase(&spec, t).abs() <= 2.0 / a);
                assert!(mean_cos_exact(&spec, t).abs() <= 1.0 / (u.min(d) * t));
            }
        }
    }

    #[test]
    fn mc_matches_exact_convolution() {
        let spec = uniform(1.0, 1.0);
        let est = mc_expected_probability(&spec, 1.0, 100_000).unwrap();
        let exact = expected_probability_analytic(&spec, 1.0, AveragingVariant::ExactConvolution);
        assert!(
            (est.mean - exact).abs() <= 3.0 * est.stderr,
            "{est:?} vs {exact}"
        );
        assert!(est.stderr <= 0.5 / (est.samples as f64).sqrt() + 1e-12);
    }

    #[test]
    fn mc_mean_cos_tracks_exact() {
        let spec = uniform(0.8, 0.3);
        let (mean, stderr) = mc_mean_cos(&spec, 2.0, 50_000).unwrap();
        assert!((mean - mean_cos_exact(&spec, 2.0)).abs() <= 4.0 * stderr);
    }

    #[test]
    fn gaussian_mc_matches_closed_form() {
        let spec =
            NoiseSpec::new(0.6, 0.4, NoiseDistribution::GaussianSigmaEqualsMean, 11).unwrap();
        let est = mc_expected_probability(&spec, 1.5, 50_000).unwrap();
        let exact = expected_probability_analytic(&spec, 1.5, AveragingVariant::ExactConvolution);
        assert!((est.mean - exact).abs() <= 4.0 * est.stderr);
    }

    #[test]
    fn eigenstate_is_immune() {
        for (u, t) in [(3.0, 7.3), (1e6, 13.7), (2.0, 0.0)] {
            let run = eigenstate_run(&uniform(u, 0.5 * u), t, 100).unwrap();
            assert!(run.max_deviation <= 1e-12);
            assert!((run.estimate.mean - 1.0).abs() <= 1e-12);
            assert!(run.estimate.stderr <= 1e-12);
        }
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(matches!(
            mc_expected_probability(&uniform(1.0, 1.0), 1.0, 0),
            Err(Error::NoSamples)
        ));
        assert!(eigenstate_run(&uniform(1.0, 1.0), 1.0, 0).is_err());
    }
}
