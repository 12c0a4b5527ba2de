use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::evolve::{
    evolve_exact, evolve_exact_with_steps, evolve_product, rk4_steps, ProductState,
};
use super::{Backend, ExactBackend, ScalingRecord, SpinChainSpec};
use crate::error::{Error, Result};
use crate::qcore::StateVector;
use crate::stats::{least_squares_slope, median};

/// A timing sweep. Interacting chains use `coupling` and every size in
/// `spins`; uncoupled chains use every size in `product_sizes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPlan {
    pub spins: Vec<usize>,
    pub backends: Vec<ExactBackend>,
    pub product_sizes: Vec<usize>,
    pub coupling: f64,
    pub t: f64,
    pub repeats: usize,
    pub seed: u64,
    pub hbar: f64,
}

impl Default for ScalingPlan {
    fn default() -> Self {
        Self {
            spins: (10..=16).collect(),
            backends: vec![ExactBackend::SparseStep],
            product_sizes: (4..=14).map(|k| 1usize << k).collect(),
            coupling: 1.0,
            t: 0.2,
            repeats: 3,
            seed: 0,
            hbar: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitKind {
    /// Slope of `log₂(time)` against `N`.
    Exponential,
    /// Slope of `log₂(time)` against `log₂(N)`.
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub backend: Backend,
    pub kind: FitKind,
    pub slope: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    /// One record per `(N, backend, repeat)`; warm-up runs are not included.
    pub records: Vec<ScalingRecord>,
    pub fits: Vec<SlopeFit>,
}

impl ScalingReport {
    /// One record per `(backend, N)` carrying the median wall time.
    pub fn summary(&self) -> Vec<ScalingRecord> {
        let mut groups: BTreeMap<(Backend, usize), Vec<&ScalingRecord>> = BTreeMap::new();
        for r in &self.records {
            groups.entry((r.backend, r.n_spins)).or_default().push(r);
        }
        groups
            .into_values()
            .map(|group| {
                let times: Vec<f64> = group.iter().map(|r| r.wall_time).collect();
                ScalingRecord {
                    wall_time: median(&times),
                    ..group[0].clone()
                }
            })
            .collect()
    }

    pub fn fit(&self, backend: Backend) -> Option<&SlopeFit> {
        self.fits.iter().find(|f| f.backend == backend)
    }
}

fn timed<F>(repeats: usize, mut run: F) -> Result<Vec<ScalingRecord>>
where
    F: FnMut() -> Result<ScalingRecord>,
{
    run()?;
    (0..repeats).map(|_| run()).collect()
}

/// Runs the sweep single-threaded and fits growth rates per backend.
pub fn run_scaling(plan: &ScalingPlan) -> Result<ScalingReport> {
    if plan.repeats == 0 {
        return Err(Error::NoSamples);
    }
    let chain = |n: usize, coupling: f64| -> Result<SpinChainSpec> {
        Ok(SpinChainSpec::with_random_fields(n, coupling, plan.seed)?.rescaled(plan.hbar))
    };

    let mut records = Vec::new();
    for &backend in &plan.backends {
        // One step count for the whole sweep, sized for the largest chain, so
        // the work per spin added is exactly one doubling of the vector.
        let sweep_steps = match backend {
            ExactBackend::SparseStep => {
                let mut bound: f64 = 0.0;
                for &n in &plan.spins {
                    bound = bound.max(chain(n, plan.coupling)?.norm_bound());
                }
                Some(rk4_steps(bound, plan.t))
            }
            ExactBackend::DenseExpm => None,
        };
        for &n in &plan.spins {
            let spec = chain(n, plan.coupling)?;
            let init = StateVector::basis(vec![2; n], 0)?;
            let runs = timed(plan.repeats, || {
                let (_, rec) = match sweep_steps {
                    Some(steps) => evolve_exact_with_steps(&spec, plan.t, &init, steps)?,
                    None => evolve_exact(&spec, plan.t, &init, backend)?,
                };
                Ok(rec)
            })?;
            records.extend(runs);
        }
    }
    for &n in &plan.product_sizes {
        let spec = chain(n, 0.0)?;
        let init = ProductState::all_up(n);
        let runs = timed(plan.repeats, || Ok(evolve_product(&spec, plan.t, &init)?.1))?;
        records.extend(runs);
    }

    let mut report = ScalingReport {
        records,
        fits: Vec::new(),
    };
    report.fits = fit_all(&report.summary());
    Ok(report)
}

fn fit_all(summary: &[ScalingRecord]) -> Vec<SlopeFit> {
    let mut by_backend: BTreeMap<Backend, Vec<&ScalingRecord>> = BTreeMap::new();
    for r in summary {
        by_backend.entry(r.backend).or_default().push(r);
    }
    by_backend
        .into_iter()
        .filter(|(_, rs)| rs.len() >= 2)
        .map(|(backend, rs)| {
            let kind = match backend {
                Backend::ProductExact => FitKind::Polynomial,
                _ => FitKind::Exponential,
            };
            let xs: Vec<f64> = rs
                .iter()
                .map(|r| match kind {
                    FitKind::Exponential => r.n_spins as f64,
                    FitKind::Polynomial => (r.n_spins as f64).log2(),
                })
                .collect();
            // Guard against a zero reading from a coarse clock.
            let ys: Vec<f64> = rs.iter().map(|r| r.wall_time.max(1e-9).log2()).collect();
            SlopeFit {
                backend,
                kind,
                slope: least_squares_slope(&xs, &ys),
                points: rs.len(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_shapes() {
        let plan = ScalingPlan {
            spins: vec![3, 4, 5],
            backends: vec![ExactBackend::SparseStep, ExactBackend::DenseExpm],
            product_sizes: vec![4, 8],
            repeats: 2,
            seed: 4,
            ..ScalingPlan::default()
        };
        let report = run_scaling(&plan).unwrap();
        assert_eq!(report.records.len(), (3 * 2 + 2) * 2);
        let summary = report.summary();
        assert_eq!(summary.len(), 8);
        for r in &summary {
            assert_eq!(r.dim, super::super::hilbert_dim(r.n_spins).0);
        }
        let sparse: Vec<_> = summary
            .iter()
            .filter(|r| r.backend == Backend::SparseStep)
            .collect();
        for pair in sparse.windows(2) {
            assert_eq!(pair[1].matvec_count, 2 * pair[0].matvec_count);
            assert_eq!(pair[1].peak_state_bytes, 2 * pair[0].peak_state_bytes);
        }
        assert_eq!(report.fits.len(), 3);
        assert_eq!(
            report.fit(Backend::ProductExact).unwrap().kind,
            FitKind::Polynomial
        );
    }

    #[test]
    fn zero_repeats_rejected() {
        let plan = ScalingPlan {
            repeats: 0,
            ..ScalingPlan::default()
        };
        assert!(run_scaling(&plan).is_err());
    }

    #[test]
    fn dense_cap_propagates() {
        let plan = ScalingPlan {
            spins: vec![13],
            backends: vec![ExactBackend::DenseExpm],
            product_sizes: vec![],
            repeats: 1,
            ..ScalingPlan::default()
        };
        assert!(matches!(run_scaling(&plan), Err(Error::TooLarge { .. })));
    }
}
