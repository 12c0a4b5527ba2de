//! Experiment runners. Each writes `<kind>.csv` and `manifest.json` into the
//! output directory.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use collapse_core::environment::{
    coherence_closed_form, equivalence, exact_probability, mc_configuration_probability,
    DetectorSpectrum,
};
use collapse_core::scaling::{run_scaling, ScalingPlan, ScalingReport};
use collapse_core::stern_gerlach::{
    expected_probability_analytic, mc_expected_probability, mc_mean_cos, mean_cos_exact,
    mean_cos_uniform_phase, AveragingVariant, NoiseDistribution, NoiseSpec,
};
use serde_json::{json, Value};

use crate::config::{
    EnvironmentParams, ExperimentConfig, Params, ScalingParams, SpectrumSource, SternGerlachParams,
    VisibilityParams,
};
use crate::output::{self, Cell, Schema};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Paths of the files a run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutput {
    pub results: PathBuf,
    pub manifest: PathBuf,
}

struct Table {
    schema: Schema,
    rows: Vec<Vec<Cell>>,
    fits: Option<Value>,
}

/// Runs `config` and writes its artifacts into `out_dir`, creating it if
/// needed.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunOutput> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let table = match &config.params {
        Params::SternGerlach(p) => stern_gerlach(config, p)?,
        Params::Visibility(p) => visibility(config, p)?,
        Params::Environment(p) => environment(config, p)?,
        Params::Scaling(p) => scaling(config, p)?,
    };

    let file_name = format!("{}.csv", config.kind.as_str());
    let results = out_dir.join(&file_name);
    output::write_csv(&results, table.schema, &table.rows)?;

    let mut manifest = json!({
        "artifact": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "kind": config.kind.as_str(),
        "seed": config.seed,
        "config": config.to_json(),
        "results": file_name,
        "columns": output::units(table.schema),
        "generated_unix_s": SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    });
    if let Some(fits) = table.fits {
        manifest["fits"] = fits;
    }
    let manifest_path = out_dir.join(MANIFEST_FILE);
    output::write_json(&manifest_path, &manifest)?;
    Ok(RunOutput {
        results,
        manifest: manifest_path,
    })
}

/// Energies are divided by ħ on the way in.
fn noise(
    config: &ExperimentConfig,
    u_mean: f64,
    d_mean: f64,
    distribution: NoiseDistribution,
) -> Result<NoiseSpec> {
    Ok(NoiseSpec::new(
        u_mean / config.hbar,
        d_mean / config.hbar,
        distribution,
        config.seed,
    )?)
}

fn stern_gerlach(config: &ExperimentConfig, p: &SternGerlachParams) -> Result<Table> {
    let spec = noise(config, p.u_mean, p.d_mean, p.distribution)?;
    let mut rows = Vec::with_capacity(p.t_grid.len());
    for &t in &p.t_grid {
        let mc = mc_expected_probability(&spec, t, p.samples)?;
        rows.push(vec![
            p.u_mean.into(),
            p.d_mean.into(),
            t.into(),
            p.samples.into(),
            mc.mean.into(),
            mc.stderr.into(),
            expected_probability_analytic(&spec, t, AveragingVariant::UniformPhase).into(),
            expected_probability_analytic(&spec, t, AveragingVariant::ExactConvolution).into(),
        ]);
    }
    Ok(Table {
        schema: output::STERN_GERLACH,
        rows,
        fits: None,
    })
}

fn visibility(config: &ExperimentConfig, p: &VisibilityParams) -> Result<Table> {
    let spec = noise(config, p.u_mean, p.d_mean, p.distribution)?;
    let mut rows = Vec::with_capacity(p.a_grid.len());
    for &a in &p.a_grid {
        // a = (ū + d̄)t/ħ
        let t = a * config.hbar / (p.u_mean + p.d_mean);
        let (mc_mean, mc_stderr) = mc_mean_cos(&spec, t, p.samples)?;
        rows.push(vec![
            a.into(),
            p.u_mean.into(),
            p.d_mean.into(),
            t.into(),
            mean_cos_uniform_phase(&spec, t).into(),
            mean_cos_exact(&spec, t).into(),
            mc_mean.into(),
            mc_stderr.into(),
        ]);
    }
    Ok(Table {
        schema: output::VISIBILITY,
        rows,
        fits: None,
    })
}

fn environment(config: &ExperimentConfig, p: &EnvironmentParams) -> Result<Table> {
    let mut rows = Vec::with_capacity(p.t_grid.len());
    match &p.source {
        SpectrumSource::Sampled {
            u_mean,
            d_mean,
            distribution,
        } => {
            let spec = noise(config, *u_mean, *d_mean, *distribution)?;
            for &t in &p.t_grid {
                let eq = equivalence(&spec, t, p.samples)?;
                rows.push(vec![
                    p.samples.into(),
                    t.into(),
                    eq.exact_probability.into(),
                    eq.mc_probability.into(),
                    eq.deviation.into(),
                    eq.coherence.into(),
                ]);
            }
        }
        SpectrumSource::Explicit(file) => {
            let scale = |xs: &[f64]| xs.iter().map(|x| x / config.hbar).collect::<Vec<_>>();
            let u = scale(&file.u_energies);
            let d = scale(&file.d_energies);
            let spectrum = match &file.weights {
                Some(w) => DetectorSpectrum::new(u, d, w.clone())?,
                None => DetectorSpectrum::uniform(u, d)?,
            };
            for &t in &p.t_grid {
                let exact = exact_probability(&spectrum, t)?;
                let mc = mc_configuration_probability(&spectrum, t, p.samples, config.seed)?;
                rows.push(vec![
                    spectrum.len().into(),
                    t.into(),
                    exact.into(),
                    mc.mean.into(),
                    (exact - mc.mean).abs().into(),
                    coherence_closed_form(&spectrum, t)?.into(),
                ]);
            }
        }
    }
    Ok(Table {
        schema: output::ENVIRONMENT,
        rows,
        fits: None,
    })
}

/// Sweep plan for a scaling config.
pub fn scaling_plan(config: &ExperimentConfig, p: &ScalingParams) -> ScalingPlan {
    ScalingPlan {
        spins: (p.n_min..=p.n_max).collect(),
        backends: p.backends.clone(),
        product_sizes: p.product_sizes.clone(),
        coupling: p.coupling,
        t: p.t,
        repeats: p.repeats,
        seed: config.seed,
        hbar: config.hbar,
    }
}

fn scaling(config: &ExperimentConfig, p: &ScalingParams) -> Result<Table> {
    let report: ScalingReport = run_scaling(&scaling_plan(config, p))?;
    let rows = report
        .summary()
        .into_iter()
        .map(|r| {
            vec![
                r.n_spins.into(),
                Cell::Text(r.dim.to_string()),
                Cell::Text(r.param_count.to_string()),
                Cell::Text(r.backend.as_str().to_string()),
                r.matvec_count.into(),
                r.wall_time.into(),
                r.peak_state_bytes.into(),
            ]
        })
        .collect();
    Ok(Table {
        schema: output::SCALING,
        rows,
        fits: Some(serde_json::to_value(&report.fits)?),
    })
}
