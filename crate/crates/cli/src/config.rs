//! Experiment configuration: JSON text in, validated [`ExperimentConfig`] out.
//!
//! Validation does not stop at the first problem. Every violated invariant is
//! reported with the path of the offending field.

use std::fmt;

use collapse_core::scaling::{ExactBackend, MAX_DENSE_SPINS, MAX_SPARSE_SPINS};
use collapse_core::NoiseDistribution;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SternGerlach,
    Environment,
    #[serde(rename = "visibility")]
    VisibilityCurve,
    Scaling,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::SternGerlach => "stern_gerlach",
            ExperimentKind::Environment => "environment",
            ExperimentKind::VisibilityCurve => "visibility",
            ExperimentKind::Scaling => "scaling",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            ExperimentKind::SternGerlach,
            ExperimentKind::Environment,
            ExperimentKind::VisibilityCurve,
            ExperimentKind::Scaling,
        ]
        .into_iter()
        .find(|k| k.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub hbar: f64,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Params {
    SternGerlach(SternGerlachParams),
    Visibility(VisibilityParams),
    Environment(EnvironmentParams),
    Scaling(ScalingParams),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SternGerlachParams {
    pub u_mean: f64,
    pub d_mean: f64,
    pub t_grid: Vec<f64>,
    pub samples: usize,
    pub distribution: NoiseDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityParams {
    pub u_mean: f64,
    pub d_mean: f64,
    pub a_grid: Vec<f64>,
    pub samples: usize,
    pub distribution: NoiseDistribution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvironmentParams {
    pub t_grid: Vec<f64>,
    pub samples: usize,
    pub source: SpectrumSource,
}

/// Where the detector configurations come from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    /// One configuration per noise draw, `K = samples`.
    Sampled {
        u_mean: f64,
        d_mean: f64,
        distribution: NoiseDistribution,
    },
    /// Explicit configurations, inline or loaded from a JSON file.
    Explicit(SpectrumFile),
}

/// On-disk and inline spectrum layout. `weights` defaults to uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub u_energies: Vec<f64>,
    pub d_energies: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingParams {
    pub n_min: usize,
    pub n_max: usize,
    pub backends: Vec<ExactBackend>,
    pub product_sizes: Vec<usize>,
    pub coupling: f64,
    pub t: f64,
    pub repeats: usize,
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid config:\n{}", format_violations(.0))]
    Validation(Vec<Violation>),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("  - {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl ConfigError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ConfigError::Validation(v) => v,
            ConfigError::Parse(_) => &[],
        }
    }
}

/// Parses a config whose `kind` field is mandatory.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_as(text, None)
}

/// Parses a config, taking `kind` from `expected` when the text omits it. A
/// text `kind` that disagrees with `expected` is a violation.
pub fn parse_config_as(
    text: &str,
    expected: Option<ExperimentKind>,
) -> Result<ExperimentConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let Value::Object(root) = value else {
        return Err(ConfigError::Parse("top level must be a JSON object".into()));
    };
    let mut v = Validator::default();
    let root = Obj::new(&root, "");

    let kind = match root.get("kind") {
        None => match expected {
            Some(k) => Some(k),
            None => {
                v.push("kind", "is required");
                None
            }
        },
        Some(Value::String(s)) => match ExperimentKind::parse(s) {
            Some(k) => {
                if let Some(e) = expected.filter(|e| *e != k) {
                    v.push(
                        "kind",
                        format!(
                            "config is \"{}\" but \"{}\" was requested",
                            k.as_str(),
                            e.as_str()
                        ),
                    );
                }
                Some(k)
            }
            None => {
                v.push("kind", format!("unknown experiment kind \"{s}\""));
                None
            }
        },
        Some(_) => {
            v.push("kind", "must be a string");
            None
        }
    };
    v.unknown_keys(&root, &["kind", "seed", "hbar", "params"]);
    let seed = v.u64(&root, "seed").unwrap_or(0);
    let hbar = v.f64(&root, "hbar").unwrap_or(1.0);
    if !(hbar.is_finite() && hbar > 0.0) {
        v.push("hbar", "must be finite and > 0");
    }

    let empty = Map::new();
    let params_map = match root.get("params") {
        Some(Value::Object(m)) => m,
        Some(_) => {
            v.push("params", "must be an object");
            &empty
        }
        None => &empty,
    };
    let params = Obj::new(params_map, "params");
    let params = kind.and_then(|k| match k {
        ExperimentKind::SternGerlach => stern_gerlach(&mut v, &params).map(Params::SternGerlach),
        ExperimentKind::VisibilityCurve => visibility(&mut v, &params).map(Params::Visibility),
        ExperimentKind::Environment => environment(&mut v, &params).map(Params::Environment),
        ExperimentKind::Scaling => scaling(&mut v, &params).map(Params::Scaling),
    });

    match (kind, params) {
        (Some(kind), Some(params)) if v.errors.is_empty() => Ok(ExperimentConfig {
            kind,
            seed,
            hbar,
            params,
        }),
        _ => Err(ConfigError::Validation(v.errors)),
    }
}

impl ExperimentConfig {
    /// Canonical JSON echo; parsing it back yields an equal config.
    pub fn to_json(&self) -> Value {
        let mut params = serde_json::to_value(&self.params).expect("params serialize");
        if let (Params::Environment(env), Value::Object(map)) = (&self.params, &mut params) {
            map.remove("source");
            match &env.source {
                SpectrumSource::Sampled {
                    u_mean,
                    d_mean,
                    distribution,
                } => {
                    map.insert("u_mean".into(), (*u_mean).into());
                    map.insert("d_mean".into(), (*d_mean).into());
                    map.insert(
                        "distribution".into(),
                        serde_json::to_value(distribution).unwrap(),
                    );
                }
                SpectrumSource::Explicit(file) => {
                    map.insert("spectrum".into(), serde_json::to_value(file).unwrap());
                }
            }
        }
        serde_json::json!({
            "kind": self.kind.as_str(),
            "seed": self.seed,
            "hbar": self.hbar,
            "params": params,
        })
    }
}

struct Obj<'a> {
    map: &'a Map<String, Value>,
    path: String,
}

impl<'a> Obj<'a> {
    fn new(map: &'a Map<String, Value>, path: &str) -> Self {
        Self {
            map,
            path: path.to_string(),
        }
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key)
    }

    fn path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }
}

#[derive(Default)]
struct Validator {
    errors: Vec<Violation>,
}

impl Validator {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.errors.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    fn unknown_keys(&mut self, obj: &Obj, allowed: &[&str]) {
        for key in obj.map.keys() {
            if !allowed.contains(&key.as_str()) {
                self.push(obj.path(key), "unknown field");
            }
        }
    }

    fn require<T>(&mut self, obj: &Obj, key: &str, value: Option<T>) -> Option<T> {
        if value.is_none() && obj.get(key).is_none() {
            self.push(obj.path(key), "is required");
        }
        value
    }

    fn f64(&mut self, obj: &Obj, key: &str) -> Option<f64> {
        match obj.get(key)? {
            Value::Number(n) => n.as_f64(),
            _ => {
                self.push(obj.path(key), "must be a number");
                None
            }
        }
    }

    fn u64(&mut self, obj: &Obj, key: &str) -> Option<u64> {
        match obj.get(key)? {
            Value::Number(n) if n.as_u64().is_some() => n.as_u64(),
            _ => {
                self.push(obj.path(key), "must be a non-negative integer");
                None
            }
        }
    }

    fn usize(&mut self, obj: &Obj, key: &str) -> Option<usize> {
        self.u64(obj, key).map(|x| x as usize)
    }

    fn f64_list(&mut self, obj: &Obj, key: &str) -> Option<Vec<f64>> {
        let path = obj.path(key);
        match obj.get(key)? {
            Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    match item.as_f64() {
                        Some(x) => out.push(x),
                        None => self.push(format!("{path}[{i}]"), "must be a number"),
                    }
                }
                (out.len() == items.len()).then_some(out)
            }
            _ => {
                self.push(path, "must be an array of numbers");
                None
            }
        }
    }

    fn usize_list(&mut self, obj: &Obj, key: &str) -> Option<Vec<usize>> {
        let path = obj.path(key);
        match obj.get(key)? {
            Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, item) in items.iter().enumerate() {
                    match item.as_u64() {
                        Some(x) => out.push(x as usize),
                        None => self.push(format!("{path}[{i}]"), "must be a non-negative integer"),
                    }
                }
                (out.len() == items.len()).then_some(out)
            }
            _ => {
                self.push(path, "must be an array of integers");
                None
            }
        }
    }

    fn enum_value<T: for<'de> Deserialize<'de>>(&mut self, obj: &Obj, key: &str) -> Option<T> {
        let raw = obj.get(key)?;
        match serde_json::from_value(raw.clone()) {
            Ok(x) => Some(x),
            Err(_) => {
                self.push(obj.path(key), format!("unrecognized value {raw}"));
                None
            }
        }
    }

    fn energy(&mut self, obj: &Obj, key: &str) -> Option<f64> {
        let x = self.f64(obj, key);
        let x = self.require(obj, key, x)?;
        if !(x.is_finite() && x >= 0.0) {
            self.push(obj.path(key), "must be finite and >= 0");
        }
        Some(x)
    }

    fn samples(&mut self, obj: &Obj) -> Option<usize> {
        let m = self.usize(obj, "samples");
        let m = self.require(obj, "samples", m)?;
        if m == 0 {
            self.push(obj.path("samples"), "must be at least 1");
        }
        Some(m)
    }

    fn grid(&mut self, obj: &Obj, key: &str) -> Option<Vec<f64>> {
        let grid = self.f64_list(obj, key)?;
        let path = obj.path(key);
        if grid.is_empty() {
            self.push(&path, "must not be empty");
        }
        if grid.iter().any(|x| !x.is_finite()) {
            self.push(&path, "values must be finite");
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            self.push(&path, "must be strictly increasing");
        }
        Some(grid)
    }

    /// Accepts either a scalar `t` or a `t_grid`.
    fn times(&mut self, obj: &Obj) -> Option<Vec<f64>> {
        match (obj.get("t"), obj.get("t_grid")) {
            (Some(_), Some(_)) => {
                self.push(obj.path("t"), "give either t or t_grid, not both");
                None
            }
            (Some(_), None) => {
                let t = self.f64(obj, "t")?;
                if !t.is_finite() {
                    self.push(obj.path("t"), "must be finite");
                }
                Some(vec![t])
            }
            (None, Some(_)) => self.grid(obj, "t_grid"),
            (None, None) => {
                self.push(obj.path("t_grid"), "is required (or give t)");
                None
            }
        }
    }

    fn distribution(&mut self, obj: &Obj) -> NoiseDistribution {
        self.enum_value(obj, "distribution").unwrap_or_default()
    }
}

fn stern_gerlach(v: &mut Validator, p: &Obj) -> Option<SternGerlachParams> {
    v.unknown_keys(
        p,
        &["u_mean", "d_mean", "t", "t_grid", "samples", "distribution"],
    );
    let u_mean = v.energy(p, "u_mean");
    let d_mean = v.energy(p, "d_mean");
    let t_grid = v.times(p);
    let samples = v.samples(p);
    let distribution = v.distribution(p);
    Some(SternGerlachParams {
        u_mean: u_mean?,
        d_mean: d_mean?,
        t_grid: t_grid?,
        samples: samples?,
        distribution,
    })
}

fn visibility(v: &mut Validator, p: &Obj) -> Option<VisibilityParams> {
    v.unknown_keys(
        p,
        &["u_mean", "d_mean", "a_grid", "samples", "distribution"],
    );
    let u_mean = v.energy(p, "u_mean");
    let d_mean = v.energy(p, "d_mean");
    if let (Some(u), Some(d)) = (u_mean, d_mean) {
        if u + d <= 0.0 {
            v.push(
                p.path("u_mean"),
                "u_mean + d_mean must be > 0 to map a onto t",
            );
        }
    }
    let a_grid = v.grid(p, "a_grid");
    let a_grid = v.require(p, "a_grid", a_grid);
    let samples = v.samples(p);
    let distribution = v.distribution(p);
    Some(VisibilityParams {
        u_mean: u_mean?,
        d_mean: d_mean?,
        a_grid: a_grid?,
        samples: samples?,
        distribution,
    })
}

fn environment(v: &mut Validator, p: &Obj) -> Option<EnvironmentParams> {
    v.unknown_keys(
        p,
        &[
            "t",
            "t_grid",
            "samples",
            "spectrum",
            "u_mean",
            "d_mean",
            "distribution",
        ],
    );
    let t_grid = v.times(p);
    let samples = v.samples(p);
    let source = match p.get("spectrum") {
        Some(spec) => {
            for key in ["u_mean", "d_mean", "distribution"] {
                if p.get(key).is_some() {
                    v.push(p.path(key), "not allowed together with spectrum");
                }
            }
            match spec {
                Value::Object(_) => match serde_json::from_value::<SpectrumFile>(spec.clone()) {
                    Ok(file) => Some(SpectrumSource::Explicit(file)),
                    Err(e) => {
                        v.push(p.path("spectrum"), e.to_string());
                        None
                    }
                },
                _ => {
                    v.push(
                        p.path("spectrum"),
                        "must be an object (spectrum files are resolved by the CLI)",
                    );
                    None
                }
            }
        }
        None => {
            let u_mean = v.energy(p, "u_mean");
            let d_mean = v.energy(p, "d_mean");
            let distribution = v.distribution(p);
            Some(SpectrumSource::Sampled {
                u_mean: u_mean?,
                d_mean: d_mean?,
                distribution,
            })
        }
    };
    Some(EnvironmentParams {
        t_grid: t_grid?,
        samples: samples?,
        source: source?,
    })
}

fn scaling(v: &mut Validator, p: &Obj) -> Option<ScalingParams> {
    v.unknown_keys(
        p,
        &[
            "n_min",
            "n_max",
            "backends",
            "product_sizes",
            "coupling",
            "t",
            "repeats",
        ],
    );
    let n_min = v.usize(p, "n_min");
    let n_min = v.require(p, "n_min", n_min);
    let n_max = v.usize(p, "n_max");
    let n_max = v.require(p, "n_max", n_max);
    let backends: Vec<ExactBackend> = match p.get("backends") {
        Some(_) => v.enum_value(p, "backends").unwrap_or_default(),
        None => vec![ExactBackend::SparseStep],
    };
    let product_sizes = match p.get("product_sizes") {
        Some(_) => v.usize_list(p, "product_sizes").unwrap_or_default(),
        None => (4..=14).map(|k| 1usize << k).collect(),
    };
    let coupling = v.f64(p, "coupling").unwrap_or(1.0);
    let t = v.f64(p, "t").unwrap_or(0.2);
    let repeats = v.usize(p, "repeats").unwrap_or(3);

    if let (Some(lo), Some(hi)) = (n_min, n_max) {
        if lo == 0 {
            v.push(p.path("n_min"), "must be at least 1");
        }
        if lo > hi {
            v.push(p.path("n_max"), "must be >= n_min");
        }
        if hi > MAX_SPARSE_SPINS {
            v.push(p.path("n_max"), format!("must be <= {MAX_SPARSE_SPINS}"));
        }
        if backends.contains(&ExactBackend::DenseExpm) && hi > MAX_DENSE_SPINS {
            v.push(
                p.path("n_max"),
                format!("must be <= {MAX_DENSE_SPINS} with the DenseExpm backend"),
            );
        }
    }
    if product_sizes.contains(&0) {
        v.push(p.path("product_sizes"), "sizes must be at least 1");
    }
    if !coupling.is_finite() {
        v.push(p.path("coupling"), "must be finite");
    }
    if !t.is_finite() {
        v.push(p.path("t"), "must be finite");
    }
    if repeats == 0 {
        v.push(p.path("repeats"), "must be at least 1");
    }
    Some(ScalingParams {
        n_min: n_min?,
        n_max: n_max?,
        backends,
        product_sizes,
        coupling,
        t,
        repeats,
    })
}
