use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use singstrat::examples::{self, ComplexMonomial, Monomial, DOMAIN_RADIUS};
use singstrat::fields::{Grid, ScalarField};
use singstrat::geometry::{Ball, PlaneFrame};
use singstrat::quadrature::QuadratureSpec;

use crate::CliError;

/// Keys accepted in each config section, also accepted as `--key value` flags.
pub const SECTIONS: [(&str, &[&str]); 4] = [
    (
        "field",
        &[
            "example",
            "n",
            "p",
            "theta",
            "center",
            "centers",
            "weights",
            "axes",
            "value",
            "poly",
            "harmonic",
            "weight",
            "grid_file",
            "resolution",
            "grid_radius",
        ],
    ),
    (
        "analysis",
        &[
            "x",
            "points",
            "radii",
            "ladder_max",
            "ladder_ratio",
            "ladder_count",
            "eta",
            "k",
            "r",
            "c",
            "search_radius",
            "grid_step",
            "coarse_levels",
            "threshold_tol",
            "monotone_tol",
            "screen",
            "gamma",
            "j_max",
            "epsilon",
            "family",
            "samples",
            "normalize",
            "normalize_step",
            "criteria",
            "budget",
            "step_fraction",
            "cells_per_radius",
            "candidate_step",
        ],
    ),
    ("quadrature", &["preset", "sphere_nodes", "shells", "ball_sphere_nodes", "max_candidates", "seed"]),
    ("output", &["json", "csv", "pretty"]),
];

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub field: FieldConfig,
    pub analysis: AnalysisConfig,
    pub quadrature: QuadratureConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub example: String,
    pub n: usize,
    pub p: f64,
    pub theta: f64,
    pub center: Option<Vec<f64>>,
    pub centers: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub axes: Vec<usize>,
    pub value: f64,
    pub poly: Vec<ComplexMonomial>,
    pub harmonic: Vec<Monomial>,
    pub weight: f64,
    pub grid_file: Option<String>,
    pub resolution: Option<usize>,
    pub grid_radius: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            example: "kernel_pair".into(),
            n: 3,
            p: 3.0,
            theta: 1.0,
            center: None,
            centers: Vec::new(),
            weights: Vec::new(),
            axes: Vec::new(),
            value: 0.0,
            poly: Vec::new(),
            harmonic: Vec::new(),
            weight: 1.0,
            grid_file: None,
            resolution: None,
            grid_radius: 1.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub x: Option<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub ladder_max: f64,
    pub ladder_ratio: f64,
    pub ladder_count: usize,
    pub eta: f64,
    pub k: usize,
    pub r: f64,
    pub c: f64,
    pub search_radius: f64,
    pub grid_step: Option<f64>,
    pub coarse_levels: Option<usize>,
    pub threshold_tol: f64,
    pub monotone_tol: f64,
    pub screen: f64,
    pub gamma: f64,
    pub j_max: usize,
    pub epsilon: Option<f64>,
    pub family: String,
    pub samples: usize,
    pub normalize: bool,
    pub normalize_step: f64,
    pub criteria: Vec<u8>,
    pub budget: String,
    pub step_fraction: f64,
    pub cells_per_radius: f64,
    pub candidate_step: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            x: None,
            points: Vec::new(),
            radii: Vec::new(),
            ladder_max: 0.4,
            ladder_ratio: 0.5,
            ladder_count: 5,
            eta: 0.5,
            k: 0,
            r: 0.1,
            c: 1.0,
            search_radius: 1.0,
            grid_step: None,
            coarse_levels: None,
            threshold_tol: 0.05,
            monotone_tol: 2e-3,
            screen: 0.5,
            gamma: 0.25,
            j_max: 3,
            epsilon: None,
            family: "full".into(),
            samples: 64,
            normalize: false,
            normalize_step: 0.5,
            criteria: Vec::new(),
            budget: "sweep".into(),
            step_fraction: 0.5,
            cells_per_radius: 4.0,
            candidate_step: 2.0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub preset: Option<String>,
    pub sphere_nodes: Option<usize>,
    pub shells: Option<usize>,
    pub ball_sphere_nodes: Option<usize>,
    pub max_candidates: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub json: Option<String>,
    pub csv: Option<String>,
    pub pretty: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { json: None, csv: None, pretty: true }
    }
}

pub const DEFAULT_SEED: u64 = 0x5EED;

impl QuadratureConfig {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    fn is_set(&self) -> bool {
        self.preset.is_some()
            || self.sphere_nodes.is_some()
            || self.shells.is_some()
            || self.ball_sphere_nodes.is_some()
            || self.max_candidates.is_some()
    }

    /// The configured rule, or `fallback` when no resolution key is set.
    pub fn resolve(&self, fallback: QuadratureSpec) -> Result<QuadratureSpec, CliError> {
        if !self.is_set() {
            let seed = self.seed.unwrap_or(fallback.seed);
            return Ok(fallback.with_seed(seed));
        }
        let seed = self.seed();
        let mut q = match self.preset.as_deref() {
            None => fallback.with_seed(seed),
            Some("default") => QuadratureSpec::default().with_seed(seed),
            Some("coarse") => QuadratureSpec::coarse(seed),
            Some(other) => return Err(CliError::Usage(format!("unknown quadrature preset `{other}`"))),
        };
        if let Some(v) = self.sphere_nodes {
            q.sphere_nodes = v;
        }
        if let Some(v) = self.shells {
            q.shells = v;
        }
        if let Some(v) = self.ball_sphere_nodes {
            q.ball_sphere_nodes = v;
        }
        if let Some(v) = self.max_candidates {
            q.max_candidates = v;
        }
        Ok(q)
    }
}

fn section_of(key: &str) -> Option<&'static str> {
    SECTIONS.iter().find(|(_, keys)| keys.contains(&key)).map(|(s, _)| *s)
}

fn parse_toml(raw: &str) -> Option<toml::Value> {
    format!("v = {raw}").parse::<toml::Table>().ok()?.remove("v")
}

/// Parses a flag value as TOML; a bare comma list becomes an array, anything else a string.
fn parse_value(raw: &str) -> toml::Value {
    parse_toml(raw)
        .or_else(|| raw.contains(',').then(|| parse_toml(&format!("[{raw}]"))).flatten())
        .unwrap_or_else(|| toml::Value::String(raw.into()))
}

/// Splits `--key value` and `--key=value` pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String, toml::Value)>, CliError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let flag =
            args[i].strip_prefix("--").ok_or_else(|| CliError::Usage(format!("expected `--key value`, found `{}`", args[i])))?;
        let (key, raw) = match flag.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                i += 1;
                let v = args.get(i).ok_or_else(|| CliError::Usage(format!("flag `--{flag}` needs a value")))?;
                (flag.to_string(), v.clone())
            }
        };
        let (section, name) = match key.split_once('.') {
            Some((s, k)) if SECTIONS.iter().any(|(sec, keys)| *sec == s && keys.contains(&k)) => (s.to_string(), k.to_string()),
            Some(_) => return Err(CliError::Usage(format!("unknown key `{key}`"))),
            None => {
                let name = key.replace('-', "_");
                match section_of(&name) {
                    Some(s) => (s.to_string(), name),
                    None => return Err(CliError::Usage(format!("unknown key `{key}`"))),
                }
            }
        };
        out.push((section, name, parse_value(&raw)));
        i += 1;
    }
    Ok(out)
}

/// Reads the config file, applies flag overrides and deserializes the result.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config, CliError> {
    let mut table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))?;
            text.parse::<toml::Table>().map_err(|e| CliError::Usage(format!("malformed config {}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for (section, key, value) in parse_overrides(overrides)? {
        let entry = table.entry(section.clone()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry {
            toml::Value::Table(t) => {
                t.insert(key, value);
            }
            _ => return Err(CliError::Usage(format!("`{section}` must be a table"))),
        }
    }
    // Round-trip through JSON so integers are accepted where floats are expected.
    let json = serde_json::to_value(&table).map_err(|e| CliError::Usage(e.to_string()))?;
    serde_json::from_value(json).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
}

/// SHA-256 of the canonical JSON of every section except `output`.
pub fn config_hash(cfg: &Config) -> String {
    let canonical = serde_json::to_string(&hashed_view(cfg)).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn hashed_view(cfg: &Config) -> serde_json::Value {
    serde_json::json!({ "field": cfg.field, "analysis": cfg.analysis, "quadrature": cfg.quadrature })
}

pub fn build_field(cfg: &FieldConfig) -> Result<ScalarField, CliError> {
    let n = cfg.n;
    let origin = vec![0.0; n];
    let frame = |axes: &[usize]| -> Result<PlaneFrame, CliError> {
        if axes.iter().any(|&a| a >= n) {
            return Err(CliError::Usage(format!("axes must be below n = {n}")));
        }
        Ok(PlaneFrame::coordinate(n, axes))
    };
    let u = match cfg.example.as_str() {
        "radial_kernel" => examples::radial_kernel(n, cfg.p, cfg.theta, cfg.center.as_deref().unwrap_or(&origin))?,
        "riesz_sum" => {
            let weights = if cfg.weights.is_empty() { vec![1.0; cfg.centers.len()] } else { cfg.weights.clone() };
            examples::riesz_sum(&cfg.centers, &weights, cfg.p, n)?
        }
        "kernel_pair" => examples::kernel_pair(n, cfg.p)?,
        "plane_kernel" => examples::plane_kernel(&frame(&cfg.axes)?, cfg.p)?,
        "cone_field" => examples::invariant_cone_field(n, cfg.p, &frame(&cfg.axes)?)?,
        "log_modulus" => {
            if !n.is_multiple_of(2) {
                return Err(CliError::Usage("log_modulus needs an even dimension".into()));
            }
            examples::log_modulus(&cfg.poly, n / 2)?
        }
        "harmonic_plus_kernel" => {
            examples::harmonic_plus_kernel(&cfg.harmonic, cfg.center.as_deref().unwrap_or(&origin), cfg.weight, cfg.p)?
        }
        "constant" => ScalarField::constant(n, Ball::centered(n, DOMAIN_RADIUS), cfg.p, cfg.value),
        "grid" => {
            let path = cfg.grid_file.as_deref().ok_or_else(|| CliError::Usage("grid field needs `grid_file`".into()))?;
            let file = File::open(path).map_err(|e| CliError::Usage(format!("cannot open {path}: {e}")))?;
            ScalarField::from_grid(Grid::read_csv(BufReader::new(file))?, cfg.p)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown example `{other}`; expected radial_kernel, riesz_sum, kernel_pair, plane_kernel, cone_field, \
                 log_modulus, harmonic_plus_kernel, constant or grid"
            )))
        }
    };
    match cfg.resolution {
        Some(res) => Ok(examples::grid_sample(&u, res, &Ball::centered(u.dim(), cfg.grid_radius))?),
        None => Ok(u),
    }
}
