//! Experiment configuration: a small TOML document validated against a fixed schema.
//!
//! Parsing collects every problem it can find (unknown keys, missing keys, type
//! mismatches, out-of-range values) together with the line it refers to, instead
//! of stopping at the first one.

use std::collections::HashMap;
use std::fmt;

use rmtlab_core::ensemble::{EnsembleSpec, EntryDistribution};
use rmtlab_core::C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    IdentitySuite,
    GlobalLaw,
    LocalLaw,
    Rigidity,
    Delocalization,
    Counting,
    EdgeScaling,
    FluctAvg,
    LargeDev,
    SineKernel,
    Gfc,
    HsCheck,
    RepulsionContrast,
}

impl Experiment {
    pub const ALL: [Experiment; 13] = [
        Experiment::IdentitySuite,
        Experiment::GlobalLaw,
        Experiment::LocalLaw,
        Experiment::Rigidity,
        Experiment::Delocalization,
        Experiment::Counting,
        Experiment::EdgeScaling,
        Experiment::FluctAvg,
        Experiment::LargeDev,
        Experiment::SineKernel,
        Experiment::Gfc,
        Experiment::HsCheck,
        Experiment::RepulsionContrast,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::IdentitySuite => "identity-suite",
            Experiment::GlobalLaw => "global-law",
            Experiment::LocalLaw => "local-law",
            Experiment::Rigidity => "rigidity",
            Experiment::Delocalization => "delocalization",
            Experiment::Counting => "counting",
            Experiment::EdgeScaling => "edge-scaling",
            Experiment::FluctAvg => "fluct-avg",
            Experiment::LargeDev => "large-dev",
            Experiment::SineKernel => "sine-kernel",
            Experiment::Gfc => "gfc",
            Experiment::HsCheck => "hs-check",
            Experiment::RepulsionContrast => "repulsion-contrast",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Spectral-domain grid for the local and global law sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub tau: f64,
    pub n_e: usize,
    pub n_eta: usize,
    /// Explicit energies replacing the uniform grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<f64>>,
    /// Explicit `η` values replacing the log-uniform grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CountingConfig {
    /// Random intervals per sample.
    pub intervals: usize,
    /// Intervals are drawn with endpoints uniform in `[−limit, limit]`.
    pub limit: f64,
    /// Exceedance threshold exponent: `N|μ(I) − ρ(I)| ≤ N^epsilon`.
    pub epsilon: f64,
}

impl Default for CountingConfig {
    fn default() -> Self {
        Self { intervals: 200, limit: 2.5, epsilon: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SineConfig {
    pub e: f64,
    /// Unfolded half-window `|u| ≤ window`.
    pub window: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub bins: usize,
}

impl Default for SineConfig {
    fn default() -> Self {
        Self { e: 0.0, window: 10.0, r_min: 0.1, r_max: 3.0, bins: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GfcConfig {
    pub e: f64,
    /// `η = N^{−eta_exponent}`.
    pub eta_exponent: f64,
}

impl Default for GfcConfig {
    fn default() -> Self {
        Self { e: 0.0, eta_exponent: 1.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LargeDevConfig {
    pub epsilon: f64,
}

impl Default for LargeDevConfig {
    fn default() -> Self {
        Self { epsilon: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HsConfig {
    /// Order `n` of the almost-analytic extension.
    pub order: usize,
}

impl Default for HsConfig {
    fn default() -> Self {
        Self { order: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub family: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagonal: Option<String>,
    /// Custom entry law as `[re, im, probability]` triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centered: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    /// Dimensions for scaling fits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counting: Option<CountingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sine: Option<SineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gfc: Option<GfcConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub large_dev: Option<LargeDevConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hs: Option<HsConfig>,
}

/// One configuration problem; `line` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Str,
    Int,
    Float,
    Bool,
    Table,
    IntArray,
    FloatArray,
    Atoms,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Str => "a string",
            Ty::Int => "an integer",
            Ty::Float => "a number",
            Ty::Bool => "a boolean",
            Ty::Table => "a table",
            Ty::IntArray => "an array of integers",
            Ty::FloatArray => "an array of numbers",
            Ty::Atoms => "an array of [re, im, probability] triples",
        }
    }
}

const TOP: &[(&str, Ty)] = &[
    ("experiment", Ty::Str),
    ("family", Ty::Str),
    ("N", Ty::Int),
    ("samples", Ty::Int),
    ("seed", Ty::Int),
    ("entries", Ty::Str),
    ("diagonal", Ty::Str),
    ("atoms", Ty::Atoms),
    ("p", Ty::Float),
    ("centered", Ty::Bool),
    ("output_dir", Ty::Str),
    ("n_values", Ty::IntArray),
    ("grid", Ty::Table),
    ("counting", Ty::Table),
    ("sine", Ty::Table),
    ("gfc", Ty::Table),
    ("large_dev", Ty::Table),
    ("hs", Ty::Table),
];

const REQUIRED: &[&str] = &["experiment", "family", "N", "samples", "seed"];

fn table_schema(name: &str) -> &'static [(&'static str, Ty)] {
    match name {
        "grid" => &[("tau", Ty::Float), ("n_e", Ty::Int), ("n_eta", Ty::Int), ("e", Ty::FloatArray), ("eta", Ty::FloatArray)],
        "counting" => &[("intervals", Ty::Int), ("limit", Ty::Float), ("epsilon", Ty::Float)],
        "sine" => &[("e", Ty::Float), ("window", Ty::Float), ("r_min", Ty::Float), ("r_max", Ty::Float), ("bins", Ty::Int)],
        "gfc" => &[("e", Ty::Float), ("eta_exponent", Ty::Float)],
        "large_dev" => &[("epsilon", Ty::Float)],
        "hs" => &[("order", Ty::Int)],
        _ => &[],
    }
}

pub const FAMILIES: [&str; 4] = ["GUE", "GOE", "wigner", "erdos-renyi"];
pub const ENTRY_LAWS: [&str; 6] = ["gaussian-real", "gaussian-complex", "ternary-real", "ternary-complex", "bernoulli-sym", "custom-table"];

/// Line of every `key = value` (keyed by `(table, key)`, top level is `""`) and of
/// every `[table]` header (keyed by `(table, "")`).
fn key_lines(text: &str) -> HashMap<(String, String), usize> {
    let mut lines = HashMap::new();
    let mut table = String::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(header) = line.strip_prefix('[').and_then(|l| l.split(']').next()) {
            table = header.trim().to_string();
            lines.entry((table.clone(), String::new())).or_insert(k + 1);
        } else if let Some((key, _)) = line.split_once('=') {
            let key = key.trim().trim_matches('"').to_string();
            if !key.is_empty() && !key.starts_with('#') {
                lines.entry((table.clone(), key)).or_insert(k + 1);
            }
        }
    }
    lines
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Checks `value` against `ty`; integers are accepted (and converted) where numbers are expected.
fn check_type(value: &mut toml::Value, ty: Ty) -> bool {
    use toml::Value as V;
    match (ty, &mut *value) {
        (Ty::Str, V::String(_)) | (Ty::Int, V::Integer(_)) | (Ty::Bool, V::Boolean(_)) | (Ty::Table, V::Table(_)) => true,
        (Ty::Float, V::Float(_)) => true,
        (Ty::Float, V::Integer(i)) => {
            *value = V::Float(*i as f64);
            true
        }
        (Ty::IntArray, V::Array(a)) => a.iter().all(|v| v.is_integer()),
        (Ty::FloatArray, V::Array(a)) => a.iter_mut().all(|v| check_type(v, Ty::Float)),
        (Ty::Atoms, V::Array(a)) => a.iter_mut().all(|v| match v {
            V::Array(t) => t.len() == 3 && t.iter_mut().all(|x| check_type(x, Ty::Float)),
            _ => false,
        }),
        _ => false,
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e.span().map(|s| line_of_offset(text, s.start));
        ConfigErrors(vec![ConfigError { line, message: format!("syntax error: {}", e.message()) }])
    })?;
    let lines = key_lines(text);
    let at = |t: &str, k: &str| lines.get(&(t.to_string(), k.to_string())).copied();
    let mut errors = Vec::new();

    let mut unknown = Vec::new();
    for (key, value) in table.iter_mut() {
        match TOP.iter().find(|(k, _)| k == key) {
            None => unknown.push(key.clone()),
            Some(&(_, ty)) => {
                if !check_type(value, ty) {
                    errors.push(ConfigError { line: at("", key), message: format!("key `{key}` must be {}", ty.name()) });
                } else if let toml::Value::Table(sub) = value {
                    let schema = table_schema(key);
                    for (sk, sv) in sub.iter_mut() {
                        match schema.iter().find(|(k, _)| k == sk) {
                            None => errors.push(ConfigError {
                                line: at(key, sk),
                                message: format!(
                                    "unknown key `{sk}` in [{key}] (expected one of: {})",
                                    schema.iter().map(|s| s.0).collect::<Vec<_>>().join(", ")
                                ),
                            }),
                            Some(&(_, sty)) if !check_type(sv, sty) => {
                                errors.push(ConfigError { line: at(key, sk), message: format!("key `{key}.{sk}` must be {}", sty.name()) })
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    for key in unknown {
        errors.push(ConfigError {
            line: at("", &key).or_else(|| at(&key, "")),
            message: format!("unknown key `{key}` (expected one of: {})", TOP.iter().map(|t| t.0).collect::<Vec<_>>().join(", ")),
        });
    }
    for key in REQUIRED {
        if !table.contains_key(*key) {
            errors.push(ConfigError { line: None, message: format!("missing required key `{key}`") });
        }
    }
    if let Some(toml::Value::String(name)) = table.get("experiment") {
        if Experiment::from_name(name).is_none() {
            errors.push(ConfigError {
                line: at("", "experiment"),
                message: format!("unknown experiment `{name}` (expected one of: {})", Experiment::ALL.map(|e| e.name()).join(", ")),
            });
        }
    }
    for key in ["N", "samples", "seed"] {
        if let Some(toml::Value::Integer(v)) = table.get(key) {
            if *v < 0 {
                errors.push(ConfigError { line: at("", key), message: format!("key `{key}` must be non-negative") });
            }
        }
    }
    if let Some(toml::Value::Array(a)) = table.get("n_values") {
        if a.iter().any(|v| v.as_integer().is_some_and(|i| i < 2)) {
            errors.push(ConfigError { line: at("", "n_values"), message: "every entry of `n_values` must be at least 2".into() });
        }
    }
    if let Some(toml::Value::Table(sub)) = table.get("grid") {
        for key in ["tau", "n_e", "n_eta"] {
            if !sub.contains_key(key) {
                errors.push(ConfigError { line: at("grid", ""), message: format!("missing required key `grid.{key}`") });
            }
        }
        for key in ["n_e", "n_eta"] {
            if let Some(toml::Value::Integer(v)) = sub.get(key) {
                if *v < 0 {
                    errors.push(ConfigError { line: at("grid", key), message: format!("key `grid.{key}` must be non-negative") });
                }
            }
        }
    }
    for name in ["counting", "sine", "hs"] {
        if let Some(toml::Value::Table(sub)) = table.get(name) {
            for (key, v) in sub {
                if v.as_integer().is_some_and(|i| i < 0) {
                    errors.push(ConfigError { line: at(name, key), message: format!("key `{name}.{key}` must be non-negative") });
                }
            }
        }
    }
    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }

    let config: ExperimentConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigErrors(vec![ConfigError { line: None, message: e.message().to_string() }]))?;
    let semantic: Vec<ConfigError> =
        config.validate().into_iter().map(|(key, message)| ConfigError { line: key.and_then(|(t, k)| at(t, k)), message }).collect();
    if semantic.is_empty() {
        Ok(config)
    } else {
        Err(ConfigErrors(semantic))
    }
}

type KeyRef = Option<(&'static str, &'static str)>;

impl ExperimentConfig {
    /// A ready-to-run configuration with the defaults used by `rmtlab <experiment>`
    /// when no config file is given.
    pub fn default_for(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            family: "GUE".into(),
            n: 200,
            samples: 20,
            seed: 1,
            entries: None,
            diagonal: None,
            atoms: None,
            p: None,
            centered: None,
            output_dir: None,
            n_values: None,
            grid: None,
            counting: None,
            sine: None,
            gfc: None,
            large_dev: None,
            hs: None,
        };
        match experiment {
            Experiment::IdentitySuite => {
                c.n = 50;
                c.samples = 10;
            }
            Experiment::GlobalLaw | Experiment::LocalLaw => {
                c.grid = Some(GridConfig { tau: 0.2, n_e: 7, n_eta: 4, e: None, eta: None });
            }
            Experiment::FluctAvg | Experiment::Gfc => c.n_values = Some(vec![100, 200, 400]),
            Experiment::EdgeScaling => c.samples = 200,
            Experiment::SineKernel => {
                c.n = 500;
                c.samples = 100;
            }
            Experiment::HsCheck => {
                c.n = 8;
                c.samples = 2;
            }
            Experiment::LargeDev => {
                c.n = 10_000;
                c.samples = 2000;
            }
            _ => {}
        }
        c
    }

    /// Semantic checks that need the typed config; each problem names the key it concerns.
    fn validate(&self) -> Vec<(KeyRef, String)> {
        let mut errors: Vec<(KeyRef, String)> = Vec::new();
        if !FAMILIES.contains(&self.family.as_str()) {
            errors.push((Some(("", "family")), format!("unknown family `{}` (expected one of: {})", self.family, FAMILIES.join(", "))));
        }
        if self.n < 2 {
            errors.push((Some(("", "N")), format!("N = {} must be at least 2", self.n)));
        }
        if self.samples == 0 {
            errors.push((Some(("", "samples")), "samples must be at least 1".into()));
        }
        if self.seed > i64::MAX as u64 {
            errors.push((Some(("", "seed")), "seed must fit in a signed 64-bit integer".into()));
        }
        for (key, law) in [("entries", &self.entries), ("diagonal", &self.diagonal)] {
            if let Some(name) = law {
                if !ENTRY_LAWS.contains(&name.as_str()) {
                    let k: KeyRef = Some(("", if key == "entries" { "entries" } else { "diagonal" }));
                    errors.push((k, format!("unknown entry law `{name}` (expected one of: {})", ENTRY_LAWS.join(", "))));
                }
            }
        }
        if self.family == "wigner" && self.entries.is_none() {
            errors.push((None, "family `wigner` requires `entries`".into()));
        }
        if self.family != "wigner" && (self.entries.is_some() || self.diagonal.is_some()) {
            errors.push((Some(("", "entries")), format!("`entries`/`diagonal` only apply to family `wigner`, not `{}`", self.family)));
        }
        let custom = self.entries.as_deref() == Some("custom-table") || self.diagonal.as_deref() == Some("custom-table");
        if custom && self.atoms.is_none() {
            errors.push((None, "entry law `custom-table` requires `atoms`".into()));
        }
        if self.family == "erdos-renyi" {
            match self.p {
                None => errors.push((None, "family `erdos-renyi` requires `p`".into())),
                Some(p) if !(p > 0.0 && p < 1.0) => errors.push((Some(("", "p")), format!("p = {p} must lie in (0, 1)"))),
                _ => {}
            }
        } else if self.p.is_some() || self.centered.is_some() {
            errors.push((Some(("", "p")), "`p`/`centered` only apply to family `erdos-renyi`".into()));
        }
        if errors.is_empty() {
            if let Err(e) = self.ensemble() {
                errors.push((Some(("", "atoms")), e.to_string()));
            }
        }
        if let Some(ns) = &self.n_values {
            let mut distinct = ns.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if distinct.len() < 3 {
                errors.push((Some(("", "n_values")), "`n_values` needs at least 3 distinct dimensions".into()));
            }
        }
        match self.experiment {
            Experiment::GlobalLaw | Experiment::LocalLaw => match &self.grid {
                None => errors.push((None, format!("experiment `{}` requires a [grid] table", self.experiment))),
                Some(g) => {
                    if !(g.tau > 0.0 && g.tau < 1.0) {
                        errors.push((Some(("grid", "tau")), format!("tau = {} must lie in (0, 1)", g.tau)));
                    } else if let Err(e) = self.domain() {
                        errors.push((Some(("grid", "")), e.to_string()));
                    }
                }
            },
            Experiment::FluctAvg | Experiment::Gfc if self.n_values.is_none() => {
                errors.push((None, format!("experiment `{}` requires `n_values`", self.experiment)));
            }
            Experiment::HsCheck if self.n > 20 => {
                errors.push((
                    Some(("", "N")),
                    format!("hs-check compares against dense references and is limited to N ≤ 20, got {}", self.n),
                ));
            }
            Experiment::SineKernel => {
                let s = self.sine.clone().unwrap_or_default();
                if !(s.e.abs() < 2.0) {
                    errors.push((Some(("sine", "e")), format!("energy {} lies outside the bulk (−2, 2)", s.e)));
                }
                if !(0.0 <= s.r_min && s.r_min < s.r_max && s.bins >= 1 && s.window > s.r_max) {
                    errors.push((Some(("", "sine")), "need 0 ≤ r_min < r_max < window and bins ≥ 1".into()));
                }
            }
            _ => {}
        }
        if let Some(h) = &self.hs {
            if h.order > 2 {
                errors.push((Some(("hs", "order")), format!("order {} exceeds the smoothness of the test functions (≤ 2)", h.order)));
            }
        }
        errors
    }

    pub fn ensemble(&self) -> rmtlab_core::Result<EnsembleSpec> {
        let law = |name: &str| -> rmtlab_core::Result<EntryDistribution> {
            Ok(match name {
                "gaussian-real" => EntryDistribution::gaussian_real(),
                "gaussian-complex" => EntryDistribution::gaussian_complex(),
                "ternary-real" => EntryDistribution::ternary_real(),
                "ternary-complex" => EntryDistribution::ternary_complex(),
                "bernoulli-sym" => EntryDistribution::bernoulli_sym(),
                "custom-table" => {
                    let atoms = self.atoms.clone().unwrap_or_default();
                    EntryDistribution::custom_table("custom", atoms.iter().map(|a| (C64::new(a[0], a[1]), a[2])).collect())?
                }
                other => return Err(rmtlab_core::Error::InvalidParameter(format!("unknown entry law `{other}`"))),
            })
        };
        Ok(match self.family.as_str() {
            "GUE" => EnsembleSpec::gue(self.n),
            "GOE" => EnsembleSpec::goe(self.n),
            "erdos-renyi" => EnsembleSpec::erdos_renyi(self.n, self.p.unwrap_or(f64::NAN), self.centered.unwrap_or(true)),
            "wigner" => {
                let off = law(self.entries.as_deref().unwrap_or("gaussian-real"))?;
                match &self.diagonal {
                    Some(d) => EnsembleSpec::wigner_with_diag(self.n, off, law(d)?),
                    None => EnsembleSpec::wigner(self.n, off),
                }
            }
            other => return Err(rmtlab_core::Error::InvalidParameter(format!("unknown family `{other}`"))),
        })
    }

    /// The spectral-domain grid, with explicit `e`/`eta` lists replacing the generated axes.
    pub fn domain(&self) -> rmtlab_core::Result<rmtlab_core::verification::SpectralDomainGrid> {
        let g = self.grid.as_ref().ok_or_else(|| rmtlab_core::Error::InvalidParameter("no [grid] table".into()))?;
        let mut d = rmtlab_core::verification::build_domain(g.tau, self.n, g.n_e, g.n_eta)?;
        if let Some(e) = &g.e {
            d.e_points = e.clone();
        }
        if let Some(eta) = &g.eta {
            d.eta_points = eta.clone();
        }
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]) && !v.is_empty();
        if !sorted(&d.e_points) || !sorted(&d.eta_points) {
            return Err(rmtlab_core::Error::InvalidParameter("grid axes must be non-empty and strictly increasing".into()));
        }
        if let Some(p) = d.points().into_iter().find(|p| !d.contains(p.e, p.eta)) {
            return Err(rmtlab_core::Error::InvalidParameter(format!(
                "grid point (E, η) = ({}, {}) lies outside the domain for τ = {}, N = {}",
                p.e, p.eta, g.tau, self.n
            )));
        }
        Ok(d)
    }

    /// Stable TOML rendering: fixed key order, shortest round-trip floats.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
