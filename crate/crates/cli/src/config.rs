//! Run configuration: presets, flat dotted-key JSON files and `key=value`
//! overrides, applied in that order.

use std::fmt;
use std::path::{Path, PathBuf};

use burgers_core::grid::{GridSpec, InitialCondition, ModelParams};
use burgers_core::stepper::{BoundaryMode, HistoryMode, NewtonConfig, RunOptions, Scheme};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Example51,
    Example52,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Example51 => "example51",
            Preset::Example52 => "example52",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcKind {
    Quadratic5,
    Cosine2,
    Zero,
}

impl IcKind {
    pub fn name(self) -> &'static str {
        match self {
            IcKind::Quadratic5 => "quadratic5",
            IcKind::Cosine2 => "cosine2",
            IcKind::Zero => "zero",
        }
    }

    pub fn to_initial(self) -> InitialCondition<f64> {
        match self {
            IcKind::Quadratic5 => InitialCondition::Quadratic5,
            IcKind::Cosine2 => InitialCondition::Cosine2,
            IcKind::Zero => InitialCondition::Zero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Dat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub m: usize,
    pub t_final: f64,
    pub nu: f64,
    pub wd: f64,
    pub c0: f64,
    pub c1: f64,
    pub theta: f64,
    pub ic: IcKind,
    pub controlled: bool,
    pub store_history: bool,
    pub monitors: bool,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub directory: PathBuf,
    pub formats: Vec<Format>,
    /// Preset the config started from, if any.
    pub preset: Option<Preset>,
}

pub const KEYS: [&str; 16] = [
    "grid.N",
    "grid.M",
    "grid.T",
    "params.nu",
    "params.wd",
    "params.c0",
    "params.c1",
    "params.theta",
    "ic.kind",
    "toggles.controlled",
    "toggles.store_history",
    "toggles.monitors",
    "newton.tol",
    "newton.max_iter",
    "output.directory",
    "output.formats",
];

impl Default for RunConfig {
    fn default() -> Self {
        Self::preset(Preset::Example51)
    }
}

impl RunConfig {
    /// Figure grids are not given with the examples; both presets use
    /// `N = 100`, `M = 1000`.
    pub fn preset(p: Preset) -> Self {
        let base = Self {
            n: 100,
            m: 1000,
            t_final: 1.0,
            nu: 1.0,
            wd: 5.0,
            c0: 1.0,
            c1: 1.0,
            theta: 1.0,
            ic: IcKind::Quadratic5,
            controlled: true,
            store_history: false,
            monitors: true,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Json, Format::Dat],
            preset: Some(p),
        };
        match p {
            Preset::Example51 => base,
            Preset::Example52 => Self {
                nu: 0.1,
                wd: 3.0,
                theta: 0.5,
                ic: IcKind::Cosine2,
                ..base
            },
        }
    }

    /// Preset (or defaults), then the file, then overrides; validated.
    pub fn load(preset: Option<Preset>, file: Option<&Path>, sets: &[String]) -> Result<Self, CliError> {
        let mut cfg = preset.map(Self::preset).unwrap_or_default();
        cfg.preset = preset;
        if let Some(path) = file {
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let obj: Map<String, Value> =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            for (key, value) in &obj {
                cfg.apply(key, value)?;
            }
        }
        for s in sets {
            let (key, raw) = s
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override `{s}` is not key=value")))?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            cfg.apply(key.trim(), &value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, key: &str, value: &Value) -> Result<(), CliError> {
        match key {
            "grid.N" => self.n = as_usize(key, value)?,
            "grid.M" => self.m = as_usize(key, value)?,
            "grid.T" => self.t_final = as_f64(key, value)?,
            "params.nu" => self.nu = as_f64(key, value)?,
            "params.wd" => self.wd = as_f64(key, value)?,
            "params.c0" => self.c0 = as_f64(key, value)?,
            "params.c1" => self.c1 = as_f64(key, value)?,
            "params.theta" => self.theta = as_f64(key, value)?,
            "ic.kind" => {
                self.ic = serde_json::from_value(value.clone())
                    .map_err(|_| bad(key, value, "one of quadratic5, cosine2, zero"))?
            }
            "toggles.controlled" => self.controlled = as_bool(key, value)?,
            "toggles.store_history" => self.store_history = as_bool(key, value)?,
            "toggles.monitors" => self.monitors = as_bool(key, value)?,
            "newton.tol" => self.newton_tol = as_f64(key, value)?,
            "newton.max_iter" => self.newton_max_iter = as_usize(key, value)?,
            "output.directory" => {
                self.directory = PathBuf::from(value.as_str().ok_or_else(|| bad(key, value, "a path string"))?)
            }
            "output.formats" => self.formats = as_formats(key, value)?,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown key `{key}` (known: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        self.params()?;
        if !(self.newton_tol > 0.0 && self.newton_tol.is_finite()) {
            return Err(CliError::Config(format!(
                "newton.tol: need tol > 0, got {}",
                self.newton_tol
            )));
        }
        if self.newton_max_iter == 0 {
            return Err(CliError::Config("newton.max_iter: need at least 1".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec<f64>, CliError> {
        GridSpec::new(self.n, self.m, self.t_final).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn params(&self) -> Result<ModelParams<f64>, CliError> {
        ModelParams::new(self.nu, self.wd, self.c0, self.c1, self.theta).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn boundary(&self) -> BoundaryMode<f64> {
        if self.controlled {
            BoundaryMode::Feedback
        } else {
            BoundaryMode::Uncontrolled
        }
    }

    pub fn newton(&self) -> NewtonConfig<f64> {
        NewtonConfig {
            tol: self.newton_tol,
            max_iter: self.newton_max_iter,
        }
    }

    pub fn run_options(&self) -> RunOptions<f64> {
        RunOptions {
            newton: self.newton(),
            history: if self.store_history {
                HistoryMode::Full
            } else {
                HistoryMode::None
            },
            monitors: self.monitors,
        }
    }

    pub fn scheme(&self) -> Result<Scheme<f64>, CliError> {
        Ok(Scheme::new(self.grid()?, self.params()?)
            .map_err(|e| CliError::Config(e.to_string()))?
            .with_boundary(self.boundary()))
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// The complete effective config in the dotted form accepted by `load`.
    pub fn to_dotted(&self) -> Map<String, Value> {
        let formats: Vec<Value> = self
            .formats
            .iter()
            .map(|f| serde_json::to_value(f).expect("format serializes"))
            .collect();
        let pairs: [(&str, Value); 16] = [
            ("grid.N", self.n.into()),
            ("grid.M", self.m.into()),
            ("grid.T", self.t_final.into()),
            ("params.nu", self.nu.into()),
            ("params.wd", self.wd.into()),
            ("params.c0", self.c0.into()),
            ("params.c1", self.c1.into()),
            ("params.theta", self.theta.into()),
            ("ic.kind", self.ic.name().into()),
            ("toggles.controlled", self.controlled.into()),
            ("toggles.store_history", self.store_history.into()),
            ("toggles.monitors", self.monitors.into()),
            ("newton.tol", self.newton_tol.into()),
            ("newton.max_iter", self.newton_max_iter.into()),
            ("output.directory", self.directory.display().to_string().into()),
            ("output.formats", Value::Array(formats)),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={} M={} T={} nu={} wd={} c0={} c1={} theta={} ic={} controlled={}",
            self.n,
            self.m,
            self.t_final,
            self.nu,
            self.wd,
            self.c0,
            self.c1,
            self.theta,
            self.ic.name(),
            self.controlled
        )
    }
}

fn bad(key: &str, value: &Value, want: &str) -> CliError {
    CliError::Config(format!("{key}: expected {want}, got {value}"))
}

fn as_f64(key: &str, v: &Value) -> Result<f64, CliError> {
    v.as_f64().ok_or_else(|| bad(key, v, "a number"))
}

fn as_usize(key: &str, v: &Value) -> Result<usize, CliError> {
    v.as_u64()
        .and_then(|u| usize::try_from(u).ok())
        .ok_or_else(|| bad(key, v, "a non-negative integer"))
}

fn as_bool(key: &str, v: &Value) -> Result<bool, CliError> {
    match v {
        Value::Bool(b) => Ok(*b),
        Value::String(s) if s == "on" => Ok(true),
        Value::String(s) if s == "off" => Ok(false),
        _ => Err(bad(key, v, "true/false or on/off")),
    }
}

fn as_formats(key: &str, v: &Value) -> Result<Vec<Format>, CliError> {
    let items: Vec<Value> = match v {
        Value::Array(a) => a.clone(),
        Value::String(s) => s.split(',').map(|p| Value::String(p.trim().to_string())).collect(),
        _ => return Err(bad(key, v, "a list of csv, json, dat")),
    };
    items
        .iter()
        .map(|i| serde_json::from_value(i.clone()).map_err(|_| bad(key, i, "one of csv, json, dat")))
        .collect()
}
