//! Flat `section.key = value` scenario files.
//!
//! ```text
//! # single photon through the variable crystal
//! scenario.name = plus
//! state.name = plus
//! source.kind = decorrelated
//! source.filter_fwhm_nm = 12
//! evolution.l_stop = 1
//! ```
//!
//! Blank lines and text after `#` are ignored. Every error names the offending
//! line (when there is one) and key.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qsl_core::experiment::ExperimentConfig;
use qsl_core::quantum::{make_state, Ket, Operator, StateSpec};
use qsl_core::spectral::{
    model_from_optics, Axis, Evolution, SegmentSpec, SpectralKind, DEFAULT_NODES_PER_AXIS,
    MIN_NODES_PER_AXIS,
};
use qsl_core::QslError;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(
                f,
                "{}:{}: {}: {}",
                self.source, line, self.key, self.message
            ),
            None => write!(f, "{}: {}: {}", self.source, self.key, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

const KEYS: &[&str] = &[
    "scenario.name",
    "scenario.reference_max_speed",
    "state.name",
    "state.n",
    "source.kind",
    "source.center_nm",
    "source.filter_fwhm_nm",
    "source.pump_fwhm_nm",
    "source.nodes_per_axis",
    "evolution.l_start",
    "evolution.l_stop",
    "evolution.l_step",
    "noise.enabled",
    "noise.axis",
    "noise.length_lambda",
    "observable.kind",
    "observable.file",
    "experiment.enabled",
    "experiment.rate_hz",
    "experiment.integration_s",
    "experiment.delta_l",
    "experiment.resamples",
    "experiment.master_seed",
    "experiment.prep_infidelity",
    "output.dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SourceConfig {
    pub kind: SpectralKind,
    pub center_nm: f64,
    pub filter_fwhm_nm: Option<f64>,
    pub pump_fwhm_nm: Option<f64>,
    pub nodes_per_axis: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseConfig {
    pub axis: Axis,
    pub length_lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObservableSpec {
    InitialStateProjector,
    /// Whitespace-separated rows of `re` or `re,im` entries.
    Custom(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub state_name: String,
    pub state: StateSpec,
    pub source: SourceConfig,
    pub l_start: f64,
    pub l_stop: f64,
    pub l_step: f64,
    pub noise: Option<NoiseConfig>,
    pub observable: ObservableSpec,
    pub experiment: Option<ExperimentConfig>,
    pub output_dir: PathBuf,
    pub reference_max_speed: Option<f64>,
}

struct Entries {
    source: String,
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(source: &str, text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |key: &str, message: String| ConfigError {
                source: source.to_string(),
                line: Some(line),
                key: key.to_string(),
                message,
            };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(content, "expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(key, "unknown key".into()));
            }
            if map
                .insert(key.to_string(), (line, value.to_string()))
                .is_some()
            {
                return Err(err(key, "key assigned twice".into()));
            }
        }
        Ok(Self {
            source: source.to_string(),
            map,
        })
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            source: self.source.clone(),
            line: self.map.get(key).map(|(l, _)| *l),
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(_, v)| v.as_str())
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| self.error(key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn required<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| self.error(key, "missing required key"))
    }

    fn finite(&self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        let v = match default {
            Some(d) => self.or(key, d)?,
            None => self.required(key)?,
        };
        if !v.is_finite() {
            return Err(self.error(key, "must be finite"));
        }
        Ok(v)
    }
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let source = path.display().to_string();
        let text = fs::read_to_string(path).map_err(|e| ConfigError {
            source: source.clone(),
            line: None,
            key: "file".into(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&source, &text, base)
    }

    /// Parses and validates; relative observable files resolve against `base`.
    pub fn parse(source: &str, text: &str, base: &Path) -> Result<Self, ConfigError> {
        let e = Entries::parse(source, text)?;

        let name: String = e.required("scenario.name")?;
        let state_name: String = e.required("state.name")?;
        let n: usize = e.or("state.n", 1)?;
        let state = StateSpec::parse(&state_name, n)
            .map_err(|err| e.error("state.name", err.to_string()))?;
        make_state::<f64>(&state).map_err(|err| e.error("state.n", err.to_string()))?;

        let source_cfg = SourceConfig {
            kind: e.required("source.kind")?,
            center_nm: e.finite("source.center_nm", Some(808.0))?,
            filter_fwhm_nm: e.get("source.filter_fwhm_nm")?,
            pump_fwhm_nm: e.get("source.pump_fwhm_nm")?,
            nodes_per_axis: e.or("source.nodes_per_axis", DEFAULT_NODES_PER_AXIS)?,
        };
        if source_cfg.nodes_per_axis < MIN_NODES_PER_AXIS {
            return Err(e.error(
                "source.nodes_per_axis",
                format!("must be at least {MIN_NODES_PER_AXIS}"),
            ));
        }

        let l_start = e.finite("evolution.l_start", Some(0.0))?;
        let l_stop = e.finite("evolution.l_stop", Some(1.0))?;
        let l_step = e.finite("evolution.l_step", Some(0.025))?;
        if !(l_step > 0.0) {
            return Err(e.error("evolution.l_step", "must be positive"));
        }
        if !(l_start < l_stop) {
            return Err(e.error("evolution.l_stop", "must exceed evolution.l_start"));
        }

        let noise = if e.or("noise.enabled", false)? {
            let length_lambda = e.finite("noise.length_lambda", Some(120.0))?;
            if length_lambda < 0.0 {
                return Err(e.error("noise.length_lambda", "must be non-negative"));
            }
            Some(NoiseConfig {
                axis: e
                    .or("noise.axis", Axis::X)
                    .map_err(|_| e.error("noise.axis", "expected `x` or `z`"))?,
                length_lambda,
            })
        } else {
            None
        };

        let observable = match e
            .raw("observable.kind")
            .unwrap_or("initial_state_projector")
        {
            "initial_state_projector" => ObservableSpec::InitialStateProjector,
            "custom" => {
                let file: String = e.required("observable.file")?;
                ObservableSpec::Custom(base.join(file))
            }
            other => {
                return Err(e.error(
                    "observable.kind",
                    format!("unknown observable kind `{other}`"),
                ))
            }
        };

        let experiment = if e.or("experiment.enabled", false)? {
            let defaults = ExperimentConfig::default();
            let cfg = ExperimentConfig {
                rate_hz: e.finite("experiment.rate_hz", Some(defaults.rate_hz))?,
                integration_s: e
                    .finite("experiment.integration_s", Some(defaults.integration_s))?,
                delta_l: e.finite("experiment.delta_l", Some(defaults.delta_l))?,
                resamples: e.or("experiment.resamples", defaults.resamples)?,
                master_seed: e.or("experiment.master_seed", defaults.master_seed)?,
                prep_infidelity: e
                    .finite("experiment.prep_infidelity", Some(defaults.prep_infidelity))?,
            };
            cfg.validate()
                .map_err(|err| e.error("experiment", err.to_string()))?;
            Some(cfg)
        } else {
            None
        };

        let cfg = Self {
            output_dir: e
                .get::<String>("output.dir")?
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("out").join(&name)),
            reference_max_speed: e.get("scenario.reference_max_speed")?,
            name,
            state_name,
            state,
            source: source_cfg,
            l_start,
            l_stop,
            l_step,
            noise,
            observable,
            experiment,
        };
        cfg.evolution()
            .map_err(|err| e.error("source.kind", err.to_string()))?;
        cfg.observable_operator()
            .map_err(|err| e.error("observable.file", err))?;
        Ok(cfg)
    }

    /// Grid `l_start + i·l_step` up to `l_stop` (inclusive within a small slack).
    pub fn l_grid(&self) -> Vec<f64> {
        let count = ((self.l_stop - self.l_start) / self.l_step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.l_start + i as f64 * self.l_step)
            .collect()
    }

    pub fn initial_ket(&self) -> Ket<f64> {
        make_state(&self.state).expect("validated on parse")
    }

    pub fn evolution(&self) -> Result<Evolution<f64>, QslError> {
        let ket = self.initial_ket();
        let s = &self.source;
        let model = model_from_optics(
            s.kind,
            s.center_nm,
            s.filter_fwhm_nm,
            s.pump_fwhm_nm,
            ket.n_qubits(),
        )?;
        let tail = match &self.noise {
            Some(noise) => vec![SegmentSpec {
                axis: noise.axis,
                length: noise.length_lambda,
            }],
            None => Vec::new(),
        };
        Ok(Evolution::new(ket, model)?
            .with_tail(tail)
            .with_nodes_per_axis(s.nodes_per_axis))
    }

    pub fn observable_operator(&self) -> Result<Operator<f64>, String> {
        match &self.observable {
            ObservableSpec::InitialStateProjector => Ok(self.initial_ket().to_projector_operator()),
            ObservableSpec::Custom(path) => {
                let op = read_matrix(path)?;
                if op.dim() != self.initial_ket().dim() {
                    return Err(format!(
                        "observable is {0}×{0}, state space is {1}-dimensional",
                        op.dim(),
                        self.initial_ket().dim()
                    ));
                }
                Ok(op)
            }
        }
    }
}

fn read_matrix(path: &Path) -> Result<Operator<f64>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let row = content
            .split_whitespace()
            .map(|entry| {
                let (re, im) = entry.split_once(',').unwrap_or((entry, "0"));
                Ok(qsl_core::scalar::C::new(
                    re.parse::<f64>()
                        .map_err(|e| format!("line {}: {e}", idx + 1))?,
                    im.parse::<f64>()
                        .map_err(|e| format!("line {}: {e}", idx + 1))?,
                ))
            })
            .collect::<Result<Vec<_>, String>>()?;
        rows.push(row);
    }
    let dim = rows.len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(format!(
            "{}: observable must be a square matrix",
            path.display()
        ));
    }
    let m = qsl_core::scalar::CMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    Operator::hermitian(m).map_err(|e| format!("{}: {e}", path.display()))
}
