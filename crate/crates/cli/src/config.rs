//! Run configuration: a flat JSON document, optionally with a nested
//! `gamma` object.
//!
//! With `unit_omega` (the default) rates are given in units of `omega` and
//! times in units of `1/omega`; the `omega_*` scan range is always absolute.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use zeno_core::sweep::{GridRange, SeriesKind};
use zeno_core::{ModelParams, NoiseCovariance, TrajectoryConfig, Variant};

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_N_TRAJ: u64 = 10_000;
/// Default Monte-Carlo step in units of `1/omega`.
pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

fn default_true() -> bool {
    true
}

/// The document as written by the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub omega: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub gamma: NoiseCovariance,
    #[serde(default = "default_true")]
    pub unit_omega: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<SeriesKind>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_stop: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_traj: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_stride: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

/// Validated configuration in absolute units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub params: ModelParams,
    /// Requested variant, or the narrowest exact one for `gamma`; `None`
    /// when `gamma12` or `gamma13` is non-zero and none was requested.
    pub variant: Option<Variant>,
    pub variants: Vec<SeriesKind>,
    pub alpha_range: GridRange,
    pub t_range: GridRange,
    pub omega_range: Option<GridRange>,
    pub mc: TrajectoryConfig,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.mc.master_seed = seed;
        self
    }
}

fn range(
    key: &str,
    start: Option<f64>,
    stop: Option<f64>,
    points: Option<usize>,
    defaults: (f64, f64, usize),
    scale: f64,
) -> Result<GridRange> {
    let r = GridRange::new(
        start.unwrap_or(defaults.0) * scale,
        stop.unwrap_or(defaults.1) * scale,
        points.unwrap_or(defaults.2),
    );
    r.validate().map_err(|e| CliError::validation(key, e))?;
    Ok(r)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build(raw)
}

fn build(raw: RawConfig) -> Result<RunConfig> {
    let w = raw.omega;
    if !w.is_finite() || w < 0.0 {
        return Err(CliError::validation(
            "omega",
            format!("must be finite and >= 0, got {w}"),
        ));
    }
    let (rate, time) = match (raw.unit_omega, w > 0.0) {
        (true, true) => (w, 1.0 / w),
        _ => (1.0, 1.0),
    };
    let gamma = raw
        .gamma
        .scaled(rate)
        .validate()
        .map_err(|e| CliError::validation("gamma", e))?;
    let params = ModelParams::new(w, raw.alpha * rate, gamma)
        .map_err(|e| CliError::validation("alpha", e))?;

    let variant = match raw.variant {
        Some(v) => {
            v.check(&gamma)
                .map_err(|e| CliError::validation("variant", e))?;
            Some(v)
        }
        None => Variant::narrowest_for(&gamma),
    };
    let variants = raw.variants.clone().unwrap_or_else(|| {
        vec![
            SeriesKind::Noiseless,
            SeriesKind::Diagonal,
            SeriesKind::Full,
        ]
    });
    if variants.is_empty() {
        return Err(CliError::validation("variants", "must not be empty"));
    }

    let alpha_range = range(
        "alpha_*",
        raw.alpha_start,
        raw.alpha_stop,
        raw.alpha_points,
        (0.0, 16.0, 1001),
        rate,
    )?;
    let t_range = range(
        "t_*",
        raw.t_start,
        raw.t_stop,
        raw.t_points,
        (0.0, 6.0, 601),
        time,
    )?;
    if t_range.start < 0.0 {
        return Err(CliError::validation("t_start", "must be >= 0"));
    }
    let omega_range = match (raw.omega_start, raw.omega_stop, raw.omega_points) {
        (None, None, None) => None,
        (start, stop, points) => Some(range("omega_*", start, stop, points, (0.0, w, 51), 1.0)?),
    };

    let seed = raw.seed.unwrap_or(DEFAULT_SEED);
    let mc = TrajectoryConfig {
        dt: raw.dt.unwrap_or(DEFAULT_DT) * time,
        t_max: raw.t_max.map_or(t_range.stop, |t| t * time),
        n_traj: raw.n_traj.unwrap_or(DEFAULT_N_TRAJ),
        master_seed: seed,
        record_stride: raw.record_stride,
        record_readouts: false,
    };
    if mc.n_traj == 0 {
        return Err(CliError::validation("n_traj", "must be >= 1"));
    }

    Ok(RunConfig {
        output: raw.output.clone(),
        format: raw.format.unwrap_or_default(),
        raw,
        params,
        variant,
        variants,
        alpha_range,
        t_range,
        omega_range,
        mc,
        seed,
    })
}
