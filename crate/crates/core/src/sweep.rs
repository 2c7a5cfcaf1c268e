//! Batch evaluations over a parameter grid: survival-vs-time families,
//! decay-rate curves and brute-force maps of the enhancement region.
//!
//! Grid points are evaluated in parallel; outputs are always ordered by
//! grid index.

use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{ModelParams, Variant};
use crate::spectral::{self, eigenvalues_numeric, enhancement_interval, exceptional_point};
use crate::survival::survival_closed_form;
use crate::trajectory::{run_ensemble, TrajectoryConfig};
use crate::Liouvillian;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Absolute resolution (in units of ω) of refined region endpoints.
pub const ENDPOINT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Alpha,
    Time,
    Omega,
}

/// `n_points` evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub start: f64,
    pub stop: f64,
    pub n_points: usize,
}

impl GridRange {
    pub fn new(start: f64, stop: f64, n_points: usize) -> Self {
        Self {
            start,
            stop,
            n_points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(invalid("n_points", "a grid needs at least two points"));
        }
        if !self.start.is_finite() || !self.stop.is_finite() || self.start >= self.stop {
            return Err(invalid(
                "range",
                format!(
                    "need finite start < stop, got [{}, {}]",
                    self.start, self.stop
                ),
            ));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.n_points - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let step = self.step();
        (0..self.n_points)
            .map(|k| {
                if k + 1 == self.n_points {
                    self.stop
                } else {
                    self.start + step * k as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Noiseless,
    Diagonal,
    Full,
    MonteCarlo,
}

impl SeriesKind {
    pub fn variant(self) -> Option<Variant> {
        match self {
            SeriesKind::Noiseless => Some(Variant::Noiseless),
            SeriesKind::Diagonal => Some(Variant::Diagonal),
            SeriesKind::Full => Some(Variant::Full),
            SeriesKind::MonteCarlo => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::Noiseless => "noiseless",
            SeriesKind::Diagonal => "diagonal",
            SeriesKind::Full => "full",
            SeriesKind::MonteCarlo => "montecarlo",
        }
    }
}

impl std::str::FromStr for SeriesKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "montecarlo" => Ok(SeriesKind::MonteCarlo),
            other => other.parse::<Variant>().map(|v| match v {
                Variant::Noiseless => SeriesKind::Noiseless,
                Variant::Diagonal => SeriesKind::Diagonal,
                Variant::Full => SeriesKind::Full,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub range: GridRange,
    /// Parameters shared by every series; each analytic series sees the
    /// noise projected onto its variant.
    pub params: ModelParams,
    pub variants: Vec<SeriesKind>,
    pub mc_config: Option<TrajectoryConfig>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.range.validate()?;
        self.params.validate()?;
        if self.variants.is_empty() {
            return Err(invalid("variants", "at least one series is required"));
        }
        if self.variants.contains(&SeriesKind::MonteCarlo) && self.mc_config.is_none() {
            return Err(invalid(
                "mc_config",
                "the montecarlo series needs a trajectory config",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marker {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMeta {
    pub params: ModelParams,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch; left empty unless [`SweepResult::stamped`]
    /// is called, so that repeated runs serialize identically.
    pub created_unix: Option<u64>,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub axis_values: Vec<f64>,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
    pub meta: SweepMeta,
}

impl SweepResult {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.series
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.values.as_slice())
    }

    pub fn marker(&self, name: &str) -> Option<f64> {
        self.markers
            .iter()
            .find(|m| m.name == name)
            .map(|m| m.value)
    }

    pub fn stamped(mut self) -> Self {
        self.meta.created_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
        self
    }

    pub fn all_finite(&self) -> bool {
        self.axis_values.iter().all(|v| v.is_finite())
            && self
                .series
                .iter()
                .all(|s| s.values.iter().all(|v| v.is_finite()))
    }
}

fn meta(spec: &SweepSpec) -> SweepMeta {
    SweepMeta {
        params: spec.params,
        seed: spec.mc_config.map(|c| c.master_seed),
        created_unix: None,
        tool_version: TOOL_VERSION.to_string(),
    }
}

fn par_eval<F>(points: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    points.par_iter().map(|&x| f(x)).collect()
}

/// Linear interpolation of `(xs, ys)` at `x`, clamped to the end values.
fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    match xs.partition_point(|&v| v <= x) {
        0 => ys[0],
        i if i >= xs.len() => ys[xs.len() - 1],
        i => {
            let (x0, x1) = (xs[i - 1], xs[i]);
            ys[i - 1] + (ys[i] - ys[i - 1]) * (x - x0) / (x1 - x0)
        }
    }
}

/// Survival probability of every requested series on a time grid.
///
/// The Monte-Carlo series is run up to the last grid time and interpolated
/// onto the grid; its standard error is emitted as `montecarlo_stderr`.
pub fn sweep_survival_vs_time(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    if spec.axis != SweepAxis::Time {
        return Err(invalid("axis", "survival sweeps run along the time axis"));
    }
    if spec.range.start < 0.0 {
        return Err(invalid("range", "times must be non-negative"));
    }
    let times = spec.range.points();
    let mut series = Vec::new();
    for &kind in &spec.variants {
        match kind.variant() {
            Some(variant) => {
                let p = spec.params.projected(variant);
                let values = par_eval(&times, |t| survival_closed_form(&p, t, variant))?;
                series.push(Series {
                    name: kind.name().into(),
                    values,
                });
            }
            None => {
                let cfg = TrajectoryConfig {
                    t_max: spec.range.stop,
                    ..spec.mc_config.expect("validated")
                };
                let ens = run_ensemble(&spec.params, &cfg)?;
                let at = |ys: &[f64]| -> Vec<f64> {
                    times
                        .iter()
                        .map(|&t| interpolate(&ens.t_grid, ys, t))
                        .collect()
                };
                series.push(Series {
                    name: kind.name().into(),
                    values: at(&ens.p_mean),
                });
                series.push(Series {
                    name: "montecarlo_stderr".into(),
                    values: at(&ens.p_stderr),
                });
            }
        }
    }
    Ok(SweepResult {
        axis: SweepAxis::Time,
        axis_values: times,
        series,
        markers: Vec::new(),
        meta: meta(spec),
    })
}

/// Long-time decay rate `|Re λ3|` along the α (or ω) axis for each
/// analytic series, with exceptional-point and enhancement-window markers
/// (`alpha_exc_<variant>`, `alpha1_<variant>`, `alpha2_<variant>`) computed
/// at the fixed parameters.
pub fn sweep_decay_rate(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let with_axis = |x: f64| -> ModelParams {
        match spec.axis {
            SweepAxis::Omega => spec.params.with_omega(x),
            _ => spec.params.with_alpha(x),
        }
    };
    if spec.axis == SweepAxis::Time {
        return Err(invalid(
            "axis",
            "decay-rate sweeps run along alpha or omega",
        ));
    }
    if spec.range.start < 0.0 {
        return Err(invalid("range", "rates must be non-negative"));
    }
    let xs = spec.range.points();
    let mut series = Vec::new();
    let mut markers = Vec::new();
    for &kind in &spec.variants {
        let variant = kind
            .variant()
            .ok_or_else(|| invalid("variants", "decay rates have no Monte-Carlo series"))?;
        let values = par_eval(&xs, |x| {
            spectral::decay_rate(&with_axis(x).projected(variant), variant)
        })?;
        series.push(Series {
            name: kind.name().into(),
            values,
        });

        let p = spec.params.projected(variant);
        if let Some(a) = exceptional_point(&p, variant)? {
            markers.push(Marker {
                name: format!("alpha_exc_{}", variant.name()),
                value: a,
            });
        }
        if variant != Variant::Noiseless {
            if let Some((lo, hi)) = enhancement_interval(&p, variant)?.interval {
                markers.push(Marker {
                    name: format!("alpha1_{}", variant.name()),
                    value: lo,
                });
                markers.push(Marker {
                    name: format!("alpha2_{}", variant.name()),
                    value: hi,
                });
            }
        }
    }
    Ok(SweepResult {
        axis: spec.axis,
        axis_values: xs,
        series,
        markers,
        meta: meta(spec),
    })
}

pub fn sweep_decay_rate_vs_alpha(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.axis != SweepAxis::Alpha {
        return Err(invalid("axis", "expected the alpha axis"));
    }
    sweep_decay_rate(spec)
}

/// Brute-force region scan over α (and optionally ω).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionScanSpec {
    pub params: ModelParams,
    pub variant: Variant,
    pub alpha: GridRange,
    /// When absent only `params.omega` is scanned.
    pub omega: Option<GridRange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRow {
    pub omega: f64,
    /// `decay_rate(variant) < decay_rate(noiseless)` at each α.
    pub enhanced: Vec<bool>,
    /// Maximal runs of `enhanced`, endpoints refined by bisection unless they
    /// sit on the edge of the grid.
    pub intervals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub variant: Variant,
    pub alphas: Vec<f64>,
    pub rows: Vec<RegionRow>,
}

/// Whether noise of `variant` lowers the long-time decay rate at `p`.
pub fn noise_slows_decay(p: &ModelParams, variant: Variant) -> Result<bool> {
    let noisy = spectral::decay_rate(&p.projected(variant), variant)?;
    let clean = spectral::decay_rate(&p.projected(Variant::Noiseless), Variant::Noiseless)?;
    Ok(noisy < clean)
}

fn bisect<F: Fn(f64) -> Result<bool>>(
    mut inside: f64,
    mut outside: f64,
    tol: f64,
    pred: F,
) -> Result<f64> {
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        if pred(mid)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

fn region_row(p: &ModelParams, variant: Variant, alphas: &[f64]) -> Result<RegionRow> {
    let enhanced: Vec<bool> = alphas
        .par_iter()
        .map(|&a| noise_slows_decay(&p.with_alpha(a), variant))
        .collect::<Result<_>>()?;
    let tol = ENDPOINT_TOLERANCE * if p.omega > 0.0 { p.omega } else { 1.0 };
    let pred = |a: f64| noise_slows_decay(&p.with_alpha(a), variant);

    let mut intervals = Vec::new();
    let mut k = 0;
    while k < enhanced.len() {
        if !enhanced[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < enhanced.len() && enhanced[k + 1] {
            k += 1;
        }
        let lo = if start == 0 {
            alphas[0]
        } else {
            bisect(alphas[start], alphas[start - 1], tol, pred)?
        };
        let hi = if k + 1 == enhanced.len() {
            alphas[k]
        } else {
            bisect(alphas[k], alphas[k + 1], tol, pred)?
        };
        intervals.push((lo, hi));
        k += 1;
    }
    Ok(RegionRow {
        omega: p.omega,
        enhanced,
        intervals,
    })
}

pub fn scan_enhancement_region(spec: &RegionScanSpec) -> Result<RegionMap> {
    spec.alpha.validate()?;
    spec.params.validate()?;
    if spec.variant == Variant::Noiseless {
        return Err(invalid(
            "variant",
            "region scans compare a noisy variant with the noiseless one",
        ));
    }
    spec.variant
        .check(&spec.variant.project(&spec.params.gamma))?;
    let omegas = match &spec.omega {
        Some(range) => {
            range.validate()?;
            range.points()
        }
        None => vec![spec.params.omega],
    };
    let alphas = spec.alpha.points();
    let rows = omegas
        .iter()
        .map(|&w| region_row(&spec.params.with_omega(w), spec.variant, &alphas))
        .collect::<Result<_>>()?;
    Ok(RegionMap {
        variant: spec.variant,
        alphas,
        rows,
    })
}

/// True when the numeric spectrum of `p` has a complex pair.
pub fn numeric_spectrum_oscillates(p: &ModelParams) -> bool {
    let d = eigenvalues_numeric(&Liouvillian::new(p));
    let tol = spectral::OSCILLATION_TOLERANCE * p.omega.max(f64::MIN_POSITIVE);
    d.eigenvalues.iter().any(|z| z.im.abs() > tol)
}

/// Locates the oscillatory-to-Zeno transition from the numeric spectrum
/// alone: the first grid interval over which the complex pair disappears,
/// refined by bisection to [`ENDPOINT_TOLERANCE`]. `None` when no such
/// transition lies on the grid.
pub fn scan_exceptional_point_numeric(p: &ModelParams, alpha: &GridRange) -> Result<Option<f64>> {
    alpha.validate()?;
    let alphas = alpha.points();
    let oscillating: Vec<bool> = alphas
        .par_iter()
        .map(|&a| numeric_spectrum_oscillates(&p.with_alpha(a)))
        .collect();
    let Some(k) = oscillating.windows(2).position(|w| w[0] && !w[1]) else {
        return Ok(None);
    };
    let tol = ENDPOINT_TOLERANCE * if p.omega > 0.0 { p.omega } else { 1.0 };
    let edge = bisect(alphas[k + 1], alphas[k], tol, |a| {
        Ok(!numeric_spectrum_oscillates(&p.with_alpha(a)))
    })?;
    Ok(Some(edge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NoiseCovariance;

    #[test]
    fn grid_points_hit_both_ends() {
        let g = GridRange::new(0.0, 16.0, 1001);
        let pts = g.points();
        assert_eq!(pts.len(), 1001);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[1000], 16.0);
        assert!(GridRange::new(1.0, 1.0, 5).validate().is_err());
        assert!(GridRange::new(0.0, 1.0, 1).validate().is_err());
    }

    #[test]
    fn interpolation_is_exact_on_nodes() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [1.0, 3.0, 2.0];
        assert_eq!(interpolate(&xs, &ys, 1.0), 3.0);
        assert_eq!(interpolate(&xs, &ys, 0.5), 2.0);
        assert_eq!(interpolate(&xs, &ys, 5.0), 2.0);
    }

    #[test]
    fn montecarlo_without_config_is_rejected() {
        let spec = SweepSpec {
            axis: SweepAxis::Time,
            range: GridRange::new(0.0, 1.0, 3),
            params: ModelParams::noiseless(1.0, 4.0).unwrap(),
            variants: vec![SeriesKind::MonteCarlo],
            mc_config: None,
        };
        assert!(sweep_survival_vs_time(&spec).is_err());
    }

    #[test]
    fn zero_noise_rates_coincide() {
        let spec = SweepSpec {
            axis: SweepAxis::Alpha,
            range: GridRange::new(0.0, 16.0, 161),
            params: ModelParams::noiseless(1.0, 0.0).unwrap(),
            variants: vec![
                SeriesKind::Noiseless,
                SeriesKind::Diagonal,
                SeriesKind::Full,
            ],
            mc_config: None,
        };
        let r = sweep_decay_rate_vs_alpha(&spec).unwrap();
        let n = r.series("noiseless").unwrap();
        assert_eq!(n, r.series("diagonal").unwrap());
        assert_eq!(n, r.series("full").unwrap());
    }

    #[test]
    fn swapped_noise_has_empty_region() {
        let p = ModelParams::new(1.0, 0.0, NoiseCovariance::diagonal(0.05, 1.0, 0.1)).unwrap();
        let map = scan_enhancement_region(&RegionScanSpec {
            params: p,
            variant: Variant::Diagonal,
            alpha: GridRange::new(0.0, 16.0, 401),
            omega: None,
        })
        .unwrap();
        assert!(map.rows[0].enhanced.iter().all(|e| !e));
        assert!(map.rows[0].intervals.is_empty());
    }
}
