use serde::Serialize;
use zeno_core::spectral::{classify_regime, eigenvalues_closed_form, RegimeReport};
use zeno_core::sweep::{
    scan_enhancement_region, sweep_decay_rate_vs_alpha, sweep_survival_vs_time, RegionMap,
    RegionScanSpec, SeriesKind, SweepAxis, SweepResult, SweepSpec,
};
use zeno_core::trajectory::{derive_kraus_from_detector, KrausPair};
use zeno_core::{
    eigenvalues_numeric, enhancement_interval, run_ensemble, survival_closed_form, BlochState,
    Complex64, Liouvillian, ModelParams, Propagator, Variant,
};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{json_document, Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Closed-form and numeric eigenvalues with the regime report.
    Spectrum,
    /// Averaged Bloch vector and survival probability on the time grid.
    Evolve,
    /// Monte-Carlo ensemble average of the survival probability.
    Montecarlo,
    /// Decay rates of all three variants along the alpha grid.
    SweepDecay,
    /// Survival probability of the configured series along the time grid.
    SweepSurvival,
    /// Brute-force map of where noise slows the decay.
    Regions,
    /// Check the config and print the resolved parameters.
    Validate,
    /// Compare detector-derived measurement operators with the closed form.
    KrausCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
            Command::Montecarlo => "montecarlo",
            Command::SweepDecay => "sweep-decay",
            Command::SweepSurvival => "sweep-survival",
            Command::Regions => "regions",
            Command::Validate => "validate",
            Command::KrausCheck => "kraus-check",
        }
    }
}

/// Runs `command` and returns the rendered output.
pub fn dispatch(command: Command, cfg: &RunConfig) -> Result<String> {
    match command {
        Command::Spectrum => spectrum(cfg),
        Command::Evolve => evolve(cfg),
        Command::Montecarlo => montecarlo(cfg),
        Command::SweepDecay => sweep_decay(cfg),
        Command::SweepSurvival => sweep_survival(cfg),
        Command::Regions => regions(cfg),
        Command::Validate => validate(cfg),
        Command::KrausCheck => kraus_check(cfg),
    }
}

fn render<T: Serialize>(
    command: Command,
    cfg: &RunConfig,
    table: impl FnOnce() -> Table,
    result: &T,
) -> Result<String> {
    match cfg.format {
        Format::Csv => Ok(table().to_csv()),
        Format::Json => json_document(command.name(), cfg, result),
    }
}

#[derive(Debug, Serialize)]
struct Eigenvalues {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Eigenvalues {
    fn new(z: &[Complex64]) -> Self {
        Self {
            re: z.iter().map(|z| z.re).collect(),
            im: z.iter().map(|z| z.im).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
struct SpectrumReport {
    params: ModelParams,
    variant: Option<Variant>,
    /// Closed form, in the order (λ1, λ2, λ3).
    eigenvalues: Option<Eigenvalues>,
    /// Numeric, slowest mode last.
    numeric: Eigenvalues,
    condition_number: f64,
    defective: bool,
    regime: Option<RegimeReport>,
}

fn spectrum(cfg: &RunConfig) -> Result<String> {
    let p = &cfg.params;
    let closed = cfg
        .variant
        .map(|v| eigenvalues_closed_form(p, v))
        .transpose()?;
    let regime = cfg.variant.map(|v| classify_regime(p, v)).transpose()?;
    let d = eigenvalues_numeric(&Liouvillian::new(p));
    let report = SpectrumReport {
        params: *p,
        variant: cfg.variant,
        eigenvalues: closed.as_ref().map(|z| Eigenvalues::new(z)),
        numeric: Eigenvalues::new(&d.eigenvalues),
        condition_number: d.condition_number,
        defective: d.defective,
        regime,
    };
    let table = || {
        let mut t = Table::new(&["source", "index", "re", "im"]);
        let sources = closed
            .iter()
            .map(|z| ("closed", z))
            .chain([("numeric", &d.eigenvalues)]);
        for (source, values) in sources {
            for (k, z) in values.iter().enumerate() {
                t.push(vec![
                    source.into(),
                    (k as u64 + 1).into(),
                    z.re.into(),
                    z.im.into(),
                ]);
            }
        }
        t
    };
    render(Command::Spectrum, cfg, table, &report)
}

#[derive(Debug, Serialize)]
struct Evolution {
    t: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    p: Vec<f64>,
    p_closed: Option<Vec<f64>>,
}

fn evolve(cfg: &RunConfig) -> Result<String> {
    let p = &cfg.params;
    let t = cfg.t_range.points();
    let propagator = Propagator::new(&Liouvillian::new(p));
    let states = t
        .iter()
        .map(|&t| propagator.apply(&BlochState::ground(), t))
        .collect::<zeno_core::Result<Vec<_>>>()?;
    let p_closed = cfg
        .variant
        .map(|v| {
            t.iter()
                .map(|&t| survival_closed_form(p, t, v))
                .collect::<zeno_core::Result<Vec<_>>>()
        })
        .transpose()?;
    let e = Evolution {
        x: states.iter().map(|s| s.x()).collect(),
        y: states.iter().map(|s| s.y()).collect(),
        z: states.iter().map(|s| s.z()).collect(),
        p: states.iter().map(|s| s.survival_probability()).collect(),
        p_closed,
        t,
    };
    let table = || {
        let mut header = vec!["t", "x", "y", "z", "p"];
        if e.p_closed.is_some() {
            header.push("p_closed");
        }
        let mut table = Table::new(&header);
        for k in 0..e.t.len() {
            let mut row: Vec<Cell> = vec![
                e.t[k].into(),
                e.x[k].into(),
                e.y[k].into(),
                e.z[k].into(),
                e.p[k].into(),
            ];
            if let Some(c) = &e.p_closed {
                row.push(c[k].into());
            }
            table.push(row);
        }
        table
    };
    render(Command::Evolve, cfg, table, &e)
}

#[derive(Debug, Serialize)]
struct MonteCarlo {
    #[serde(flatten)]
    ensemble: zeno_core::EnsembleResult,
    p_exact: Option<Vec<f64>>,
}

fn montecarlo(cfg: &RunConfig) -> Result<String> {
    let ensemble = run_ensemble(&cfg.params, &cfg.mc)?;
    let p_exact = cfg
        .variant
        .map(|v| {
            ensemble
                .t_grid
                .iter()
                .map(|&t| survival_closed_form(&cfg.params, t, v))
                .collect::<zeno_core::Result<Vec<_>>>()
        })
        .transpose()?;
    let mc = MonteCarlo { ensemble, p_exact };
    let table = || {
        let mut header = vec!["t", "p_mean", "p_stderr"];
        if mc.p_exact.is_some() {
            header.push("p_exact");
        }
        let mut table = Table::new(&header);
        let e = &mc.ensemble;
        for k in 0..e.t_grid.len() {
            let mut row: Vec<Cell> =
                vec![e.t_grid[k].into(), e.p_mean[k].into(), e.p_stderr[k].into()];
            if let Some(x) = &mc.p_exact {
                row.push(x[k].into());
            }
            table.push(row);
        }
        table
    };
    render(Command::Montecarlo, cfg, table, &mc)
}

/// `exc_<v>` on the grid point nearest each exceptional point and `enh_<v>`
/// inside each enhancement window.
fn decay_flags(r: &SweepResult, step: f64) -> Vec<String> {
    let tags = [("noiseless", "n"), ("diagonal", "dn"), ("full", "fn")];
    r.axis_values
        .iter()
        .map(|&a| {
            let mut flags = Vec::new();
            for (name, tag) in tags {
                let nearest = |x: f64| (-step / 2.0..step / 2.0).contains(&(a - x));
                if r.marker(&format!("alpha_exc_{name}")).is_some_and(nearest) {
                    flags.push(format!("exc_{tag}"));
                }
            }
            for (name, tag) in &tags[1..] {
                let lo = r.marker(&format!("alpha1_{name}"));
                let hi = r.marker(&format!("alpha2_{name}"));
                if let (Some(lo), Some(hi)) = (lo, hi) {
                    if lo < a && a < hi {
                        flags.push(format!("enh_{tag}"));
                    }
                }
            }
            flags.join(";")
        })
        .collect()
}

fn sweep_decay(cfg: &RunConfig) -> Result<String> {
    let spec = SweepSpec {
        axis: SweepAxis::Alpha,
        range: cfg.alpha_range,
        params: cfg.params,
        variants: vec![
            SeriesKind::Noiseless,
            SeriesKind::Diagonal,
            SeriesKind::Full,
        ],
        mc_config: None,
    };
    let r = sweep_decay_rate_vs_alpha(&spec)?;
    let table = || {
        let flags = decay_flags(&r, spec.range.step());
        let mut t = Table::new(&["alpha", "rate_nonoise", "rate_dn", "rate_fn", "flags"]);
        let (n, d, f) = (
            r.series("noiseless").unwrap(),
            r.series("diagonal").unwrap(),
            r.series("full").unwrap(),
        );
        for (k, flag) in flags.into_iter().enumerate() {
            t.push(vec![
                r.axis_values[k].into(),
                n[k].into(),
                d[k].into(),
                f[k].into(),
                flag.into(),
            ]);
        }
        t
    };
    render(Command::SweepDecay, cfg, table, &r)
}

fn sweep_table(r: &SweepResult, axis: &str) -> Table {
    let header: Vec<&str> = std::iter::once(axis)
        .chain(r.series.iter().map(|s| s.name.as_str()))
        .collect();
    let mut t = Table::new(&header);
    for (k, &x) in r.axis_values.iter().enumerate() {
        let row = std::iter::once(x.into())
            .chain(r.series.iter().map(|s| s.values[k].into()))
            .collect();
        t.push(row);
    }
    t
}

fn sweep_survival(cfg: &RunConfig) -> Result<String> {
    let needs_mc = cfg.variants.contains(&SeriesKind::MonteCarlo);
    let spec = SweepSpec {
        axis: SweepAxis::Time,
        range: cfg.t_range,
        params: cfg.params,
        variants: cfg.variants.clone(),
        mc_config: needs_mc.then_some(cfg.mc),
    };
    let r = sweep_survival_vs_time(&spec)?;
    render(Command::SweepSurvival, cfg, || sweep_table(&r, "t"), &r)
}

#[derive(Debug, Serialize)]
struct ClosedInterval {
    omega: f64,
    interval: Option<(f64, f64)>,
}

#[derive(Debug, Serialize)]
struct Regions {
    map: RegionMap,
    closed_form: Vec<ClosedInterval>,
}

fn regions(cfg: &RunConfig) -> Result<String> {
    let variant = match cfg.variant {
        Some(v @ (Variant::Diagonal | Variant::Full)) => v,
        _ => {
            return Err(CliError::validation(
                "variant",
                "regions needs diagonal or full noise with gamma12 = gamma13 = 0",
            ))
        }
    };
    let map = scan_enhancement_region(&RegionScanSpec {
        params: cfg.params,
        variant,
        alpha: cfg.alpha_range,
        omega: cfg.omega_range,
    })?;
    let closed_form = map
        .rows
        .iter()
        .map(|row| {
            let p = cfg.params.with_omega(row.omega).projected(variant);
            Ok(ClosedInterval {
                omega: row.omega,
                interval: enhancement_interval(&p, variant)?.interval,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let out = Regions { map, closed_form };
    let table = || {
        let mut t = Table::new(&["omega", "alpha", "enhanced"]);
        for row in &out.map.rows {
            for (&a, &e) in out.map.alphas.iter().zip(&row.enhanced) {
                t.push(vec![row.omega.into(), a.into(), (e as u64).into()]);
            }
        }
        t
    };
    render(Command::Regions, cfg, table, &out)
}

#[derive(Debug, Serialize)]
struct Validation {
    valid: bool,
    params: ModelParams,
    variant: Option<Variant>,
    regime: Option<RegimeReport>,
}

fn validate(cfg: &RunConfig) -> Result<String> {
    let regime = cfg
        .variant
        .map(|v| classify_regime(&cfg.params, v))
        .transpose()?;
    let v = Validation {
        valid: true,
        params: cfg.params,
        variant: cfg.variant,
        regime,
    };
    let table = || {
        let g = &cfg.params.gamma;
        let mut t = Table::new(&["key", "value"]);
        for (key, value) in [
            ("omega", cfg.params.omega),
            ("alpha", cfg.params.alpha),
            ("g11", g.g11),
            ("g22", g.g22),
            ("g33", g.g33),
            ("g12", g.g12),
            ("g13", g.g13),
            ("g23", g.g23),
        ] {
            t.push(vec![key.into(), value.into()]);
        }
        let variant = cfg.variant.map_or("none", |v| v.name());
        t.push(vec!["variant".into(), variant.into()]);
        t
    };
    render(Command::Validate, cfg, table, &v)
}

pub const KRAUS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Serialize)]
struct KrausRow {
    theta: f64,
    max_abs_diff: f64,
    completeness_error: f64,
}

fn kraus_check(cfg: &RunConfig) -> Result<String> {
    let n = 100;
    let rows: Vec<KrausRow> = (0..n)
        .map(|k| {
            let theta = (k as f64 + 0.5) / n as f64 * std::f64::consts::FRAC_PI_2;
            let derived = derive_kraus_from_detector(theta);
            KrausRow {
                theta,
                max_abs_diff: derived.max_abs_diff(&KrausPair::new(theta)),
                completeness_error: derived.completeness_error(),
            }
        })
        .collect();
    if let Some(bad) = rows
        .iter()
        .find(|r| r.max_abs_diff > KRAUS_TOLERANCE || r.completeness_error > KRAUS_TOLERANCE)
    {
        return Err(CliError::Internal(format!(
            "detector-derived operators deviate at theta = {}: {:e}",
            bad.theta, bad.max_abs_diff
        )));
    }
    let table = || {
        let mut t = Table::new(&["theta", "max_abs_diff", "completeness_error"]);
        for r in &rows {
            t.push(vec![
                r.theta.into(),
                r.max_abs_diff.into(),
                r.completeness_error.into(),
            ]);
        }
        t
    };
    render(Command::KrausCheck, cfg, table, &rows)
}
