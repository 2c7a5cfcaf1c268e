mod common;

use common::{reference, reference_noise};
use proptest::prelude::*;
use zeno_core::spectral::enhancement_interval;
use zeno_core::sweep::{
    scan_enhancement_region, scan_exceptional_point_numeric, sweep_decay_rate_vs_alpha,
    sweep_survival_vs_time, GridRange, RegionScanSpec, SeriesKind, SweepAxis, SweepResult,
    SweepSpec,
};
use zeno_core::{ModelParams, NoiseCovariance, TrajectoryConfig, Variant};

fn decay_spec(params: ModelParams) -> SweepSpec {
    SweepSpec {
        axis: SweepAxis::Alpha,
        range: GridRange::new(0.0, 16.0 * params.omega, 1001),
        params,
        variants: vec![
            SeriesKind::Noiseless,
            SeriesKind::Diagonal,
            SeriesKind::Full,
        ],
        mc_config: None,
    }
}

fn region(params: ModelParams, variant: Variant) -> (Vec<(f64, f64)>, f64) {
    let alpha = GridRange::new(0.0, 16.0 * params.omega, 1001);
    let map = scan_enhancement_region(&RegionScanSpec {
        params,
        variant,
        alpha,
        omega: None,
    })
    .unwrap();
    (map.rows[0].intervals.clone(), alpha.step())
}

#[test]
fn reference_regions() {
    let (diag, step) = region(reference(0.0), Variant::Diagonal);
    assert_eq!(diag.len(), 1);
    assert!(
        (diag[0].0 - 5.7295).abs() <= step && (diag[0].1 - 10.531).abs() <= step,
        "{diag:?}"
    );
    let (full, _) = region(reference(0.0), Variant::Full);
    assert_eq!(full.len(), 1);
    assert!(
        (full[0].0 - 5.4156).abs() <= step && (full[0].1 - 11.3671).abs() <= step,
        "{full:?}"
    );
}

#[test]
fn weak_drive_has_no_diagonal_region() {
    let p = ModelParams::new(0.1, 0.0, reference_noise()).unwrap();
    assert!(
        !enhancement_interval(&p.projected(Variant::Diagonal), Variant::Diagonal)
            .unwrap()
            .conditions
            .b
    );
    let (diag, _) = region(p, Variant::Diagonal);
    assert!(diag.is_empty(), "{diag:?}");
}

#[test]
fn omega_rows_are_scanned_in_order() {
    let map = scan_enhancement_region(&RegionScanSpec {
        params: reference(0.0),
        variant: Variant::Diagonal,
        alpha: GridRange::new(0.0, 16.0, 161),
        omega: Some(GridRange::new(0.1, 2.0, 5)),
    })
    .unwrap();
    let omegas: Vec<f64> = map.rows.iter().map(|r| r.omega).collect();
    assert_eq!(omegas, GridRange::new(0.1, 2.0, 5).points());
    assert!(map.rows[0].intervals.is_empty());
    assert!(!map.rows[4].intervals.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn closed_form_interval_matches_brute_force(
        w in 0.5..2.0f64,
        g in (0.0..0.3f64, 0.0..0.3f64, 0.3..1.5f64, -0.9..0.9f64),
        full in any::<bool>(),
    ) {
        let g23 = if full { g.3 * (g.1 * g.2).sqrt() } else { 0.0 };
        let variant = if full { Variant::Full } else { Variant::Diagonal };
        let p = ModelParams::new(w, 0.0, NoiseCovariance::new(g.0, g.1, g.2, 0.0, 0.0, g23).scaled(w)).unwrap();
        let closed = enhancement_interval(&p, variant).unwrap().interval;
        let (brute, step) = region(p, variant);
        let top = 16.0 * w;
        match closed {
            Some((lo, hi)) if lo < top - step && hi > step => {
                prop_assert_eq!(brute.len(), 1, "closed {:?} brute {:?}", closed, brute);
                let (blo, bhi) = brute[0];
                prop_assert!((blo - lo.max(0.0)).abs() <= step, "{} vs {}", blo, lo);
                prop_assert!((bhi - hi.min(top)).abs() <= step, "{} vs {}", bhi, hi);
            }
            Some(_) => {}
            None => prop_assert!(brute.is_empty(), "{:?}", brute),
        }
    }
}

#[test]
fn numeric_scan_finds_the_noiseless_exceptional_point() {
    let p = ModelParams::noiseless(1.0, 0.0).unwrap();
    let edge = scan_exceptional_point_numeric(&p, &GridRange::new(0.0, 16.0, 801))
        .unwrap()
        .unwrap();
    assert!((edge - 8.0).abs() <= 0.02, "{edge}");
}

#[test]
fn decay_sweep_is_finite_and_marked() {
    let r = sweep_decay_rate_vs_alpha(&decay_spec(reference(0.0))).unwrap();
    assert!(r.all_finite());
    assert_eq!(r.series.len(), 3);
    assert_eq!(r.marker("alpha_exc_noiseless"), Some(8.0));
    assert!((r.marker("alpha_exc_diagonal").unwrap() - 4.4).abs() < 1e-12);
    assert!((r.marker("alpha1_full").unwrap() - 5.4156).abs() < 1e-4);
    assert!((r.marker("alpha2_diagonal").unwrap() - 10.531).abs() < 1e-3);
}

#[test]
fn sweep_results_round_trip_through_json() {
    let r = sweep_decay_rate_vs_alpha(&decay_spec(reference(0.0)))
        .unwrap()
        .stamped();
    assert!(r.meta.created_unix.is_some());
    let text = serde_json::to_string(&r).unwrap();
    let back: SweepResult = serde_json::from_str(&text).unwrap();
    assert_eq!(r, back);
}

#[test]
fn monte_carlo_series_envelopes_the_closed_form() {
    let mut cfg = TrajectoryConfig::new(1e-3, 0.0, 4000, 42);
    cfg.record_stride = Some(20);
    let spec = SweepSpec {
        axis: SweepAxis::Time,
        range: GridRange::new(0.0, 6.0, 301),
        params: reference(8.5),
        variants: vec![SeriesKind::Full, SeriesKind::MonteCarlo],
        mc_config: Some(cfg),
    };
    let r = sweep_survival_vs_time(&spec).unwrap();
    assert!(r.all_finite());
    let (exact, mc, se) = (
        r.series("full").unwrap(),
        r.series("montecarlo").unwrap(),
        r.series("montecarlo_stderr").unwrap(),
    );
    let inside = (0..exact.len())
        .filter(|&k| (mc[k] - exact[k]).abs() <= 5.0 * se[k] + 1e-12)
        .count();
    assert!(
        inside as f64 >= 0.99 * exact.len() as f64,
        "{inside}/{}",
        exact.len()
    );
}

#[test]
fn invalid_specs_are_rejected() {
    let mut spec = decay_spec(reference(0.0));
    spec.axis = SweepAxis::Time;
    assert!(sweep_decay_rate_vs_alpha(&spec).is_err());
    let mut spec = decay_spec(reference(0.0));
    spec.range = GridRange::new(0.0, 16.0, 1);
    assert!(sweep_decay_rate_vs_alpha(&spec).is_err());
    let mut spec = decay_spec(reference(0.0));
    spec.variants = vec![SeriesKind::MonteCarlo];
    assert!(sweep_decay_rate_vs_alpha(&spec).is_err());
}
