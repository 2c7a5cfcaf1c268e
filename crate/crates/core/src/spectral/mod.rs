//! Liouvillian spectra: closed-form eigenvalues, exceptional points, decay
//! rates and the measurement-strength window in which noise slows the
//! long-time decay.

pub mod numeric;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZenoError};
use crate::liouvillian::Liouvillian;
use crate::model::{ModelParams, Variant};
use crate::reduced::ReducedRates;

pub use numeric::{decompose, eigenvalues_numeric, SpectralDecomposition, CONDITION_LIMIT};

/// `|Im λ3|` below this (times ω) counts as a real eigenvalue.
pub const OSCILLATION_TOLERANCE: f64 = 1e-9;

/// `(λ1, λ2, λ3)` in the closed-form labelling: `λ1` is the decoupled
/// x mode, `λ3` the slow (y, z) mode that governs the survival probability.
/// For complex pairs `Im λ2 < 0 < Im λ3`.
pub fn eigenvalues_closed_form(p: &ModelParams, variant: Variant) -> Result<[Complex64; 3]> {
    Ok(eigenvalues_from_rates(&ReducedRates::new(p, variant)?))
}

pub(crate) fn eigenvalues_from_rates(r: &ReducedRates) -> [Complex64; 3] {
    let lambda1 = Complex64::new(-r.alpha_dn / 2.0 - 4.0 * r.g22, 0.0);
    let total = r.alpha_dn + 8.0 * r.dephasing;
    let d = r.discriminant;
    let (lambda2, lambda3) = if r.is_defective() {
        let v = Complex64::new(-total / 4.0, 0.0);
        (v, v)
    } else if d > 0.0 {
        let root = d.sqrt();
        // α_dn - √D without cancellation when α_dn > 0.
        let gap = if r.alpha_dn > 0.0 {
            64.0 * r.drive_sq / (r.alpha_dn + root)
        } else {
            r.alpha_dn - root
        };
        (
            Complex64::new(-(total + root) / 4.0, 0.0),
            Complex64::new(-(8.0 * r.dephasing + gap) / 4.0, 0.0),
        )
    } else {
        let im = (-d).sqrt() / 4.0;
        (
            Complex64::new(-total / 4.0, -im),
            Complex64::new(-total / 4.0, im),
        )
    };
    [lambda1, lambda2, lambda3]
}

/// Measurement strength at which `λ2 = λ3`, or `None` when it would be
/// non-positive or when `|γ23| ≥ ω` keeps the pair real for every α.
pub fn exceptional_point(p: &ModelParams, variant: Variant) -> Result<Option<f64>> {
    let r = ReducedRates::new(p, variant)?;
    Ok(exceptional_point_from_rates(p, &r))
}

fn exceptional_point_from_rates(p: &ModelParams, r: &ReducedRates) -> Option<f64> {
    if r.drive_sq <= 0.0 {
        return None;
    }
    let alpha = 8.0 * r.drive_sq.sqrt() + 4.0 * (p.gamma.g22 - p.gamma.g33);
    (alpha > 0.0).then_some(alpha)
}

/// Long-time decay rate of the survival probability, `|Re λ3|`.
pub fn decay_rate(p: &ModelParams, variant: Variant) -> Result<f64> {
    Ok(eigenvalues_closed_form(p, variant)?[2].re.abs())
}

/// The three requirements for noise to slow the long-time decay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnhancementConditions {
    /// `γ33 > γ22`.
    pub a: bool,
    /// `ω > ((γ11+γ22)(γ11+γ33) - γ23²)/(γ33 - γ22)`.
    pub b: bool,
    /// `α1 < α < α2`.
    pub c: bool,
}

impl EnhancementConditions {
    pub fn all(&self) -> bool {
        self.a && self.b && self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnhancementReport {
    pub conditions: EnhancementConditions,
    /// `(α1, α2)`; `α2` is infinite for pure `γ33` noise.
    pub interval: Option<(f64, f64)>,
}

/// Window of measurement strengths in which the noisy decay rate is below
/// the noiseless one at the same ω, together with conditions (a)–(c) at
/// `p.alpha`.
pub fn enhancement_interval(p: &ModelParams, variant: Variant) -> Result<EnhancementReport> {
    if variant == Variant::Noiseless {
        return Err(ZenoError::VariantMismatch {
            variant,
            reason: "enhancement is defined relative to the noiseless system".into(),
        });
    }
    variant.check(&p.gamma)?;
    let g = &p.gamma;
    let w = p.omega;

    let a = g.g33 > g.g22;
    let pq = (g.g11 + g.g22) * (g.g11 + g.g33);
    let g23_sq = g.g23 * g.g23;
    let b = a && w > (pq - g23_sq) / (g.g33 - g.g22);

    let interval = (a && b).then(|| {
        let spread = 2.0 * g.g11 + g.g22 + g.g33;
        let lower = 4.0 * (g.g22 - g.g33 + (4.0 * (w * w - g23_sq) + spread * spread).sqrt());
        let upper = if pq > 0.0 {
            let r = 1.0 - g23_sq / pq;
            2.0 * ((g.g22 - g.g33) * r + spread * (r * r + 4.0 * w * w / pq).sqrt())
        } else {
            f64::INFINITY
        };
        (lower, upper)
    });
    let c = interval.is_some_and(|(lo, hi)| lo < p.alpha && p.alpha < hi);

    Ok(EnhancementReport {
        conditions: EnhancementConditions { a, b, c },
        interval,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Oscillatory,
    Zeno,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Enhancement {
    Suppressed,
    Enhanced,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub variant: Variant,
    pub alpha_exc: Option<f64>,
    pub regime: Regime,
    pub decay_rate: f64,
    /// Absent for the noiseless variant.
    pub enhancement: Option<Enhancement>,
    pub interval: Option<(f64, f64)>,
    pub conditions: Option<EnhancementConditions>,
    /// `|γ23| ≥ ω`: the closed forms still hold but the weak-noise picture
    /// of an oscillatory-to-Zeno transition no longer applies.
    pub beyond_weak_noise: bool,
}

pub fn classify_regime(p: &ModelParams, variant: Variant) -> Result<RegimeReport> {
    let r = ReducedRates::new(p, variant)?;
    let lambda3 = eigenvalues_from_rates(&r)[2];
    let regime = if lambda3.im.abs() > OSCILLATION_TOLERANCE * p.omega {
        Regime::Oscillatory
    } else {
        Regime::Zeno
    };
    let (enhancement, interval, conditions) = match variant {
        Variant::Noiseless => (None, None, None),
        _ => {
            let report = enhancement_interval(p, variant)?;
            let e = if report.conditions.all() {
                Enhancement::Enhanced
            } else {
                Enhancement::Suppressed
            };
            (Some(e), report.interval, Some(report.conditions))
        }
    };
    Ok(RegimeReport {
        variant,
        alpha_exc: exceptional_point_from_rates(p, &r),
        regime,
        decay_rate: lambda3.re.abs(),
        enhancement,
        interval,
        conditions,
        beyond_weak_noise: p.gamma.g23.abs() >= p.omega,
    })
}

/// Largest deviation between the numeric spectrum of the complete
/// Liouvillian and the full-noise closed form that ignores `γ12`, `γ13`.
/// Eigenvalues are matched by the best of the six pairings.
pub fn offdiag_perturbation_error(p: &ModelParams) -> f64 {
    let closed = eigenvalues_from_rates(&ReducedRates::unchecked(p));
    let numeric = eigenvalues_numeric(&Liouvillian::new(p)).eigenvalues;
    max_matched_deviation(&closed, &numeric)
}

/// `min over permutations π of max_k |a_k - b_π(k)|`.
pub fn max_matched_deviation(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    const PERMUTATIONS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    PERMUTATIONS
        .iter()
        .map(|perm| {
            (0..3)
                .map(|k| (a[k] - b[perm[k]]).norm())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NoiseCovariance;

    fn reference_noise() -> NoiseCovariance {
        NoiseCovariance::new(0.05, 0.1, 1.0, 0.0, 0.0, 0.3)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn noiseless_eigenvalues_at_alpha_ten() {
        let p = ModelParams::noiseless(1.0, 10.0).unwrap();
        let l = eigenvalues_closed_form(&p, Variant::Noiseless).unwrap();
        let re: Vec<f64> = l.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![-5.0, -4.0, -1.0]);
        assert!(l.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn noiseless_eigenvalues_coalesce_at_eight() {
        let p = ModelParams::noiseless(1.0, 8.0).unwrap();
        let l = eigenvalues_closed_form(&p, Variant::Noiseless).unwrap();
        assert_eq!(l[1], Complex64::new(-2.0, 0.0));
        assert_eq!(l[2], Complex64::new(-2.0, 0.0));
    }

    #[test]
    fn full_noise_radicand_positive_at_4_4() {
        let p = ModelParams::new(1.0, 4.4, reference_noise()).unwrap();
        let r = ReducedRates::new(&p, Variant::Full).unwrap();
        assert!(close(r.discriminant, 64.0 - 58.24, 1e-12));
        let l = eigenvalues_closed_form(&p, Variant::Full).unwrap();
        assert!(l.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn exceptional_points() {
        let p = ModelParams::noiseless(1.0, 0.0).unwrap();
        assert_eq!(
            exceptional_point(&p, Variant::Noiseless).unwrap(),
            Some(8.0)
        );
        let dn = ModelParams::new(1.0, 0.0, NoiseCovariance::diagonal(0.05, 0.1, 1.0)).unwrap();
        assert!(close(
            exceptional_point(&dn, Variant::Diagonal).unwrap().unwrap(),
            4.4,
            1e-14
        ));
        let fnp = ModelParams::new(1.0, 0.0, reference_noise()).unwrap();
        let expected = 4.0 * (2.0 * 0.91f64.sqrt() - 0.9);
        assert!(close(
            exceptional_point(&fnp, Variant::Full).unwrap().unwrap(),
            expected,
            1e-14
        ));
        assert!(close(expected, 4.0315, 1e-4));
    }

    #[test]
    fn strong_cross_correlation_removes_exceptional_point() {
        let g = NoiseCovariance::new(0.0, 1.2, 1.2, 0.0, 0.0, 1.1);
        let p = ModelParams::new(1.0, 3.0, g).unwrap();
        assert_eq!(exceptional_point(&p, Variant::Full).unwrap(), None);
        let report = classify_regime(&p, Variant::Full).unwrap();
        assert_eq!(report.regime, Regime::Zeno);
        assert!(report.beyond_weak_noise);
    }

    #[test]
    fn decay_rates() {
        let p = ModelParams::noiseless(1.0, 10.0).unwrap();
        assert!(close(
            decay_rate(&p, Variant::Noiseless).unwrap(),
            1.0,
            1e-15
        ));
        assert!(close(
            decay_rate(&p.with_alpha(8.0), Variant::Noiseless).unwrap(),
            2.0,
            1e-15
        ));
        for v in Variant::ALL {
            assert_eq!(decay_rate(&p.with_alpha(0.0), v).unwrap(), 0.0);
        }
    }

    #[test]
    fn diagonal_interval_at_reference_noise() {
        let p = ModelParams::new(1.0, 8.5, NoiseCovariance::diagonal(0.05, 0.1, 1.0)).unwrap();
        let rep = enhancement_interval(&p, Variant::Diagonal).unwrap();
        assert!(rep.conditions.a && rep.conditions.b && rep.conditions.c);
        let (lo, hi) = rep.interval.unwrap();
        assert!(close(lo, 5.7295, 1e-4), "{lo}");
        assert!(close(hi, 10.5307, 1e-4), "{hi}");
    }

    #[test]
    fn swapped_noise_fails_condition_a() {
        let p = ModelParams::new(1.0, 8.5, NoiseCovariance::diagonal(0.05, 1.0, 0.1)).unwrap();
        let rep = enhancement_interval(&p, Variant::Diagonal).unwrap();
        assert!(!rep.conditions.a && !rep.conditions.b);
        assert_eq!(rep.interval, None);
    }

    #[test]
    fn noiseless_has_no_enhancement_interval() {
        let p = ModelParams::noiseless(1.0, 8.5).unwrap();
        assert!(enhancement_interval(&p, Variant::Noiseless).is_err());
    }

    #[test]
    fn regime_classification() {
        let p = ModelParams::noiseless(1.0, 4.0).unwrap();
        assert_eq!(
            classify_regime(&p, Variant::Noiseless).unwrap().regime,
            Regime::Oscillatory
        );
        let p = p.with_alpha(12.0);
        assert_eq!(
            classify_regime(&p, Variant::Noiseless).unwrap().regime,
            Regime::Zeno
        );
        let f = ModelParams::new(1.0, 8.5, reference_noise()).unwrap();
        let rep = classify_regime(&f, Variant::Full).unwrap();
        assert_eq!(rep.regime, Regime::Zeno);
        assert_eq!(rep.enhancement, Some(Enhancement::Enhanced));
    }

    #[test]
    fn exact_regime_has_no_perturbation_error() {
        let p = ModelParams::new(1.0, 2.0, reference_noise()).unwrap();
        assert!(offdiag_perturbation_error(&p) < 1e-9);
    }
}
