//! Closed-form survival probabilities and their short-time expansions.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{ModelParams, NoiseCovariance, Variant};
use crate::reduced::ReducedRates;

/// `P(t) = 1/2 (1 + z(t))` from the (y, z)-block solution with `z(0) = 1`.
///
/// The exponentials are combined before evaluation so that large `α` does
/// not overflow `cosh`, and the cancelling differences are rewritten via
/// `(√D - α_dn)(√D + α_dn) = -64(ω² - γ23²)`.
pub fn survival_closed_form(p: &ModelParams, t: f64, variant: Variant) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    let r = ReducedRates::new(p, variant)?;
    Ok(survival_from_rates(&r, t))
}

pub(crate) fn survival_from_rates(r: &ReducedRates, t: f64) -> f64 {
    let z = z_component(r, t);
    (0.5 * (1.0 + z)).clamp(0.0, 1.0)
}

fn z_component(r: &ReducedRates, t: f64) -> f64 {
    let decay = -(r.alpha_dn + 8.0 * r.dephasing) / 4.0;
    let d = r.discriminant;
    if r.is_defective() {
        (decay * t).exp() * (1.0 + r.alpha_dn * t / 4.0)
    } else if d > 0.0 {
        let root = d.sqrt();
        let (plus, minus) = if r.alpha_dn >= 0.0 {
            let plus = root + r.alpha_dn;
            let minus = if plus > 0.0 {
                -64.0 * r.drive_sq / plus
            } else {
                0.0
            };
            (plus, minus)
        } else {
            let minus = root - r.alpha_dn;
            (-64.0 * r.drive_sq / minus, minus)
        };
        // plus = √D + α_dn, minus = √D - α_dn
        let slow = (-8.0 * r.dephasing + minus) / 4.0;
        let fast = -(8.0 * r.dephasing + plus) / 4.0;
        0.5 * ((plus / root) * (slow * t).exp() + (minus / root) * (fast * t).exp())
    } else {
        let freq = (-d).sqrt() / 4.0;
        let k = r.alpha_dn / 4.0;
        (decay * t).exp() * ((freq * t).cos() + k / freq * (freq * t).sin())
    }
}

/// `(1 + exp(-2(γ11 + γ22) t))/2`, the `α → ∞` limit of the diagonal-noise
/// survival probability.
pub fn survival_strong_measurement_limit(gamma: &NoiseCovariance, t: f64) -> f64 {
    0.5 * (1.0 + (-2.0 * (gamma.g11 + gamma.g22) * t).exp())
}

/// `P(t) ≈ c0 + c1 t + c2 t² + c3 t³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShortTimeExpansion {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl ShortTimeExpansion {
    pub fn evaluate(&self, t: f64) -> f64 {
        ((self.c3 * t + self.c2) * t + self.c1) * t + self.c0
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.c0, self.c1, self.c2, self.c3]
    }
}

pub fn short_time_expansion(p: &ModelParams, variant: Variant) -> Result<ShortTimeExpansion> {
    variant.check(&p.gamma)?;
    let g = &p.gamma;
    let dephasing = g.g11 + g.g22;
    let drive_sq = p.omega * p.omega - g.g23 * g.g23;
    Ok(ShortTimeExpansion {
        c0: 1.0,
        c1: -dephasing,
        c2: -(drive_sq - dephasing * dephasing),
        c3: (drive_sq * (p.alpha + 4.0 * (3.0 * g.g11 + 2.0 * g.g22 + g.g33))
            - 4.0 * dephasing.powi(3))
            / 6.0,
    })
}
