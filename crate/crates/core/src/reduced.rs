//! Effective parameters shared by every closed form.
//!
//! With `γ12 = γ13 = 0` the x component decouples and the (y, z) block only
//! sees the renormalized measurement strength `α_dn = α - 4(γ22 - γ33)`, the
//! z-dephasing `γ11 + γ22` and the effective drive `ω² - γ23²`.

use crate::error::Result;
use crate::model::{ModelParams, Variant};

/// Discriminant threshold, in units of `ω²`, below which the defective
/// limit of the closed forms is used.
pub const EXCEPTIONAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ReducedRates {
    pub alpha: f64,
    pub alpha_dn: f64,
    /// `γ11 + γ22`.
    pub dephasing: f64,
    /// `ω² - γ23²`.
    pub drive_sq: f64,
    /// `α_dn² - 64(ω² - γ23²)`.
    pub discriminant: f64,
    pub tolerance: f64,
    pub g22: f64,
}

impl ReducedRates {
    pub fn new(p: &ModelParams, variant: Variant) -> Result<Self> {
        variant.check(&p.gamma)?;
        Ok(Self::unchecked(p))
    }

    /// Ignores `γ12` and `γ13` without complaint.
    pub fn unchecked(p: &ModelParams) -> Self {
        let g = &p.gamma;
        let alpha_dn = p.alpha - 4.0 * (g.g22 - g.g33);
        let drive_sq = p.omega * p.omega - g.g23 * g.g23;
        Self {
            alpha: p.alpha,
            alpha_dn,
            dephasing: g.g11 + g.g22,
            drive_sq,
            discriminant: alpha_dn * alpha_dn - 64.0 * drive_sq,
            tolerance: EXCEPTIONAL_TOLERANCE * p.omega * p.omega,
            g22: g.g22,
        }
    }

    pub fn is_defective(&self) -> bool {
        self.discriminant.abs() <= self.tolerance
    }
}
