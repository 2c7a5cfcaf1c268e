//! Physical configuration: the Rabi drive, the measurement strength and the
//! white-noise covariance, plus the Bloch-vector state they act on.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, ZenoError};

/// Relative slack of the positive-semidefiniteness check, scaled by the
/// largest diagonal entry.
pub const PSD_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Allowed drift of the Bloch norm.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// Symmetric covariance `γ_ij` of the Hamiltonian white noise,
/// `<ξ_i(t) ξ_j(t')> = γ_ij δ(t - t')`. Indices 1, 2, 3 stand for x, y, z.
/// Only the upper triangle is stored.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseCovariance {
    #[serde(default)]
    pub g11: f64,
    #[serde(default)]
    pub g22: f64,
    #[serde(default)]
    pub g33: f64,
    #[serde(default)]
    pub g12: f64,
    #[serde(default)]
    pub g13: f64,
    #[serde(default)]
    pub g23: f64,
}

impl NoiseCovariance {
    pub const fn new(g11: f64, g22: f64, g33: f64, g12: f64, g13: f64, g23: f64) -> Self {
        Self {
            g11,
            g22,
            g33,
            g12,
            g13,
            g23,
        }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub const fn diagonal(g11: f64, g22: f64, g33: f64) -> Self {
        Self::new(g11, g22, g33, 0.0, 0.0, 0.0)
    }

    /// Full symmetric 3×3 matrix.
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.g11, self.g12, self.g13, //
            self.g12, self.g22, self.g23, //
            self.g13, self.g23, self.g33,
        )
    }

    fn named_entries(&self) -> [(&'static str, f64); 6] {
        [
            ("g11", self.g11),
            ("g22", self.g22),
            ("g33", self.g33),
            ("g12", self.g12),
            ("g13", self.g13),
            ("g23", self.g23),
        ]
    }

    pub fn is_zero(&self) -> bool {
        self.named_entries().iter().all(|&(_, v)| v == 0.0)
    }

    pub fn is_diagonal(&self) -> bool {
        self.g12 == 0.0 && self.g13 == 0.0 && self.g23 == 0.0
    }

    pub fn diagonal_part(&self) -> Self {
        Self::diagonal(self.g11, self.g22, self.g33)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.named_entries()
            .iter()
            .fold(0.0_f64, |m, &(_, v)| m.max(v.abs()))
    }

    /// Smallest eigenvalue of the symmetric matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn psd_tolerance(&self) -> f64 {
        PSD_RELATIVE_TOLERANCE * self.g11.max(self.g22).max(self.g33).max(0.0)
    }

    /// Checks that every entry is finite and that the matrix is positive
    /// semidefinite up to [`PSD_RELATIVE_TOLERANCE`].
    pub fn validate(&self) -> Result<Self> {
        for (name, value) in self.named_entries() {
            if !value.is_finite() {
                return Err(ZenoError::NonFiniteEntry { name, value });
            }
        }
        let tolerance = self.psd_tolerance();
        for value in [self.g11, self.g22, self.g33] {
            if value < -tolerance {
                return Err(ZenoError::NotPositiveSemidefinite {
                    eigenvalue: value,
                    tolerance,
                });
            }
        }
        let eigenvalue = self.min_eigenvalue();
        if eigenvalue < -tolerance {
            return Err(ZenoError::NotPositiveSemidefinite {
                eigenvalue,
                tolerance,
            });
        }
        Ok(*self)
    }

    /// Every entry multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.g11 * factor,
            self.g22 * factor,
            self.g33 * factor,
            self.g12 * factor,
            self.g13 * factor,
            self.g23 * factor,
        )
    }
}

/// Free-function form of [`NoiseCovariance::validate`].
pub fn validate_noise_covariance(gamma: &NoiseCovariance) -> Result<NoiseCovariance> {
    gamma.validate()
}

/// Which closed-form family a computation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// γ = 0.
    Noiseless,
    /// γ diagonal.
    Diagonal,
    /// γ12 = γ13 = 0, any γ23.
    Full,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Noiseless, Variant::Diagonal, Variant::Full];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Noiseless => "noiseless",
            Variant::Diagonal => "diagonal",
            Variant::Full => "full",
        }
    }

    /// Fails with [`ZenoError::VariantMismatch`] when `gamma` has entries the
    /// variant's closed forms do not account for.
    pub fn check(self, gamma: &NoiseCovariance) -> Result<()> {
        let reason = match self {
            Variant::Noiseless if !gamma.is_zero() => Some("noise covariance must vanish"),
            Variant::Diagonal if !gamma.is_diagonal() => {
                Some("off-diagonal noise entries must vanish")
            }
            Variant::Full if gamma.g12 != 0.0 || gamma.g13 != 0.0 => {
                Some("g12 and g13 must vanish")
            }
            _ => None,
        };
        match reason {
            Some(reason) => Err(ZenoError::VariantMismatch {
                variant: self,
                reason: reason.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// Drops the entries of `gamma` that the variant ignores. `Full` keeps
    /// everything, so `γ12`/`γ13` still trip [`Variant::check`].
    pub fn project(self, gamma: &NoiseCovariance) -> NoiseCovariance {
        match self {
            Variant::Noiseless => NoiseCovariance::zero(),
            Variant::Diagonal => gamma.diagonal_part(),
            Variant::Full => *gamma,
        }
    }

    /// The narrowest variant whose closed forms are exact for `gamma`, or
    /// `None` when `γ12` or `γ13` is non-zero.
    pub fn narrowest_for(gamma: &NoiseCovariance) -> Option<Variant> {
        if gamma.is_zero() {
            Some(Variant::Noiseless)
        } else if gamma.is_diagonal() {
            Some(Variant::Diagonal)
        } else if gamma.g12 == 0.0 && gamma.g13 == 0.0 {
            Some(Variant::Full)
        } else {
            None
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "noiseless" => Ok(Variant::Noiseless),
            "diagonal" => Ok(Variant::Diagonal),
            "full" => Ok(Variant::Full),
            other => Err(format!(
                "unknown variant `{other}` (expected noiseless, diagonal or full)"
            )),
        }
    }
}

/// Rabi frequency `omega`, measurement strength `alpha` and noise covariance.
/// All three share the same frequency unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega: f64,
    pub alpha: f64,
    pub gamma: NoiseCovariance,
}

impl ModelParams {
    /// Validated constructor. `omega = 0` is accepted.
    pub fn new(omega: f64, alpha: f64, gamma: NoiseCovariance) -> Result<Self> {
        let params = Self {
            omega,
            alpha,
            gamma,
        };
        params.validate()
    }

    pub fn noiseless(omega: f64, alpha: f64) -> Result<Self> {
        Self::new(omega, alpha, NoiseCovariance::zero())
    }

    pub fn validate(&self) -> Result<Self> {
        if !self.omega.is_finite() || self.omega < 0.0 {
            return Err(invalid(
                "omega",
                format!("must be finite and >= 0, got {}", self.omega),
            ));
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(invalid(
                "alpha",
                format!("must be finite and >= 0, got {}", self.alpha),
            ));
        }
        self.gamma.validate()?;
        Ok(*self)
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..*self }
    }

    pub fn with_omega(&self, omega: f64) -> Self {
        Self { omega, ..*self }
    }

    pub fn with_gamma(&self, gamma: NoiseCovariance) -> Self {
        Self { gamma, ..*self }
    }

    /// Same drive and measurement, noise projected onto `variant`.
    pub fn projected(&self, variant: Variant) -> Self {
        self.with_gamma(variant.project(&self.gamma))
    }

    /// Largest rate in the problem, `max(ω, α, |γ_ij|)`.
    pub fn max_rate(&self) -> f64 {
        self.omega.max(self.alpha).max(self.gamma.max_abs_entry())
    }
}

/// Qubit state in Bloch form, `ρ = (I + s·σ)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState(pub Vector3<f64>);

impl BlochState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    /// `|0⟩⟨0|`, the monitored state.
    pub fn ground() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    pub fn x(&self) -> f64 {
        self.0.x
    }

    pub fn y(&self) -> f64 {
        self.0.y
    }

    pub fn z(&self) -> f64 {
        self.0.z
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.0
    }

    /// Probability of finding the state in `|0⟩`.
    pub fn survival_probability(&self) -> f64 {
        survival_probability(self)
    }
}

impl Default for BlochState {
    fn default() -> Self {
        Self::ground()
    }
}

impl From<Vector3<f64>> for BlochState {
    fn from(v: Vector3<f64>) -> Self {
        Self(v)
    }
}

/// `Tr[ρ(t) ρ(0)] = (1 + z)/2`, clamped to `[0, 1]` against rounding.
pub fn survival_probability(s: &BlochState) -> f64 {
    (0.5 * (1.0 + s.z())).clamp(0.0, 1.0)
}
