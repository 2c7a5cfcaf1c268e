//! The Bloch-vector generator `ds/dt = L s` and its propagators.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{invalid, Result, ZenoError};
use crate::model::{BlochState, ModelParams};
use crate::spectral::numeric::{decompose, SpectralDecomposition};

/// Default ODE step in units of `1/ω`.
pub const DEFAULT_ODE_STEP: f64 = 1e-4;

/// Largest allowed `dt·‖L‖∞` for the fixed-step integrator.
pub const MAX_ODE_STEP_NORM: f64 = 0.1;

const SERIES_MAX_TERMS: usize = 40;

/// `L = L₀(ω, α) + L_γ(γ)`, kept as its two parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Liouvillian {
    noiseless: Matrix3<f64>,
    noise: Matrix3<f64>,
}

impl Liouvillian {
    pub fn new(p: &ModelParams) -> Self {
        let (w, a) = (p.omega, p.alpha);
        let noiseless = Matrix3::new(
            -a / 2.0,
            0.0,
            0.0, //
            0.0,
            -a / 2.0,
            -2.0 * w, //
            0.0,
            2.0 * w,
            0.0,
        );
        let g = &p.gamma;
        let noise = Matrix3::new(
            -2.0 * (g.g22 + g.g33),
            2.0 * g.g12,
            2.0 * g.g13, //
            2.0 * g.g12,
            -2.0 * (g.g11 + g.g33),
            2.0 * g.g23, //
            2.0 * g.g13,
            2.0 * g.g23,
            -2.0 * (g.g11 + g.g22),
        );
        Self { noiseless, noise }
    }

    /// Measurement and Rabi drive only.
    pub fn noiseless_part(&self) -> &Matrix3<f64> {
        &self.noiseless
    }

    /// Noise contribution only.
    pub fn noise_part(&self) -> &Matrix3<f64> {
        &self.noise
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        self.noiseless + self.noise
    }

    /// Row-sum norm.
    pub fn norm_inf(&self) -> f64 {
        norm_inf(&self.matrix())
    }
}

pub fn build_liouvillian(p: &ModelParams) -> Liouvillian {
    Liouvillian::new(p)
}

fn norm_inf(m: &Matrix3<f64>) -> f64 {
    (0..3)
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Reusable `exp(L t)` evaluator.
///
/// Uses the eigen-decomposition when it is well conditioned and falls back
/// to a scaling-and-squaring Taylor series near exceptional points.
#[derive(Debug, Clone)]
pub struct Propagator {
    matrix: Matrix3<f64>,
    spectral: Option<SpectralDecomposition>,
}

impl Propagator {
    pub fn new(l: &Liouvillian) -> Self {
        let matrix = l.matrix();
        let decomposition = decompose(&matrix);
        let spectral = (!decomposition.defective && decomposition.inverse_eigenvectors().is_some())
            .then_some(decomposition);
        Self { matrix, spectral }
    }

    /// True when the spectral route is used.
    pub fn is_spectral(&self) -> bool {
        self.spectral.is_some()
    }

    pub fn apply(&self, s0: &BlochState, t: f64) -> Result<BlochState> {
        if !t.is_finite() || t < 0.0 {
            return Err(invalid("t", format!("must be finite and >= 0, got {t}")));
        }
        match &self.spectral {
            Some(d) => {
                let inv = d.inverse_eigenvectors().expect("checked in new");
                let s0c = s0.vector().map(|v| Complex64::new(v, 0.0));
                let mut coeffs = inv * s0c;
                for (c, lambda) in coeffs.iter_mut().zip(d.eigenvalues.iter()) {
                    *c *= (lambda * t).exp();
                }
                let s = d.eigenvectors * coeffs;
                Ok(BlochState(s.map(|z| z.re)))
            }
            None => Ok(BlochState(expm_series(&(self.matrix * t))? * s0.vector())),
        }
    }
}

/// `exp(L t) s0`.
pub fn propagate_bloch(l: &Liouvillian, s0: &BlochState, t: f64) -> Result<BlochState> {
    Propagator::new(l).apply(s0, t)
}

/// Scaling-and-squaring Taylor evaluation of `exp(a)`.
pub fn expm_series(a: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let norm = norm_inf(a);
    if !norm.is_finite() {
        return Err(ZenoError::NonConvergent { terms: 0 });
    }
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = a / 2f64.powi(squarings);

    let mut sum = Matrix3::identity();
    let mut term = Matrix3::identity();
    let mut converged = false;
    for k in 1..=SERIES_MAX_TERMS {
        term = term * b / k as f64;
        sum += term;
        if norm_inf(&term) <= 1e-18 * norm_inf(&sum) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(ZenoError::NonConvergent {
            terms: SERIES_MAX_TERMS,
        });
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    Ok(sum)
}

/// Default integrator step `DEFAULT_ODE_STEP / ω` (or `DEFAULT_ODE_STEP`
/// when ω = 0).
pub fn default_ode_step(omega: f64) -> f64 {
    if omega > 0.0 {
        DEFAULT_ODE_STEP / omega
    } else {
        DEFAULT_ODE_STEP
    }
}

/// Classical fixed-step RK4 integration of `ds/dt = L s` from `t = 0`,
/// sampled on `t_grid`. Each grid interval is split into equal steps no
/// longer than `dt`.
pub fn propagate_bloch_ode(
    l: &Liouvillian,
    s0: &BlochState,
    t_grid: &[f64],
    dt: f64,
) -> Result<Vec<BlochState>> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    let m = l.matrix();
    let product = dt * norm_inf(&m);
    if product > MAX_ODE_STEP_NORM {
        return Err(ZenoError::StepTooLarge { product });
    }
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(invalid("t_grid", "times must be finite and non-negative"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("t_grid", "times must be strictly increasing"));
    }

    let rk4_step = |h: f64| {
        // RK4 applied to a linear system is the degree-4 Taylor polynomial.
        let hm = m * h;
        let hm2 = hm * hm;
        let hm3 = hm2 * hm;
        Matrix3::identity() + hm + hm2 / 2.0 + hm3 / 6.0 + hm3 * hm / 24.0
    };

    let mut out = Vec::with_capacity(t_grid.len());
    let mut s: Vector3<f64> = *s0.vector();
    let mut t_prev = 0.0;
    for &t in t_grid {
        let span = t - t_prev;
        if span > 0.0 {
            let n = (span / dt).ceil().max(1.0) as usize;
            let step = rk4_step(span / n as f64);
            for _ in 0..n {
                s = step * s;
            }
        }
        out.push(BlochState(s));
        t_prev = t;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NoiseCovariance;
    use std::f64::consts::PI;

    #[test]
    fn noiseless_matrix_entries() {
        let l = build_liouvillian(&ModelParams::noiseless(1.0, 10.0).unwrap());
        let expected = Matrix3::new(-5.0, 0.0, 0.0, 0.0, -5.0, -2.0, 0.0, 2.0, 0.0);
        assert_eq!(l.matrix(), expected);
        assert_eq!(*l.noise_part(), Matrix3::zeros());
    }

    #[test]
    fn zero_parameters_give_zero_matrix() {
        let l = build_liouvillian(&ModelParams::noiseless(0.0, 0.0).unwrap());
        assert_eq!(l.matrix(), Matrix3::zeros());
    }

    #[test]
    fn noise_part_entries() {
        let g = NoiseCovariance::new(0.05, 0.1, 1.0, 0.0, 0.0, 0.3);
        let l = build_liouvillian(&ModelParams::new(1.0, 0.0, g).unwrap());
        let n = l.noise_part();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        assert!(close(n[(0, 0)], -2.2));
        assert!(close(n[(1, 1)], -2.1));
        assert!(close(n[(2, 2)], -0.3));
        assert!(close(n[(1, 2)], 0.6) && close(n[(2, 1)], 0.6));
        assert!(n[(0, 1)] == 0.0 && n[(0, 2)] == 0.0 && n[(1, 0)] == 0.0 && n[(2, 0)] == 0.0);
    }

    #[test]
    fn undriven_state_is_stationary() {
        let l = build_liouvillian(&ModelParams::noiseless(0.0, 3.0).unwrap());
        for t in [0.0, 0.5, 7.0] {
            let s = propagate_bloch(&l, &BlochState::ground(), t).unwrap();
            assert!((s.vector() - Vector3::z()).norm() < 1e-14);
        }
    }

    #[test]
    fn quarter_rabi_period() {
        let l = build_liouvillian(&ModelParams::noiseless(1.0, 0.0).unwrap());
        let s = propagate_bloch(&l, &BlochState::ground(), PI / 4.0).unwrap();
        assert!((s.vector() - Vector3::new(0.0, -1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn negative_time_is_rejected() {
        let l = build_liouvillian(&ModelParams::noiseless(1.0, 0.0).unwrap());
        assert!(propagate_bloch(&l, &BlochState::ground(), -1.0).is_err());
    }

    #[test]
    fn series_matches_spectral_route() {
        let g = NoiseCovariance::new(0.05, 0.1, 1.0, 0.0, 0.0, 0.3);
        let l = build_liouvillian(&ModelParams::new(1.0, 2.5, g).unwrap());
        let s_spec = propagate_bloch(&l, &BlochState::ground(), 1.7).unwrap();
        let s_series = expm_series(&(l.matrix() * 1.7)).unwrap() * Vector3::z();
        assert!((s_spec.vector() - s_series).norm() < 1e-12);
    }

    #[test]
    fn exceptional_point_uses_series() {
        let l = build_liouvillian(&ModelParams::noiseless(1.0, 8.0).unwrap());
        assert!(!Propagator::new(&l).is_spectral());
        let generic = build_liouvillian(&ModelParams::noiseless(1.0, 10.0).unwrap());
        assert!(Propagator::new(&generic).is_spectral());
    }

    #[test]
    fn ode_rejects_bad_grids_and_steps() {
        let l = build_liouvillian(&ModelParams::noiseless(1.0, 10.0).unwrap());
        let s0 = BlochState::ground();
        assert!(matches!(
            propagate_bloch_ode(&l, &s0, &[1.0], 0.05),
            Err(ZenoError::StepTooLarge { .. })
        ));
        assert!(propagate_bloch_ode(&l, &s0, &[1.0, 0.5], 1e-3).is_err());
        assert!(propagate_bloch_ode(&l, &s0, &[-1.0], 1e-3).is_err());
    }

    #[test]
    fn ode_conserves_norm_in_unitary_case() {
        let l = build_liouvillian(&ModelParams::noiseless(1.0, 0.0).unwrap());
        let grid: Vec<f64> = (1..=20).map(|k| k as f64).collect();
        let states = propagate_bloch_ode(&l, &BlochState::ground(), &grid, 1e-4).unwrap();
        for s in states {
            assert!((s.norm() - 1.0).abs() < 1e-8);
        }
    }
}
