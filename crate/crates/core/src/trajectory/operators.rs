use std::ops::{Add, Mul};

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A 2×2 complex operator on the qubit (or detector) Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelOperator(pub Matrix2<Complex64>);

impl TwoLevelOperator {
    pub fn identity() -> Self {
        Self(Matrix2::identity())
    }

    pub fn zero() -> Self {
        Self(Matrix2::zeros())
    }

    pub fn sigma_x() -> Self {
        Self(Matrix2::new(ZERO, ONE, ONE, ZERO))
    }

    pub fn sigma_y() -> Self {
        Self(Matrix2::new(ZERO, -I, I, ZERO))
    }

    /// `σz |0⟩ = |0⟩`.
    pub fn sigma_z() -> Self {
        Self(Matrix2::new(ONE, ZERO, ZERO, -ONE))
    }

    /// Projector `|1⟩⟨1| = (I - σz)/2`.
    pub fn p1() -> Self {
        Self((Matrix2::identity() - Self::sigma_z().0) * Complex64::new(0.5, 0.0))
    }

    pub fn real_diagonal(a: f64, b: f64) -> Self {
        Self(Matrix2::new(
            Complex64::new(a, 0.0),
            ZERO,
            ZERO,
            Complex64::new(b, 0.0),
        ))
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.0 - other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// `self ⊗ other`, system index major.
    pub fn kron(&self, other: &Self) -> Matrix4<Complex64> {
        let mut out = Matrix4::zeros();
        for (i, j) in (0..2).flat_map(|i| (0..2).map(move |j| (i, j))) {
            let block = other.0 * self.0[(i, j)];
            out.fixed_view_mut::<2, 2>(2 * i, 2 * j).copy_from(&block);
        }
        out
    }
}

impl Mul for TwoLevelOperator {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl Add for TwoLevelOperator {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

/// Measurement operators for readouts 0 and 1 at angle `θ = J dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrausPair {
    pub m0: TwoLevelOperator,
    pub m1: TwoLevelOperator,
    pub theta: f64,
}

impl KrausPair {
    /// `M0 = diag(1, cos θ)`, `M1 = diag(0, sin θ)`.
    pub fn new(theta: f64) -> Self {
        Self {
            m0: TwoLevelOperator::real_diagonal(1.0, theta.cos()),
            m1: TwoLevelOperator::real_diagonal(0.0, theta.sin()),
            theta,
        }
    }

    /// Angle reached in one step of length `dt` at measurement strength
    /// `alpha = J² dt`.
    pub fn for_step(alpha: f64, dt: f64) -> Self {
        Self::new((alpha * dt).sqrt())
    }

    /// `max |M0†M0 + M1†M1 - I|`.
    pub fn completeness_error(&self) -> f64 {
        let sum = self.m0.adjoint() * self.m0 + self.m1.adjoint() * self.m1;
        sum.max_abs_diff(&TwoLevelOperator::identity())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m0
            .max_abs_diff(&other.m0)
            .max(self.m1.max_abs_diff(&other.m1))
    }
}

/// Measurement operators from the qubit-detector model.
///
/// The detector starts in `|0⟩_d`, couples through
/// `H_int dt = θ (I - σz)/2 ⊗ σy` and is read out in its computational
/// basis, giving `M_r = ⟨r|_d V |0⟩_d` with `V = exp(-i H_int dt)`.
pub fn derive_kraus_from_detector(theta: f64) -> KrausPair {
    let generator =
        TwoLevelOperator::p1().kron(&TwoLevelOperator::sigma_y()) * Complex64::new(theta, 0.0);
    let v = (generator * -I).exp();
    let extract =
        |r: usize| TwoLevelOperator(Matrix2::from_fn(|row, col| v[(2 * row + r, 2 * col)]));
    KrausPair {
        m0: extract(0),
        m1: extract(1),
        theta,
    }
}
