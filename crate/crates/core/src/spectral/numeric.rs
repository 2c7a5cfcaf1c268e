//! Numeric eigen-solution of a real 3×3 generator.
//!
//! Eigenvalues come from the characteristic cubic (closed-form roots followed
//! by Newton polishing). Roots closer than [`CLUSTER_TOLERANCE`] relative to
//! the matrix norm are merged, since a coalesced pair can only be resolved to
//! about `sqrt(eps)` and the mean of the pair is the well-conditioned
//! quantity. Eigenvectors are null vectors of `L - λI` obtained from cross
//! products of its rows.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::liouvillian::Liouvillian;

/// Eigenvector condition number above which the decomposition is treated
/// as defective.
pub const CONDITION_LIMIT: f64 = 1e8;

/// Relative distance below which two roots are considered coalesced.
pub const CLUSTER_TOLERANCE: f64 = 1e-6;

const RANK_TOLERANCE: f64 = 1e-8;

type CVector3 = Vector3<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    /// Sorted by descending `|Re λ|` (ties: real modes first, then ascending
    /// `Im λ`), so the last
    /// entry is the slowest-decaying mode.
    pub eigenvalues: [Complex64; 3],
    /// Unit-norm eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: Matrix3<Complex64>,
    pub defective: bool,
    /// Frobenius condition number of `eigenvectors`; infinite when two
    /// columns coincide.
    pub condition_number: f64,
    inverse: Option<Matrix3<Complex64>>,
}

impl SpectralDecomposition {
    /// `W⁻¹`, present whenever the eigenvector matrix is invertible.
    pub fn inverse_eigenvectors(&self) -> Option<&Matrix3<Complex64>> {
        self.inverse.as_ref()
    }

    /// The slowest-decaying eigenvalue.
    pub fn slowest(&self) -> Complex64 {
        self.eigenvalues[2]
    }

    /// `max |L w_k - λ_k w_k|`.
    pub fn residual(&self, m: &Matrix3<f64>) -> f64 {
        let mc = m.map(|v| Complex64::new(v, 0.0));
        (0..3)
            .map(|k| {
                let w = self.eigenvectors.column(k);
                (mc * w - w * self.eigenvalues[k]).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Eigen-solution of the Liouvillian matrix.
pub fn eigenvalues_numeric(l: &Liouvillian) -> SpectralDecomposition {
    decompose(&l.matrix())
}

/// Eigen-solution of an arbitrary real 3×3 matrix.
pub fn decompose(m: &Matrix3<f64>) -> SpectralDecomposition {
    let scale = m.norm();
    if scale == 0.0 || !scale.is_finite() {
        let zero = Complex64::new(0.0, 0.0);
        return SpectralDecomposition {
            eigenvalues: [zero; 3],
            eigenvectors: Matrix3::identity(),
            defective: false,
            condition_number: 1.0,
            inverse: Some(Matrix3::identity()),
        };
    }
    let a = m / scale;

    let mut roots = polished_roots(&a);
    merge_clusters(&mut roots);
    sort_modes(&mut roots);

    let w = eigenvector_matrix(&a, &roots);
    let (condition_number, inverse) = condition(&w);

    SpectralDecomposition {
        eigenvalues: roots.map(|r| r * scale),
        eigenvectors: w,
        defective: condition_number > CONDITION_LIMIT,
        condition_number,
        inverse,
    }
}

/// Coefficients `(c2, c1, c0)` of the monic characteristic polynomial
/// `λ³ + c2 λ² + c1 λ + c0`.
pub fn characteristic_coefficients(a: &Matrix3<f64>) -> (f64, f64, f64) {
    let trace = a.trace();
    let minors = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)] + a[(0, 0)] * a[(2, 2)]
        - a[(0, 2)] * a[(2, 0)]
        + a[(1, 1)] * a[(2, 2)]
        - a[(1, 2)] * a[(2, 1)];
    (-trace, minors, -a.determinant())
}

fn polished_roots(a: &Matrix3<f64>) -> [Complex64; 3] {
    let (c2, c1, c0) = characteristic_coefficients(a);
    let mut roots = cubic_roots(c2, c1, c0);
    let poly = |x: Complex64| ((x + c2) * x + c1) * x + c0;
    let deriv = |x: Complex64| (x * 3.0 + 2.0 * c2) * x + c1;
    for root in roots.iter_mut() {
        for _ in 0..4 {
            let d = deriv(*root);
            if d.norm() < 1e-12 {
                break;
            }
            let candidate = *root - poly(*root) / d;
            if poly(candidate).norm() < poly(*root).norm() {
                *root = candidate;
            } else {
                break;
            }
        }
    }
    // Keep complex pairs exactly conjugate.
    for i in 0..3 {
        for j in (i + 1)..3 {
            if roots[i].im != 0.0 && (roots[i] - roots[j].conj()).norm() < 1e-6 {
                let upper = if roots[i].im > 0.0 {
                    roots[i]
                } else {
                    roots[j]
                };
                roots[i] = upper;
                roots[j] = upper.conj();
            }
        }
    }
    roots
}

/// Roots of the monic cubic `x³ + a x² + b x + c`.
pub fn cubic_roots(a: f64, b: f64, c: f64) -> [Complex64; 3] {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);

    let re = |x: f64| Complex64::new(x, 0.0);
    if disc > 0.0 {
        let sign = if q >= 0.0 { 1.0 } else { -1.0 };
        let big = -sign * (q.abs() / 2.0 + disc.sqrt()).cbrt();
        let small = if big != 0.0 { -p / (3.0 * big) } else { 0.0 };
        let real = big + small;
        let pair_re = -real / 2.0;
        let pair_im = 3f64.sqrt() / 2.0 * (big - small).abs();
        [
            re(real - shift),
            Complex64::new(pair_re - shift, -pair_im),
            Complex64::new(pair_re - shift, pair_im),
        ]
    } else if p == 0.0 {
        [re(-shift); 3]
    } else {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        [0.0, 1.0, 2.0].map(|k| re(r * (phi - 2.0 * PI * k / 3.0).cos() - shift))
    }
}

fn merge_clusters(roots: &mut [Complex64; 3]) {
    let close = |x: Complex64, y: Complex64| (x - y).norm() <= CLUSTER_TOLERANCE;
    let (r0, r1, r2) = (roots[0], roots[1], roots[2]);
    match (close(r0, r1), close(r1, r2), close(r0, r2)) {
        (true, true, _) | (true, _, true) | (_, true, true) => {
            let mean = (r0 + r1 + r2) / 3.0;
            *roots = [Complex64::new(mean.re, 0.0); 3];
        }
        (true, false, false) => merge_pair(roots, 0, 1),
        (false, true, false) => merge_pair(roots, 1, 2),
        (false, false, true) => merge_pair(roots, 0, 2),
        _ => {}
    }
}

fn merge_pair(roots: &mut [Complex64; 3], i: usize, j: usize) {
    // A coalesced pair of a real matrix is real.
    let mean = Complex64::new((roots[i].re + roots[j].re) / 2.0, 0.0);
    roots[i] = mean;
    roots[j] = mean;
}

fn sort_modes(roots: &mut [Complex64; 3]) {
    roots.sort_by(|x, y| {
        let (ax, ay) = (x.re.abs(), y.re.abs());
        if (ax - ay).abs() <= 1e-12 * ax.max(ay).max(1.0) {
            x.im.abs()
                .total_cmp(&y.im.abs())
                .then(x.im.total_cmp(&y.im))
        } else {
            ay.total_cmp(&ax)
        }
    });
}

fn cross(u: &CVector3, v: &CVector3) -> CVector3 {
    CVector3::new(
        u.y * v.z - u.z * v.y,
        u.z * v.x - u.x * v.z,
        u.x * v.y - u.y * v.x,
    )
}

/// Basis of the (numerical) null space of `a - λ I`.
fn null_vectors(a: &Matrix3<f64>, lambda: Complex64) -> Vec<CVector3> {
    let shifted = a.map(|v| Complex64::new(v, 0.0)) - Matrix3::identity() * lambda;
    let rows: [CVector3; 3] = [0, 1, 2].map(|i| shifted.row(i).transpose());
    let size = shifted.norm().max(f64::MIN_POSITIVE);

    let best = [
        cross(&rows[0], &rows[1]),
        cross(&rows[1], &rows[2]),
        cross(&rows[2], &rows[0]),
    ]
    .into_iter()
    .max_by(|u, v| u.norm().total_cmp(&v.norm()))
    .expect("three candidates");
    if best.norm() > RANK_TOLERANCE * size * size {
        return vec![best.unscale(best.norm())];
    }

    // Rank ≤ 1 only happens for a real repeated eigenvalue.
    let real_rows: [Vector3<f64>; 3] = rows.map(|r| r.map(|z| z.re));
    let pivot = real_rows
        .into_iter()
        .max_by(|u, v| u.norm().total_cmp(&v.norm()))
        .expect("three rows");
    let to_complex = |v: Vector3<f64>| v.map(|x| Complex64::new(x, 0.0));
    if pivot.norm() <= RANK_TOLERANCE {
        return vec![
            to_complex(Vector3::x()),
            to_complex(Vector3::y()),
            to_complex(Vector3::z()),
        ];
    }
    let axis = pivot.iamin();
    let first = pivot.cross(&Vector3::ith(axis, 1.0)).normalize();
    let second = pivot.cross(&first).normalize();
    vec![to_complex(first), to_complex(second)]
}

fn eigenvector_matrix(a: &Matrix3<f64>, roots: &[Complex64; 3]) -> Matrix3<Complex64> {
    let mut columns: Vec<CVector3> = Vec::with_capacity(3);
    let mut k = 0;
    while k < 3 {
        let multiplicity = roots[k..].iter().take_while(|&&r| r == roots[k]).count();
        let basis = null_vectors(a, roots[k]);
        for i in 0..multiplicity {
            // A defective root repeats its single eigenvector.
            columns.push(basis[i.min(basis.len() - 1)]);
        }
        k += multiplicity;
    }
    Matrix3::from_columns(&columns)
}

fn condition(w: &Matrix3<Complex64>) -> (f64, Option<Matrix3<Complex64>>) {
    match w.try_inverse() {
        Some(inv) if inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
            (w.norm() * inv.norm(), Some(inv))
        }
        _ => (f64::INFINITY, None),
    }
}
