use nalgebra::Vector3;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, ZenoError};
use crate::model::NoiseCovariance;

/// Pivots below this fraction of the largest diagonal entry are treated as
/// exact zeros.
pub const ZERO_PIVOT_TOLERANCE: f64 = 1e-12;

/// Pivoted Cholesky factor `C` with `C Cᵀ = γ`, keeping only the non-zero
/// columns so that rank-deficient covariances draw fewer normals.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseFactor {
    columns: Vec<Vector3<f64>>,
}

impl NoiseFactor {
    pub fn new(gamma: &NoiseCovariance) -> Result<Self> {
        let mut a = gamma.matrix();
        let scale = a.diagonal().max().max(0.0);
        let tol = ZERO_PIVOT_TOLERANCE * scale;
        let mut remaining = vec![0usize, 1, 2];
        let mut columns = Vec::with_capacity(3);

        while !remaining.is_empty() {
            let (slot, &pivot) = remaining
                .iter()
                .enumerate()
                .max_by(|(_, &i), (_, &j)| a[(i, i)].total_cmp(&a[(j, j)]))
                .expect("non-empty");
            let d = a[(pivot, pivot)];
            if d <= tol {
                break;
            }
            remaining.swap_remove(slot);
            let root = d.sqrt();
            let mut col = Vector3::zeros();
            col[pivot] = root;
            for &i in &remaining {
                col[i] = a[(i, pivot)] / root;
            }
            for &i in &remaining {
                for &j in &remaining {
                    a[(i, j)] -= col[i] * col[j];
                }
            }
            columns.push(col);
        }

        if let Some(&bad) = remaining
            .iter()
            .find(|&&i| a[(i, i)] < -tol.max(f64::MIN_POSITIVE))
        {
            return Err(ZenoError::FactorizationFailure {
                pivot: bad,
                value: a[(bad, bad)],
            });
        }
        Ok(Self { columns })
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    /// `C Cᵀ`.
    pub fn reconstruct(&self) -> nalgebra::Matrix3<f64> {
        self.columns
            .iter()
            .fold(nalgebra::Matrix3::zeros(), |acc, c| acc + c * c.transpose())
    }

    /// `C g` for a fresh standard-normal `g`; covariance `γ`.
    pub fn sample_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector3<f64> {
        self.columns.iter().fold(Vector3::zeros(), |acc, c| {
            let g: f64 = rng.sample(StandardNormal);
            acc + c * g
        })
    }

    /// White-noise value held over one step: covariance `γ / dt`.
    pub fn sample<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> Vector3<f64> {
        self.sample_unit(rng) / dt.sqrt()
    }
}

/// One draw of `ξ` for a step of length `dt`, `<ξ_i ξ_j> = γ_ij / dt`.
pub fn sample_noise_increment<R: Rng + ?Sized>(
    gamma: &NoiseCovariance,
    dt: f64,
    rng: &mut R,
) -> Result<Vector3<f64>> {
    Ok(NoiseFactor::new(gamma)?.sample(dt, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn factor_reproduces_covariance() {
        for g in [
            NoiseCovariance::new(0.05, 0.1, 1.0, 0.0, 0.0, 0.3),
            NoiseCovariance::diagonal(0.0, 0.0, 1.0),
            NoiseCovariance::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0),
            NoiseCovariance::new(0.3, 0.2, 0.5, 0.1, -0.05, 0.2),
        ] {
            let f = NoiseFactor::new(&g).unwrap();
            assert!((f.reconstruct() - g.matrix()).norm() < 1e-14, "{g:?}");
        }
    }

    #[test]
    fn rank_tracks_zero_directions() {
        assert_eq!(
            NoiseFactor::new(&NoiseCovariance::zero()).unwrap().rank(),
            0
        );
        assert_eq!(
            NoiseFactor::new(&NoiseCovariance::diagonal(0.0, 0.0, 1.0))
                .unwrap()
                .rank(),
            1
        );
        assert_eq!(
            NoiseFactor::new(&NoiseCovariance::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0))
                .unwrap()
                .rank(),
            1
        );
    }

    #[test]
    fn indefinite_matrix_fails() {
        let g = NoiseCovariance::new(0.0, 0.1, 1.0, 0.0, 0.0, 0.9);
        assert!(matches!(
            NoiseFactor::new(&g),
            Err(ZenoError::FactorizationFailure { .. })
        ));
    }

    #[test]
    fn zero_noise_samples_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let xi = sample_noise_increment(&NoiseCovariance::zero(), 1e-3, &mut rng).unwrap();
            assert_eq!(xi, Vector3::zeros());
        }
    }
}
