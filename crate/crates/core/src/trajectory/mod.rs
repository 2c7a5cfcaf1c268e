//! Stochastic unravelling of the averaged dynamics.
//!
//! Each trajectory is a pure state driven by one noise realization and one
//! record of detector clicks. Per step the exact noisy rotation is applied
//! first, then a partial measurement with readouts drawn at their Born
//! probabilities. Averaging the survival probability over trajectories
//! reproduces the noise- and measurement-averaged master equation up to a
//! first-order splitting bias in `dt`.

mod noise;
mod operators;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, ZenoError};
use crate::model::{BlochState, ModelParams};

pub use noise::{sample_noise_increment, NoiseFactor, ZERO_PIVOT_TOLERANCE};
pub use operators::{derive_kraus_from_detector, KrausPair, TwoLevelOperator};

/// Upper bound on `dt · max(ω, α, |γ_ij|)`.
pub const MAX_STEP_RATE: f64 = 0.01;

/// Default cap on recorded samples per trajectory.
pub const DEFAULT_MAX_RECORDS: usize = 2000;

/// Trajectories reduced sequentially inside one parallel work unit.
const CHUNK: u64 = 64;

/// Readout probabilities below this are never drawn.
const MIN_BRANCH_PROBABILITY: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub dt: f64,
    pub t_max: f64,
    pub n_traj: u64,
    pub master_seed: u64,
    /// Steps between recorded samples; `None` keeps at most
    /// [`DEFAULT_MAX_RECORDS`] samples.
    pub record_stride: Option<usize>,
    /// Keep the per-step readouts of single trajectories.
    pub record_readouts: bool,
}

impl TrajectoryConfig {
    pub fn new(dt: f64, t_max: f64, n_traj: u64, master_seed: u64) -> Self {
        Self {
            dt,
            t_max,
            n_traj,
            master_seed,
            record_stride: None,
            record_readouts: false,
        }
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(invalid(
                "dt",
                format!("must be finite and > 0, got {}", self.dt),
            ));
        }
        if !self.t_max.is_finite() || self.t_max < 0.0 {
            return Err(invalid(
                "t_max",
                format!("must be finite and >= 0, got {}", self.t_max),
            ));
        }
        if self.n_traj == 0 {
            return Err(invalid("n_traj", "at least one trajectory is required"));
        }
        if self.record_stride == Some(0) {
            return Err(invalid("record_stride", "must be >= 1"));
        }
        let product = self.dt * p.max_rate();
        if product > MAX_STEP_RATE * (1.0 + 1e-12) {
            return Err(invalid(
                "dt",
                format!("dt * max rate = {product} exceeds {MAX_STEP_RATE}"),
            ));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    pub fn stride(&self) -> usize {
        self.record_stride.unwrap_or_else(|| {
            let n = self.n_steps();
            n.div_ceil(DEFAULT_MAX_RECORDS - 1).max(1)
        })
    }

    /// Times at which samples are recorded.
    pub fn record_times(&self) -> Vec<f64> {
        let stride = self.stride();
        (0..=self.n_steps())
            .step_by(stride)
            .map(|k| k as f64 * self.dt)
            .collect()
    }
}

/// Independent stream for trajectory `traj_index`.
pub fn trajectory_rng(master_seed: u64, traj_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(traj_index);
    rng
}

/// Rotates `s` by `|angle|` about `angle / |angle|`.
fn rotate(s: &Vector3<f64>, angle: &Vector3<f64>) -> Vector3<f64> {
    let phi = angle.norm();
    if phi == 0.0 {
        return *s;
    }
    let k = angle / phi;
    let (sin, cos) = phi.sin_cos();
    s * cos + k.cross(s) * sin + k * (k.dot(s) * (1.0 - cos))
}

/// Exact evolution under `H = (ω + ξ1) σx + ξ2 σy + ξ3 σz` held for `dt`:
/// a rotation about `n = (ω + ξ1, ξ2, ξ3)` by `2|n| dt`.
pub fn unitary_step(s: &BlochState, omega: f64, xi: &Vector3<f64>, dt: f64) -> BlochState {
    let n = Vector3::new(omega + xi.x, xi.y, xi.z);
    BlochState(rotate(s.vector(), &(n * (2.0 * dt))))
}

/// Partial measurement with `M0 = diag(1, cos θ)`, `M1 = diag(0, sin θ)`.
/// Returns the normalized post-measurement state and the readout.
pub fn measurement_step<R: Rng + ?Sized>(
    s: &BlochState,
    theta: f64,
    rng: &mut R,
) -> Result<(BlochState, u8)> {
    let (sin, cos) = theta.sin_cos();
    let u: f64 = rng.random();
    measure(s.vector(), cos, sin * sin, u).map(|(v, r)| (BlochState(v), r))
}

fn measure(s: &Vector3<f64>, cos: f64, sin_sq: f64, u: f64) -> Result<(Vector3<f64>, u8)> {
    let up = 0.5 * (1.0 + s.z);
    let down = 0.5 * (1.0 - s.z);
    let p1 = sin_sq * down;
    if u < p1 && p1 >= MIN_BRANCH_PROBABILITY {
        return Ok((Vector3::new(0.0, 0.0, -1.0), 1));
    }
    let p0 = up + cos * cos * down;
    if p0 < MIN_BRANCH_PROBABILITY {
        return Err(ZenoError::ZeroProbabilityBranch { probability: p0 });
    }
    Ok((
        Vector3::new(cos * s.x / p0, cos * s.y / p0, (up - cos * cos * down) / p0),
        0,
    ))
}

/// Per-ensemble constants of a step.
struct Stepper {
    drive: Vector3<f64>,
    noise: NoiseFactor,
    noise_scale: f64,
    cos: f64,
    sin_sq: f64,
}

impl Stepper {
    fn new(p: &ModelParams, dt: f64) -> Result<Self> {
        let theta = (p.alpha * dt).sqrt();
        let (sin, cos) = theta.sin_cos();
        Ok(Self {
            drive: Vector3::new(2.0 * p.omega * dt, 0.0, 0.0),
            noise: NoiseFactor::new(&p.gamma)?,
            // 2 ξ dt = 2 √dt C g
            noise_scale: 2.0 * dt.sqrt(),
            cos,
            sin_sq: sin * sin,
        })
    }

    #[inline]
    fn step<R: Rng>(&self, s: &Vector3<f64>, rng: &mut R) -> Result<(Vector3<f64>, u8)> {
        let angle = self.drive + self.noise.sample_unit(rng) * self.noise_scale;
        let rotated = rotate(s, &angle);
        measure(&rotated, self.cos, self.sin_sq, rng.random())
    }
}

/// Recorded samples of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<BlochState>,
    /// Readout of every step, when requested.
    pub readouts: Option<Vec<u8>>,
}

pub fn run_trajectory(
    p: &ModelParams,
    cfg: &TrajectoryConfig,
    traj_index: u64,
) -> Result<Trajectory> {
    p.validate()?;
    cfg.validate(p)?;
    let stepper = Stepper::new(p, cfg.dt)?;
    let mut rng = trajectory_rng(cfg.master_seed, traj_index);
    let (n, stride) = (cfg.n_steps(), cfg.stride());

    let mut s = *BlochState::ground().vector();
    let mut states = vec![BlochState(s)];
    let mut readouts = cfg.record_readouts.then(|| Vec::with_capacity(n));
    for k in 1..=n {
        let (next, r) = stepper.step(&s, &mut rng)?;
        s = next;
        if let Some(rs) = readouts.as_mut() {
            rs.push(r);
        }
        if k % stride == 0 {
            states.push(BlochState(s));
        }
    }
    Ok(Trajectory {
        t: cfg.record_times(),
        states,
        readouts,
    })
}

/// Ensemble-averaged survival probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub t_grid: Vec<f64>,
    pub p_mean: Vec<f64>,
    /// Sample standard deviation over `sqrt(n_traj)`.
    pub p_stderr: Vec<f64>,
    pub n_traj: u64,
    pub master_seed: u64,
}

/// Running mean and sum of squared deviations per recorded time.
#[derive(Debug, Clone)]
struct Moments {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn begin_sample(&mut self) {
        self.count += 1;
    }

    #[inline]
    fn push(&mut self, idx: usize, x: f64) {
        let delta = x - self.mean[idx];
        self.mean[idx] += delta / self.count as f64;
        self.m2[idx] += delta * (x - self.mean[idx]);
    }

    /// Chan et al. pairwise combination.
    fn merge(mut self, other: &Moments) -> Self {
        if other.count == 0 {
            return self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        self.count += other.count;
        self
    }
}

/// Averages `cfg.n_traj` trajectories in parallel.
///
/// Trajectory `i` always draws from stream `i` of `master_seed`, trajectories
/// are grouped into fixed chunks, and chunk statistics are merged in index
/// order, so the result is bit-identical for any thread count.
pub fn run_ensemble(p: &ModelParams, cfg: &TrajectoryConfig) -> Result<EnsembleResult> {
    p.validate()?;
    cfg.validate(p)?;
    let stepper = Stepper::new(p, cfg.dt)?;
    let (n, stride) = (cfg.n_steps(), cfg.stride());
    let t_grid = cfg.record_times();
    let records = t_grid.len();
    let chunks = cfg.n_traj.div_ceil(CHUNK);

    let partials: Vec<Result<Moments>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut acc = Moments::new(records);
            let first = chunk * CHUNK;
            let last = (first + CHUNK).min(cfg.n_traj);
            for traj in first..last {
                let mut rng = trajectory_rng(cfg.master_seed, traj);
                let mut s = *BlochState::ground().vector();
                acc.begin_sample();
                acc.push(0, 1.0);
                for k in 1..=n {
                    s = stepper.step(&s, &mut rng)?.0;
                    if k % stride == 0 {
                        acc.push(k / stride, 0.5 * (1.0 + s.z));
                    }
                }
            }
            Ok(acc)
        })
        .collect();

    let mut total = Moments::new(records);
    for part in partials {
        total = total.merge(&part?);
    }
    let count = total.count as f64;
    let p_stderr = total
        .m2
        .iter()
        .map(|&m2| {
            if total.count > 1 {
                (m2.max(0.0) / (count - 1.0)).sqrt() / count.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    Ok(EnsembleResult {
        t_grid,
        p_mean: total.mean.iter().map(|m| m.clamp(0.0, 1.0)).collect(),
        p_stderr,
        n_traj: cfg.n_traj,
        master_seed: cfg.master_seed,
    })
}
