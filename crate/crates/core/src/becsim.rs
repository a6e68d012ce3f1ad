//! Two-mode condensate dynamics for the population imbalance `s` and the
//! phase difference `x`:
//!
//! ```text
//! ds = -b √(1-s²) sin x dt
//! dx =  s (1 + b cos x / √(1-s²)) dt + σ dW
//! ```
//!
//! The noiseless flow conserves `H = s²/2 - b √(1-s²) cos x`. Mode
//! populations are `p₁ = (1-s)/2`, `p₂ = (1+s)/2`; under noise they are
//! ensemble means over independent paths, and the interference factor is
//! the difference from the noiseless populations.
//!
//! The state is propagated as the Bloch vector `(u, v, s)` with
//! `u + iv = √(1-s²) e^{ix}`, where the flow reads
//!
//! ```text
//! u' = -s v,   v' = s (u + b),   s' = -b v
//! ```
//!
//! and has no singularity at `|s| = 1`. Each step applies classical RK4 to
//! this flow, then rotates `(u, v)` by the Wiener increment `σ√dt ξ`, which
//! is the exact solution of the noise part. The phase `x` is tracked
//! continuously (unwrapped). With `σ = 0` noisy and noiseless paths are
//! bit-identical.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest tolerated drift of `u² + v² + s²` away from one before a step
/// is rejected as a numerical breakdown.
pub const NORM_DRIFT_TOL: f64 = 1e-6;
/// Clamp applied to `s` inside `√(1-s²)`.
const S_CLAMP: f64 = 1.0 - 1e-12;
/// Denominator threshold for [`critical_amplitude`].
pub const CRITICAL_DENOM_TOL: f64 = 1e-12;
/// Half-width of the band classified as [`Regime::Critical`].
pub const REGIME_TOL: f64 = 1e-9;
/// Paths per work unit; fixed so the reduction order never depends on the
/// number of workers.
const CHUNK: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BecParams {
    /// Pumping amplitude.
    pub b: f64,
    /// Noise strength on the phase.
    pub sigma: f64,
    pub s0: f64,
    pub x0: f64,
    pub dt: f64,
    pub t_max: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl Default for BecParams {
    fn default() -> Self {
        Self { b: 0.25, sigma: 0.1, s0: -0.9, x0: 0.0, dt: 1e-3, t_max: 100.0, n_paths: 2000, seed: 0 }
    }
}

impl BecParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let all_finite = [self.b, self.sigma, self.s0, self.x0, self.dt, self.t_max].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::NonFinite);
        }
        if self.s0.abs() >= 1.0 {
            return bad(format!("|s0| must be < 1, got {}", self.s0));
        }
        if self.dt <= 0.0 {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.t_max <= self.dt {
            return bad(format!("tmax ({}) must exceed dt ({})", self.t_max, self.dt));
        }
        if self.b < 0.0 {
            return bad(format!("b must be >= 0, got {}", self.b));
        }
        if self.sigma < 0.0 {
            return bad(format!("sigma must be >= 0, got {}", self.sigma));
        }
        if self.n_paths == 0 {
            return bad("need at least one path".into());
        }
        Ok(())
    }

    /// Number of integration steps covering `[0, t_max]`.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `b < b_c`: the imbalance oscillates without changing sign.
    Rabi,
    /// `b > b_c`: the imbalance swings through zero.
    Josephson,
    Critical,
}

/// `b_c = s₀² / (2(1 + √(1-s₀²) cos x₀))`.
pub fn critical_amplitude(s0: f64, x0: f64) -> Result<f64> {
    if !s0.is_finite() || s0.abs() > 1.0 || !x0.is_finite() {
        return Err(Error::InvalidParameter(format!("critical amplitude needs |s0| <= 1, got {s0}")));
    }
    let denominator = 1.0 + (1.0 - s0 * s0).sqrt() * x0.cos();
    if denominator <= CRITICAL_DENOM_TOL {
        return Err(Error::DenominatorVanishes { denominator });
    }
    Ok(s0 * s0 / (2.0 * denominator))
}

pub fn regime_classify(b: f64, s0: f64, x0: f64) -> Result<Regime> {
    let bc = critical_amplitude(s0, x0)?;
    Ok(if b < bc - REGIME_TOL {
        Regime::Rabi
    } else if b > bc + REGIME_TOL {
        Regime::Josephson
    } else {
        Regime::Critical
    })
}

/// Conserved quantity of the noiseless flow.
pub fn energy(s: f64, x: f64, b: f64) -> f64 {
    0.5 * s * s - b * root(s) * x.cos()
}

fn root(s: f64) -> f64 {
    let s = s.clamp(-S_CLAMP, S_CLAMP);
    (1.0 - s * s).sqrt()
}

/// `(ds/dt, dx/dt)` without noise.
pub fn drift(s: f64, x: f64, b: f64) -> (f64, f64) {
    let r = root(s);
    let (sin, cos) = x.sin_cos();
    (-b * r * sin, s * (1.0 + b * cos / r))
}

/// Bloch vector `(u, v, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Bloch {
    u: f64,
    v: f64,
    s: f64,
}

impl Bloch {
    fn from_angles(s: f64, x: f64) -> Self {
        let r = (1.0 - s * s).max(0.0).sqrt();
        let (sin, cos) = x.sin_cos();
        Self { u: r * cos, v: r * sin, s }
    }

    fn velocity(self, b: f64) -> Self {
        Self { u: -self.s * self.v, v: self.s * (self.u + b), s: -b * self.v }
    }

    fn axpy(self, h: f64, d: Self) -> Self {
        Self { u: self.u + h * d.u, v: self.v + h * d.v, s: self.s + h * d.s }
    }

    fn norm_sqr(self) -> f64 {
        self.u * self.u + self.v * self.v + self.s * self.s
    }

    fn phase(self) -> f64 {
        self.v.atan2(self.u)
    }

    fn rk4(self, b: f64, dt: f64) -> Self {
        let k1 = self.velocity(b);
        let k2 = self.axpy(0.5 * dt, k1).velocity(b);
        let k3 = self.axpy(0.5 * dt, k2).velocity(b);
        let k4 = self.axpy(dt, k3).velocity(b);
        let h = dt / 6.0;
        Self {
            u: self.u + h * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
            v: self.v + h * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
            s: self.s + h * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s),
        }
    }

    /// Shift the phase by `angle`.
    fn rotate(self, angle: f64) -> Self {
        let (sin, cos) = angle.sin_cos();
        Self { u: cos * self.u - sin * self.v, v: sin * self.u + cos * self.v, s: self.s }
    }
}

/// `x` mapped to `(-π, π]`.
fn wrap(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let y = x - TAU * (x / TAU).round();
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

/// Standard normal draws keyed by `(seed, path, step)`.
///
/// The seed keys a ChaCha8 generator and the path selects its stream.
/// Steps `2j` and `2j+1` share the two 64-bit words at pair index `j`,
/// which give the cosine and sine branches of one Box–Muller transform,
/// so reading steps in order is the same as seeking to each one.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl NoiseStream {
    pub fn new(seed: u64, path: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path);
        rng.set_word_pos(0);
        Self { rng, spare: None }
    }

    /// Position the stream so the next draw belongs to `step`.
    pub fn seek(&mut self, step: u64) {
        // one pair = two u64 = four 32-bit words
        self.rng.set_word_pos(u128::from(step / 2) * 4);
        self.spare = None;
        if step % 2 == 1 {
            self.next_normal();
        }
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * SCALE; // (0, 1]
        let u2 = (self.rng.next_u64() >> 11) as f64 * SCALE; // [0, 1)
        let r = (-2.0 * u1.ln()).sqrt();
        let (sin, cos) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * sin);
        r * cos
    }

    pub fn normal_at(&mut self, step: u64) -> f64 {
        self.seek(step);
        self.next_normal()
    }
}

/// Sampled path `(t_k, s_k, x_k)` with `t_k = k·dt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub s: Vec<f64>,
    pub x: Vec<f64>,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Self { times: Vec::with_capacity(n), s: Vec::with_capacity(n), x: Vec::with_capacity(n) }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_k |H(s_k, x_k) - H(s_0, x_0)|`.
    pub fn energy_drift(&self, b: f64) -> f64 {
        let h0 = energy(self.s[0], self.x[0], b);
        self.s.iter().zip(&self.x).map(|(&s, &x)| (energy(s, x, b) - h0).abs()).fold(0.0, f64::max)
    }
}

/// Walk one path, calling `record(step, s, x)` at every `stride`-th step
/// (including step 0). `noise` is `None` for the noiseless flow. The
/// unwrapped phase is only tracked when `track_phase` is set.
fn walk(
    p: &BecParams,
    mut noise: Option<NoiseStream>,
    stride: usize,
    track_phase: bool,
    mut record: impl FnMut(usize, f64, f64),
) -> std::result::Result<(), (usize, f64)> {
    let n = p.n_steps();
    let amp = p.sigma * p.dt.sqrt();
    let mut state = Bloch::from_angles(p.s0, p.x0);
    let mut x = p.x0;
    let mut angle = state.phase();
    record(0, state.s, x);
    for step in 1..=n {
        let mut next = state.rk4(p.b, p.dt);
        let mut kick = 0.0;
        if let Some(stream) = noise.as_mut() {
            kick = amp * stream.next_normal();
            next = next.rotate(kick);
        }
        let drift = (next.norm_sqr() - 1.0).abs();
        if drift.is_nan() || drift > NORM_DRIFT_TOL {
            return Err((step, next.s));
        }
        if track_phase {
            let new_angle = next.phase();
            // deterministic part of the phase change, then the exact kick
            x += wrap(new_angle - kick - angle) + kick;
            angle = new_angle;
        }
        state = next;
        if step % stride == 0 {
            record(step, state.s, x);
        }
    }
    Ok(())
}

fn collect(p: &BecParams, noise: Option<NoiseStream>, path: Option<usize>) -> Result<Trajectory> {
    p.validate()?;
    let mut traj = Trajectory::with_capacity(p.n_steps() + 1);
    walk(p, noise, 1, true, |k, s, x| {
        traj.times.push(k as f64 * p.dt);
        traj.s.push(s);
        traj.x.push(x);
    })
    .map_err(|(step, s)| Error::StepRejected { path, step, s })?;
    Ok(traj)
}

/// Noiseless RK4 solution; `sigma`, `n_paths` and `seed` are ignored.
pub fn integrate_deterministic(p: &BecParams) -> Result<Trajectory> {
    collect(p, None, None)
}

/// One noisy path, reproducible bit for bit from `(seed, path_index)`.
pub fn integrate_sde(p: &BecParams, path_index: usize) -> Result<Trajectory> {
    let noise = (p.sigma > 0.0).then(|| NoiseStream::new(p.seed, path_index as u64));
    collect(p, noise, Some(path_index))
}

/// Ensemble populations, noiseless populations, and interference factors
/// sampled every `stride` steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub times: Vec<f64>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    /// Standard error of `p1` across paths.
    pub std_err1: Vec<f64>,
    pub n_paths: usize,
}

impl EnsembleResult {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Population variance of `q1` over the sampled times.
    pub fn q1_time_variance(&self) -> f64 {
        variance(&self.q1)
    }

    /// `max |q1(t)|` over samples with `t <= t_limit`, with the standard
    /// error at the maximizing sample.
    pub fn max_abs_q1_until(&self, t_limit: f64) -> (f64, f64) {
        let mut best = (0.0, 0.0);
        for ((t, q), se) in self.times.iter().zip(&self.q1).zip(&self.std_err1) {
            if *t <= t_limit + 1e-12 && q.abs() > best.0 {
                best = (q.abs(), *se);
            }
        }
        best
    }
}

pub(crate) fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

fn stride_samples(p: &BecParams, stride: usize) -> usize {
    p.n_steps() / stride + 1
}

/// Per-path `s` at the sampled times.
fn path_samples(p: &BecParams, path: usize, stride: usize) -> Result<Vec<f64>> {
    let noise = (p.sigma > 0.0).then(|| NoiseStream::new(p.seed, path as u64));
    let mut out = Vec::with_capacity(stride_samples(p, stride));
    walk(p, noise, stride, false, |_, s, _| out.push(s)).map_err(|(step, s)| Error::StepRejected {
        path: Some(path),
        step,
        s,
    })?;
    Ok(out)
}

/// Interference factor `q1` of a single path (for inspection).
pub fn path_interference(p: &BecParams, path: usize, stride: usize) -> Result<Vec<f64>> {
    p.validate()?;
    let stride = stride.max(1);
    let det = path_samples(&BecParams { sigma: 0.0, ..*p }, 0, stride)?;
    let noisy = path_samples(p, path, stride)?;
    Ok(noisy.iter().zip(&det).map(|(s, d)| 0.5 * (1.0 - s) - 0.5 * (1.0 - d)).collect())
}

/// Ensemble estimate of `p_n(t)`, `f_n(t)`, `q_n(t)`.
///
/// Paths run in parallel on the current rayon pool; sums are accumulated in
/// path-index order, so the result does not depend on the worker count.
pub fn ensemble_interference(p: &BecParams, stride: usize) -> Result<EnsembleResult> {
    p.validate()?;
    if p.n_paths < 2 {
        return Err(Error::InvalidParameter("ensemble needs at least two paths".into()));
    }
    let stride = stride.max(1);
    let len = stride_samples(p, stride);
    let det = path_samples(&BecParams { sigma: 0.0, ..*p }, 0, stride).map_err(|e| match e {
        Error::StepRejected { step, s, .. } => Error::StepRejected { path: None, step, s },
        other => other,
    })?;

    // accumulate deviations from the noiseless path; exact zeros at σ = 0
    let mut sum = vec![0.0; len];
    let mut sum_sq = vec![0.0; len];
    for start in (0..p.n_paths).step_by(CHUNK) {
        let end = (start + CHUNK).min(p.n_paths);
        let chunk: Vec<Result<Vec<f64>>> = (start..end).into_par_iter().map(|i| path_samples(p, i, stride)).collect();
        for samples in chunk {
            let samples = samples?;
            for (k, s) in samples.iter().enumerate() {
                let shift = 0.5 * (det[k] - s);
                sum[k] += shift;
                sum_sq[k] += shift * shift;
            }
        }
    }

    let n = p.n_paths as f64;
    let mut out = EnsembleResult {
        times: (0..len).map(|k| (k * stride) as f64 * p.dt).collect(),
        p1: Vec::with_capacity(len),
        p2: Vec::with_capacity(len),
        f1: Vec::with_capacity(len),
        f2: Vec::with_capacity(len),
        q1: Vec::with_capacity(len),
        q2: Vec::with_capacity(len),
        std_err1: Vec::with_capacity(len),
        n_paths: p.n_paths,
    };
    for k in 0..len {
        let mean_shift = sum[k] / n;
        let var = ((sum_sq[k] - n * mean_shift * mean_shift) / (n - 1.0)).max(0.0);
        let f1 = 0.5 * (1.0 - det[k]);
        let f2 = 0.5 * (1.0 + det[k]);
        let p1 = f1 + mean_shift;
        let p2 = f2 - mean_shift;
        out.p1.push(p1);
        out.p2.push(p2);
        out.f1.push(f1);
        out.f2.push(f2);
        out.q1.push(p1 - f1);
        out.q2.push(p2 - f2);
        out.std_err1.push((var / n).sqrt());
    }
    Ok(out)
}
