//! The coupled stochastic Loewner pair
//!
//! ```text
//! dh = (2/h) dt − √κ dB,                 h₀ = z
//! dĥ = −(2ĥ/h²) dt − κ̂/(2√κ) dB,          ĥ₀ = 0
//! ```
//!
//! obtained from `df = (2/f) dt − √k(τ) dB` with `f = h + τĥ` and
//! `k(τ) = κ + τκ̂`, integrated by Euler–Maruyama together with the
//! variational equations for `∂_z h` and `∂_z ĥ`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{BrownianPath, Dyadic};
use crate::scalar::FloatScalar;

/// Steps are bisected at most this many times.
const MAX_HALVINGS: u32 = 40;
const STABILITY_RATIO: f64 = 1024.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdeParams {
    pub kappa: f64,
    pub kappa_hat: f64,
    pub dt: f64,
    pub t_max: f64,
    pub swallow_eps: f64,
    pub seed: u64,
    /// Bisect steps near the singularity; off gives plain fixed-step
    /// Euler–Maruyama.
    #[serde(default = "default_adaptive")]
    pub adaptive: bool,
}

fn default_adaptive() -> bool {
    true
}

impl SdeParams {
    pub fn new(kappa: f64, kappa_hat: f64, dt: f64, t_max: f64, seed: u64) -> Result<Self> {
        let p = SdeParams { kappa, kappa_hat, dt, t_max, swallow_eps: 1e-6, seed, adaptive: true };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidParam(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !self.kappa_hat.is_finite() {
            return Err(Error::InvalidParam("kappa_hat must be finite".into()));
        }
        if !(self.dt > 0.0) || !(self.t_max > 0.0) || self.dt > self.t_max {
            return Err(Error::InvalidParam(format!(
                "need 0 < dt <= t_max, got dt = {}, t_max = {}",
                self.dt, self.t_max
            )));
        }
        if !(self.swallow_eps > 0.0) {
            return Err(Error::InvalidParam("swallow_eps must be positive".into()));
        }
        Ok(())
    }

    pub fn sqrt_kappa(&self) -> f64 {
        self.kappa.sqrt()
    }

    /// Diffusion coefficient magnitude of `ĥ`, `κ̂/(2√κ)`.
    pub fn hat_noise(&self) -> f64 {
        self.kappa_hat / (2.0 * self.sqrt_kappa())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// `f_t(z, τ) = h + τĥ` and its `z`-derivative at one seed point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapPointState<T> {
    pub z0: T,
    pub h: T,
    pub h_hat: T,
    pub dh_dz: T,
    pub dh_hat_dz: T,
    pub t: f64,
    pub swallowed: bool,
}

impl<T: FloatScalar> MapPointState<T> {
    pub fn initial(z0: T) -> Self {
        MapPointState { z0, h: z0, h_hat: T::zero(), dh_dz: T::one(), dh_hat_dz: T::zero(), t: 0.0, swallowed: false }
    }
}

/// Drift of `(h, ĥ, ∂_z h, ∂_z ĥ)`.
pub fn drift<T: FloatScalar>(s: &MapPointState<T>) -> [T; 4] {
    let two = T::from_f64(2.0);
    let inv = T::one() / s.h;
    let inv2 = inv * inv;
    [
        two * inv,
        -two * s.h_hat * inv2,
        -two * s.dh_dz * inv2,
        -two * s.dh_hat_dz * inv2 + T::from_f64(4.0) * s.h_hat * s.dh_dz * inv2 * inv,
    ]
}

/// Diffusion of `(h, ĥ)`; the derivatives carry no noise.
pub fn diffusion(params: &SdeParams) -> (f64, f64) {
    (-params.sqrt_kappa(), -params.hat_noise())
}

/// Whether an Euler step of size `dt` at `h` must be bisected: when
/// `dt > d²/1024` with `d = |h| − eps` the distance to the swallowing cutoff.
/// Above that size explicit Euler on `2/h` overshoots, the variational factor
/// `1 − 2dt/h²` loses its sign, and one noise kick can carry the point well
/// past the cutoff, where the observables blow up like powers of `1/h`.
pub fn needs_refinement<T: FloatScalar>(h: T, dt: f64, eps: f64) -> bool {
    let d = (h.magnitude() - eps).max(0.0);
    dt > d * d / STABILITY_RATIO
}

fn is_absorbed<T: FloatScalar>(h: T, eps: f64) -> bool {
    !(h.magnitude() >= eps)
}

/// One plain Euler–Maruyama update. A state that ends inside the cutoff is
/// marked swallowed; an update that would leave the domain is discarded and
/// the state is marked swallowed where it stood.
pub fn euler_update<T: FloatScalar>(state: &mut MapPointState<T>, d_b: f64, dt: f64, params: &SdeParams) {
    if state.swallowed {
        return;
    }
    if is_absorbed(state.h, params.swallow_eps) {
        state.swallowed = true;
        return;
    }
    let (sig, sig_hat) = diffusion(params);
    let [mh, mhh, mdh, mdhh] = drift(state);
    let step_dt = T::from_f64(dt);
    let h = state.h + mh * step_dt + T::from_f64(sig * d_b);
    if T::left_domain(state.h, h) {
        // frozen at the last in-domain state
        state.swallowed = true;
        return;
    }
    state.h = h;
    state.h_hat = state.h_hat + mhh * step_dt + T::from_f64(sig_hat * d_b);
    state.dh_dz = state.dh_dz + mdh * step_dt;
    state.dh_hat_dz = state.dh_hat_dz + mdhh * step_dt;
    state.t += dt;
    if is_absorbed(state.h, params.swallow_eps) {
        state.swallowed = true;
    }
}

/// How a Brownian increment over a piece of a step is split at its midpoint.
pub trait Bisect {
    /// Returns the increment over the first half of `at`, whose increment is
    /// `d_b` and length `dt`.
    fn first_half(&mut self, at: Dyadic, d_b: f64, dt: f64) -> f64;
}

/// Splits evenly, without randomness.
pub struct EvenSplit;

impl Bisect for EvenSplit {
    fn first_half(&mut self, _at: Dyadic, d_b: f64, _dt: f64) -> f64 {
        0.5 * d_b
    }
}

/// Refinement along a [`BrownianPath`] seen on a grid of `2^ratio_log2` base
/// steps per step.
pub struct OnPath<'a> {
    pub path: &'a BrownianPath,
    pub ratio_log2: u32,
}

impl Bisect for OnPath<'_> {
    fn first_half(&mut self, at: Dyadic, d_b: f64, dt: f64) -> f64 {
        self.path.first_half(self.ratio_log2, at, d_b, dt)
    }
}

/// Advances every live state over grid step `at` of length `dt` with
/// Brownian increment `d_b`, bisecting (and re-deciding after each half)
/// while any live state needs refinement. All states share one time grid.
pub fn advance<T: FloatScalar, B: Bisect>(
    states: &mut [MapPointState<T>],
    at: Dyadic,
    d_b: f64,
    dt: f64,
    params: &SdeParams,
    bisect: &mut B,
) {
    let refine = params.adaptive
        && at.level < MAX_HALVINGS
        && states.iter().any(|s| !s.swallowed && needs_refinement(s.h, dt, params.swallow_eps));
    if refine {
        let first = bisect.first_half(at, d_b, dt);
        let (left, right) = at.halves();
        advance(states, left, first, 0.5 * dt, params, bisect);
        advance(states, right, d_b - first, 0.5 * dt, params, bisect);
    } else {
        for s in states.iter_mut() {
            euler_update(s, d_b, dt, params);
        }
    }
}

/// One Euler–Maruyama step with local substepping near the singularity.
///
/// The increment is split evenly across substeps; the path drivers refine
/// it as a Brownian bridge instead.
pub fn step<T: FloatScalar>(state: &MapPointState<T>, d_b: f64, dt: f64, params: &SdeParams) -> MapPointState<T> {
    let mut s = [*state];
    advance(&mut s, Dyadic::whole(0), d_b, dt, params, &mut EvenSplit);
    s[0]
}

/// `g = h + √κ B_t`, `ĝ = ĥ + κ̂/(2√κ) B_t`.
pub fn to_g_frame<T: FloatScalar>(state: &MapPointState<T>, b_t: f64, params: &SdeParams) -> (T, T) {
    (state.h + T::from_f64(params.sqrt_kappa() * b_t), state.h_hat + T::from_f64(params.hat_noise() * b_t))
}

/// Snapshots of every seed point at every checkpoint of one Brownian path.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub checkpoints: Vec<f64>,
    /// `states[k][i]` is point `i` at checkpoint `k`.
    pub states: Vec<Vec<MapPointState<T>>>,
    /// `B_t` at each checkpoint.
    pub brownian: Vec<f64>,
}

/// Step indices of the checkpoints on the grid of `params`.
pub fn checkpoint_steps(checkpoints: &[f64], params: &SdeParams) -> Result<Vec<usize>> {
    let tol = 1e-9 * params.t_max.max(1.0);
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParam("checkpoints must be sorted".into()));
    }
    checkpoints
        .iter()
        .map(|&t| {
            if !(t >= -tol && t <= params.t_max + tol) {
                return Err(Error::InvalidParam(format!("checkpoint {t} outside [0, {}]", params.t_max)));
            }
            Ok((t / params.dt).round() as usize)
        })
        .collect()
}

/// Drives all points with one shared Brownian path. The grid step
/// `params.dt` must be `2^m` times the base step of `path`, which must cover
/// the last checkpoint.
pub fn evolve_on_path<T: FloatScalar>(
    points: &[T],
    params: &SdeParams,
    checkpoints: &[f64],
    path: &BrownianPath,
) -> Result<Trajectory<T>> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    params.validate()?;
    let steps = checkpoint_steps(checkpoints, params)?;
    let ratio = params.dt / path.base_dt();
    let ratio_log2 = ratio.log2().round();
    if !(0.0..=30.0).contains(&ratio_log2) || (ratio_log2.exp2() - ratio).abs() > 1e-9 * ratio {
        return Err(Error::InvalidParam(format!(
            "dt = {} is not a power-of-two multiple of the path step {}",
            params.dt,
            path.base_dt()
        )));
    }
    let ratio_log2 = ratio_log2 as u32;
    let last = steps.last().copied().unwrap_or(0);
    if path.base().len() < last << ratio_log2 {
        return Err(Error::InvalidParam(format!(
            "path of {} steps is shorter than {} steps of dt = {}",
            path.base().len(),
            last,
            params.dt
        )));
    }
    let mut bisect = OnPath { path, ratio_log2 };
    let mut current: Vec<MapPointState<T>> = points.iter().map(|&z| MapPointState::initial(z)).collect();
    let mut out = Trajectory { checkpoints: checkpoints.to_vec(), states: Vec::new(), brownian: Vec::new() };
    let mut b = 0.0;
    let mut done = 0;
    for &target in &steps {
        while done < target {
            let d_b = path.increment(ratio_log2, done as u64);
            advance(&mut current, Dyadic::whole(done as u64), d_b, params.dt, params, &mut bisect);
            b += d_b;
            done += 1;
        }
        out.states.push(current.clone());
        out.brownian.push(b);
    }
    Ok(out)
}

/// One path driven by the stream of `params.seed`.
pub fn evolve<T: FloatScalar>(points: &[T], params: &SdeParams, checkpoints: &[f64]) -> Result<Trajectory<T>> {
    evolve_path(points, params, checkpoints, 0)
}

/// Path `index` of the ensemble with master seed `params.seed`.
pub fn evolve_path<T: FloatScalar>(
    points: &[T],
    params: &SdeParams,
    checkpoints: &[f64],
    index: u64,
) -> Result<Trajectory<T>> {
    let n = checkpoint_steps(checkpoints, params)?.last().copied().unwrap_or(0);
    let path = BrownianPath::sample(params.seed, index, params.dt, n);
    evolve_on_path(points, params, checkpoints, &path)
}

/// `n_paths` independent paths, in path-index order regardless of threading.
pub fn evolve_ensemble<T: FloatScalar>(
    points: &[T],
    params: &SdeParams,
    checkpoints: &[f64],
    n_paths: usize,
) -> Result<Vec<Trajectory<T>>> {
    (0..n_paths as u64).into_par_iter().map(|i| evolve_path(points, params, checkpoints, i)).collect()
}

pub const TRAJECTORY_CSV_HEADER: &str =
    "path,point_index,t,Re_h,Im_h,Re_hhat,Im_hhat,Re_dh,Im_dh,Re_dhhat,Im_dhhat,B,swallowed";

/// One row per (path, point, checkpoint). `swallowed` is written as 0/1.
pub fn write_trajectory_csv<T: FloatScalar, W: Write>(out: &mut W, paths: &[Trajectory<T>]) -> std::io::Result<()> {
    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    for (path, traj) in paths.iter().enumerate() {
        for (k, (&t, states)) in traj.checkpoints.iter().zip(&traj.states).enumerate() {
            for (i, s) in states.iter().enumerate() {
                writeln!(
                    out,
                    "{path},{i},{t},{},{},{},{},{},{},{},{},{},{}",
                    s.h.re(),
                    s.h.im(),
                    s.h_hat.re(),
                    s.h_hat.im(),
                    s.dh_dz.re(),
                    s.dh_dz.im(),
                    s.dh_hat_dz.re(),
                    s.dh_hat_dz.im(),
                    traj.brownian[k],
                    u8::from(s.swallowed)
                )?;
            }
        }
    }
    Ok(())
}
