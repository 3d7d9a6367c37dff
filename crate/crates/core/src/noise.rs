//! Seeded Gaussian increments and per-path substreams.
//!
//! Path `i` of an ensemble with master seed `s` draws from ChaCha8 seeded with
//! `s` on stream `i`, so results do not depend on how paths are scheduled
//! across threads. Refinements below the sampling grid are keyed by their
//! position on the path rather than drawn in sequence, so a path is the same
//! whatever grid it is integrated on.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type PathRng = ChaCha8Rng;

pub fn path_rng(master_seed: u64, path_index: u64) -> PathRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(path_index);
    rng
}

const BRIDGE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Counter-mode splitmix64 generator, used only to turn a node key into a
/// handful of random words.
struct KeyedRng(u64);

impl RngCore for KeyedRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(1);
        splitmix(self.0)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        rand::rand_core::impls::fill_bytes_via_next(self, dst)
    }
}

/// Standard normal attached to one node of the bridge refinement of a base
/// step, a pure function of its arguments.
pub fn bridge_normal(master_seed: u64, path_index: u64, base_step: u64, level: u32, index: u64) -> f64 {
    let mut key = splitmix(master_seed ^ BRIDGE_SALT);
    for part in [path_index, base_step, level as u64, index] {
        key = splitmix(key ^ part);
    }
    KeyedRng(key).sample(StandardNormal)
}

/// Dyadic piece `[index, index + 1)·2^−level` of grid step `step`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dyadic {
    pub step: u64,
    pub level: u32,
    pub index: u64,
}

impl Dyadic {
    pub fn whole(step: u64) -> Self {
        Dyadic { step, level: 0, index: 0 }
    }

    pub fn halves(self) -> (Self, Self) {
        let child = |i| Dyadic { step: self.step, level: self.level + 1, index: i };
        (child(2 * self.index), child(2 * self.index + 1))
    }
}

/// One Brownian path: increments on a base grid, refined below it by
/// Brownian-bridge midpoints that depend only on their position. Coarser
/// grids whose step is `2^m` base steps see the same path.
#[derive(Clone, Debug, PartialEq)]
pub struct BrownianPath {
    seed: u64,
    index: u64,
    base_dt: f64,
    base: Vec<f64>,
}

impl BrownianPath {
    /// Path `index` of master seed `seed`, sampled on `n_base` steps of `base_dt`.
    pub fn sample(seed: u64, index: u64, base_dt: f64, n_base: usize) -> Self {
        let mut base = vec![0.0; n_base];
        fill_increments(&mut path_rng(seed, index), base_dt, &mut base);
        BrownianPath { seed, index, base_dt, base }
    }

    /// Prescribed base increments; refinement still draws from `(seed, index)`.
    pub fn from_increments(seed: u64, index: u64, base_dt: f64, base: Vec<f64>) -> Self {
        BrownianPath { seed, index, base_dt, base }
    }

    pub fn base_dt(&self) -> f64 {
        self.base_dt
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    /// Increment over step `step` of the grid with `2^ratio_log2` base steps
    /// per step.
    pub fn increment(&self, ratio_log2: u32, step: u64) -> f64 {
        let r = 1usize << ratio_log2;
        let start = step as usize * r;
        self.base[start..start + r].iter().sum()
    }

    /// Increment over the first half of `at`, given its increment `d_b` and
    /// length `dt`.
    pub fn first_half(&self, ratio_log2: u32, at: Dyadic, d_b: f64, dt: f64) -> f64 {
        if at.level < ratio_log2 {
            let span = 1usize << (ratio_log2 - at.level);
            let start = (at.step as usize) * (1 << ratio_log2) + at.index as usize * span;
            return self.base[start..start + span / 2].iter().sum();
        }
        let depth = at.level - ratio_log2;
        let base_step = (at.step << ratio_log2) + (at.index >> depth);
        let index = at.index & ((1u64 << depth) - 1);
        let z = bridge_normal(self.seed, self.index, base_step, depth, index);
        0.5 * d_b + 0.5 * dt.sqrt() * z
    }
}

/// Fills `out` with independent `N(0, dt)` draws.
pub fn fill_increments(rng: &mut PathRng, dt: f64, out: &mut [f64]) {
    let sd = dt.sqrt();
    for x in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *x = sd * z;
    }
}

/// `n` Brownian increments of variance `dt`, identical for identical arguments.
pub fn brownian_increments(seed: u64, n: usize, dt: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    fill_increments(&mut path_rng(seed, 0), dt, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(brownian_increments(11, 1000, 1e-3), brownian_increments(11, 1000, 1e-3));
        assert_ne!(brownian_increments(11, 10, 1e-3), brownian_increments(12, 10, 1e-3));
    }

    #[test]
    fn substreams_differ() {
        let mut a = [0.0; 8];
        let mut b = [0.0; 8];
        fill_increments(&mut path_rng(3, 0), 1.0, &mut a);
        fill_increments(&mut path_rng(3, 1), 1.0, &mut b);
        assert_ne!(a, b);
    }

    #[test]
    fn coarse_grids_share_the_path() {
        let path = BrownianPath::sample(5, 2, 0.125, 16);
        // a step of 4 base steps split twice lands on base increments
        let d_b = path.increment(2, 1);
        let first = path.first_half(2, Dyadic::whole(1), d_b, 0.5);
        assert!((first - (path.base()[4] + path.base()[5])).abs() < 1e-15);
        let (_, second) = Dyadic::whole(1).halves();
        let q = path.first_half(2, second, d_b - first, 0.25);
        assert!((q - path.base()[6]).abs() < 1e-15);
        // below the base grid the same node gives the same midpoint
        let fine = Dyadic { step: 6, level: 0, index: 0 };
        let coarse = Dyadic { step: 1, level: 2, index: 2 };
        let b6 = path.base()[6];
        assert_eq!(path.first_half(0, fine, b6, 0.125), path.first_half(2, coarse, b6, 0.125));
    }

    #[test]
    fn bridge_normals_are_keyed() {
        assert_eq!(bridge_normal(1, 2, 3, 4, 5), bridge_normal(1, 2, 3, 4, 5));
        assert_ne!(bridge_normal(1, 2, 3, 4, 5), bridge_normal(1, 2, 3, 4, 6));
        assert_ne!(bridge_normal(1, 2, 3, 4, 5), bridge_normal(1, 3, 3, 4, 5));
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|i| bridge_normal(9, 0, i, 1, 0)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn gaussian_moments() {
        let n = 1_000_000;
        let dt = 1e-3;
        let xs = brownian_increments(2024, n, dt);
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 * (dt / n as f64).sqrt(), "mean {mean}");
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var / dt - 1.0).abs() < 0.01, "variance ratio {}", var / dt);
    }
}
