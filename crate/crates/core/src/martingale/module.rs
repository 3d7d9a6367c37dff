use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mc::mean_se;
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::noise::path_rng;
use crate::scalar::Scalar;
use crate::virasoro::{beta_operator, drift_operator, Coefficients, ModuleContext, ModuleState, Partition};
use rand_distr::{Distribution, StandardNormal};

fn check_graded<T>(cutoff: u32, a: &Coefficients<T>, b: &Coefficients<T>) -> Result<()> {
    if cutoff < 2 {
        return Err(Error::InvalidParam(format!("level cutoff {cutoff} below 2")));
    }
    match a.keys().chain(b.keys()).find(|&&n| n >= 0) {
        Some(&n) => Err(Error::NonGradedWalk(n)),
        None => Ok(()),
    }
}

/// `exp(tA)·start` truncated at `cutoff`, `A` the action of `α₀ + ½β²`.
/// The series terminates because `A` raises the level.
fn flow<T: Scalar>(
    t: &T,
    cutoff: u32,
    a: &Coefficients<T>,
    b: &Coefficients<T>,
    start: ModuleState<T>,
) -> ModuleState<T> {
    let mut term = start.truncate(cutoff);
    let mut sum = term.clone();
    for j in 1..=cutoff as i64 {
        let factor = Dual::constant(t.clone() / T::from_i64(j));
        term = drift_operator(a, b, &term).truncate(cutoff).scale(&factor);
        if term.is_zero() {
            break;
        }
        sum = sum.add(&term);
    }
    sum
}

/// `E[G_t|Δ+θ⟩]` truncated at level `cutoff`, as the terminating series of
/// `exp(tA)|Δ+θ⟩`.
pub fn module_expected_state<T: Scalar>(
    t: &T,
    cutoff: u32,
    a: &Coefficients<T>,
    b: &Coefficients<T>,
    ctx: &ModuleContext<T>,
) -> Result<ModuleState<T>> {
    check_graded(cutoff, a, b)?;
    Ok(flow(t, cutoff, a, b, ModuleState::highest_weight(ctx.clone())))
}

/// Time stepping of the truncated walk.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModuleScheme {
    /// `V ← V(I + A dt + B dB)`.
    EulerMaruyama,
    /// `V ← V·exp(α₀ dt)·exp(β dB)`, each factor exact on the truncation.
    /// Coefficients that only the deterministic part reaches come out exact.
    #[default]
    Splitting,
}

/// Sample mean of `V_t|Δ+θ⟩` with per-coefficient standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleEstimate {
    pub mean: ModuleState<f64>,
    /// Standard errors of the bulk and θ parts, stored as a dual.
    pub stderr: BTreeMap<Partition, Dual<f64>>,
    pub n_paths: usize,
    pub n_steps: usize,
}

impl ModuleEstimate {
    pub fn stderr_of(&self, label: &Partition) -> Dual<f64> {
        self.stderr.get(label).copied().unwrap_or_default()
    }
}

/// Sparse columns: `cols[j]` lists `(i, A_ij)`.
struct Matrix {
    cols: Vec<Vec<(usize, Dual<f64>)>>,
}

impl Matrix {
    fn from_map(
        basis: &[Partition],
        ctx: &ModuleContext<f64>,
        f: impl Fn(ModuleState<f64>) -> ModuleState<f64>,
    ) -> Self {
        let index: BTreeMap<&Partition, usize> = basis.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let cols = basis
            .iter()
            .map(|p| {
                f(ModuleState::basis(ctx.clone(), p.clone()))
                    .terms()
                    .iter()
                    .filter_map(|(q, c)| index.get(q).map(|&i| (i, *c)))
                    .collect()
            })
            .collect();
        Matrix { cols }
    }

    fn apply(&self, v: &[Dual<f64>], out: &mut [Dual<f64>]) {
        out.fill(Dual::default());
        for (j, col) in self.cols.iter().enumerate() {
            if v[j].body == 0.0 && v[j].slope == 0.0 {
                continue;
            }
            for &(i, c) in col {
                out[i] += c * v[j];
            }
        }
    }
}

/// Monte Carlo over `n_paths` paths of the truncated walk driven by path
/// streams of `seed`, with `round(t/dt)` steps.
#[allow(clippy::too_many_arguments)]
pub fn module_mc_state(
    t: f64,
    cutoff: u32,
    a: &Coefficients<f64>,
    b: &Coefficients<f64>,
    ctx: &ModuleContext<f64>,
    n_paths: usize,
    seed: u64,
    dt: f64,
    scheme: ModuleScheme,
) -> Result<ModuleEstimate> {
    check_graded(cutoff, a, b)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParam(format!("dt = {dt}")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParam(format!("t = {t}")));
    }
    if n_paths == 0 {
        return Err(Error::InvalidParam("n_paths = 0".into()));
    }
    let n_steps = (t / dt).round() as usize;
    let basis = Partition::up_to_level(cutoff);
    let dim = basis.len();
    let none = Coefficients::new();
    let beta = Matrix::from_map(&basis, ctx, |s| beta_operator(b, &s).truncate(cutoff));
    let deterministic = match scheme {
        ModuleScheme::EulerMaruyama => Matrix::from_map(&basis, ctx, |s| drift_operator(a, b, &s).truncate(cutoff)),
        ModuleScheme::Splitting => Matrix::from_map(&basis, ctx, |s| flow(&dt, cutoff, a, &none, s)),
    };
    let hw = basis.iter().position(|p| p.is_empty()).expect("basis contains the empty partition");

    let finals: Vec<Vec<Dual<f64>>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|idx| {
            let mut rng = path_rng(seed, idx);
            let sd = dt.sqrt();
            let mut v = vec![Dual::default(); dim];
            v[hw] = Dual::new(1.0, 0.0);
            let mut w = vec![Dual::default(); dim];
            let mut tmp = vec![Dual::default(); dim];
            for _ in 0..n_steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                let d_b = sd * z;
                match scheme {
                    ModuleScheme::EulerMaruyama => {
                        deterministic.apply(&v, &mut w);
                        beta.apply(&v, &mut tmp);
                        for i in 0..dim {
                            v[i] = v[i] + w[i].scale(&dt) + tmp[i].scale(&d_b);
                        }
                    }
                    ModuleScheme::Splitting => {
                        // Horner form of exp(x B) v
                        w.copy_from_slice(&v);
                        for j in (1..=cutoff).rev() {
                            beta.apply(&w, &mut tmp);
                            let x = d_b / j as f64;
                            for i in 0..dim {
                                w[i] = v[i] + tmp[i].scale(&x);
                            }
                        }
                        deterministic.apply(&w, &mut v);
                    }
                }
            }
            v
        })
        .collect();

    let mut mean = ModuleState::zero(ctx.clone());
    let mut stderr = BTreeMap::new();
    for (i, label) in basis.iter().enumerate() {
        let bodies: Vec<f64> = finals.iter().map(|v| v[i].body).collect();
        let slopes: Vec<f64> = finals.iter().map(|v| v[i].slope).collect();
        let (mb, sb) = mean_se(&bodies);
        let (ms, ss) = mean_se(&slopes);
        mean.add_term(label.clone(), Dual::new(mb, ms));
        stderr.insert(label.clone(), Dual::new(sb, ss));
    }
    Ok(ModuleEstimate { mean, stderr, n_paths, n_steps })
}
