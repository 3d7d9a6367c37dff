use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::observable::evaluate;
use super::report::{ComponentStats, McReport};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::loewner::{checkpoint_steps, evolve_path, MapPointState, SdeParams};
use crate::Rational;

pub const MIN_PATHS: usize = 100;

/// What an absorbed point contributes to the averages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Absorption {
    /// The observable is frozen at its value when the point was absorbed
    /// (the stopped process, whose mean is conserved too).
    #[default]
    Stop,
    /// Absorbed points are left out of the averages.
    Exclude,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub absorption: Absorption,
    /// Drop samples whose `|M|` exceeds this empirical quantile, per point and
    /// checkpoint.
    pub clip_quantile: Option<f64>,
}

#[derive(Clone, Copy)]
struct Sample {
    m: Dual<f64>,
    absorbed: bool,
}

fn magnitude(m: &Dual<f64>) -> f64 {
    m.body.abs().max(m.slope.abs())
}

/// [`mc_drift_report_with`] under default options.
pub fn mc_drift_report(
    points: &[f64],
    delta: &Rational,
    params: &SdeParams,
    n_paths: usize,
    checkpoints: &[f64],
) -> Result<McReport> {
    mc_drift_report_with(points, delta, params, n_paths, checkpoints, &McOptions::default())
}

/// Monte Carlo estimate of `E[M_t]` at each checkpoint for each real seed
/// point, with z-scores of the drift against the deterministic `t = 0` value.
pub fn mc_drift_report_with(
    points: &[f64],
    delta: &Rational,
    params: &SdeParams,
    n_paths: usize,
    checkpoints: &[f64],
    options: &McOptions,
) -> Result<McReport> {
    if points.is_empty() {
        return Err(Error::EmptyPoints);
    }
    if n_paths < MIN_PATHS {
        return Err(Error::InvalidParam(format!("n_paths = {n_paths}, need at least {MIN_PATHS}")));
    }
    if let Some(q) = options.clip_quantile {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParam(format!("clip quantile {q} outside (0, 1)")));
        }
    }
    params.validate()?;
    checkpoint_steps(checkpoints, params)?;
    let d = delta.to_f64().ok_or_else(|| Error::InvalidParam(format!("delta = {delta}")))?;
    let exponent = Dual::new(d, 1.0);

    let initial: Vec<Dual<f64>> =
        points.iter().map(|&x| evaluate(&MapPointState::initial(x), &exponent)).collect::<Result<_>>()?;

    // samples[path][k][i]
    let samples: Vec<Vec<Vec<Sample>>> = (0..n_paths as u64)
        .into_par_iter()
        .map(|idx| {
            let traj = evolve_path(points, params, checkpoints, idx)?;
            traj.states
                .iter()
                .map(|row| {
                    row.iter().map(|s| Ok(Sample { m: evaluate(s, &exponent)?, absorbed: s.swallowed })).collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let n_k = checkpoints.len();
    let mut components: Vec<ComponentStats> = Vec::new();
    for &x in points {
        for part in ["bulk", "slope"] {
            components.push(ComponentStats {
                name: format!("x={x}:{part}"),
                means: Vec::with_capacity(n_k),
                ses: Vec::with_capacity(n_k),
                zscores: Vec::with_capacity(n_k),
            });
        }
    }
    let mut absorbed_counts = vec![0; n_k];
    let mut clipped_counts = vec![0; n_k];
    let mut max_abs = vec![0.0_f64; n_k];

    for (k, &t) in checkpoints.iter().enumerate() {
        for (i, m0) in initial.iter().enumerate() {
            let cell: Vec<Sample> = samples.iter().map(|p| p[k][i]).collect();
            let n_absorbed = cell.iter().filter(|s| s.absorbed).count();
            if n_absorbed == n_paths {
                return Err(Error::AllAbsorbed(t));
            }
            absorbed_counts[k] += n_absorbed;
            for s in &cell {
                max_abs[k] = max_abs[k].max(magnitude(&s.m));
            }
            let threshold = options.clip_quantile.map(|q| quantile(cell.iter().map(|s| magnitude(&s.m)).collect(), q));
            let mut kept: Vec<Dual<f64>> = Vec::with_capacity(n_paths);
            for s in &cell {
                if threshold.is_some_and(|c| magnitude(&s.m) > c) {
                    clipped_counts[k] += 1;
                } else if !(s.absorbed && options.absorption == Absorption::Exclude) {
                    kept.push(s.m);
                }
            }
            if kept.is_empty() {
                return Err(Error::AllAbsorbed(t));
            }
            let bodies: Vec<f64> = kept.iter().map(|m| m.body).collect();
            let slopes: Vec<f64> = kept.iter().map(|m| m.slope).collect();
            for (c, (xs, x0)) in [(2 * i, (bodies, m0.body)), (2 * i + 1, (slopes, m0.slope))] {
                let (mean, se) = mean_se(&xs);
                let comp = &mut components[c];
                comp.means.push(mean);
                comp.ses.push(se);
                comp.zscores.push(zscore(mean - x0, se));
            }
        }
    }

    Ok(McReport {
        observable: "(f')^(delta+theta) f^(-2(delta+theta))".into(),
        params: json!({
            "delta": delta.to_string(),
            "kappa": params.kappa,
            "kappa_hat": params.kappa_hat,
            "dt": params.dt,
            "t_max": params.t_max,
            "swallow_eps": params.swallow_eps,
            "points": points,
            "absorption": options.absorption,
            "clip_quantile": options.clip_quantile,
        }),
        seed: params.seed,
        n_paths,
        checkpoints: checkpoints.to_vec(),
        components,
        absorbed_counts,
        max_abs,
        clipped_counts,
    })
}

/// Sample mean and standard error of the mean (summed in index order).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let Some(&shift) = xs.first() else {
        return (f64::NAN, f64::NAN);
    };
    // shifted so that a constant sample has exactly zero spread
    let mean = shift + xs.iter().map(|x| x - shift).sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `diff / se`, taken as 0 for a zero-variance cell that has not moved and as
/// `±f64::MAX` for one that has.
pub fn zscore(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        f64::MAX.copysign(diff)
    }
}

fn quantile(mut xs: Vec<f64>, q: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let idx = ((xs.len() as f64 - 1.0) * q).round() as usize;
    xs[idx]
}
