use std::fmt::Display;

use anyhow::{Context, Result};
use num_complex::Complex64;
use serde_json::{json, Value};
use sle_lcft::linkmap::{compute_mu, compute_nu, expand_tau, LaurentPoly, TauExpansion};
use sle_lcft::loewner::{evolve_ensemble, write_trajectory_csv, Trajectory};
use sle_lcft::martingale::{mc_drift_report_with, module_expected_state, module_mc_state, ModuleScheme};
use sle_lcft::virasoro::{
    check_vanishing, coefficients_to_f64, null_vector_level2, sle_coefficients, ModuleContext, ModuleState, Partition,
};
use sle_lcft::{Dual, FloatScalar, Scalar};

use crate::config::{Format, Point, RunConfig};

/// What a command produced: the artifact body, a human summary, and whether
/// the run counts as a success for the exit status.
pub struct Outcome {
    pub artifact: Artifact,
    pub summary: String,
    pub ok: bool,
}

pub enum Artifact {
    /// `{config, result}`, or a document with its own place for the config.
    Json(Value),
    /// Rows after the config comment lines.
    Csv(String),
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command.as_str() {
        "nullvector" => nullvector(cfg),
        "link" => link(cfg),
        "simulate" => simulate(cfg),
        "martingale" => martingale(cfg),
        "module-mc" => module_mc(cfg),
        other => unreachable!("unknown command {other}"),
    }
}

fn wrap(cfg: &RunConfig, result: Value) -> Value {
    json!({ "config": cfg.to_json(), "result": result })
}

fn key_value_csv(pairs: &[(&str, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in pairs {
        out.push_str(&format!("{k},\"{}\"\n", v.replace('"', "\"\"")));
    }
    out
}

fn pairs_to_json(pairs: &[(&str, String)]) -> Value {
    Value::Object(pairs.iter().map(|(k, v)| (k.to_string(), Value::String(v.clone()))).collect())
}

fn nullvector(cfg: &RunConfig) -> Result<Outcome> {
    let nv = null_vector_level2(&cfg.delta)?;
    let v = check_vanishing(&nv.chi);
    let pairs = [
        ("delta", cfg.delta.to_string()),
        ("gamma", nv.gamma.to_string()),
        ("central_charge", nv.central.to_string()),
        ("kappa", nv.kappa().to_string()),
        ("chi", nv.chi.to_string()),
        ("L1_chi", v.residual1.to_string()),
        ("L2_chi", v.residual2.to_string()),
        ("is_null", v.is_null.to_string()),
        ("logarithmic", nv.is_logarithmic().to_string()),
    ];
    let summary = format!(
        "delta = {}: gamma = {}, c = {}, k = {}, null = {}, logarithmic = {}",
        cfg.delta,
        nv.gamma,
        nv.central,
        nv.kappa(),
        v.is_null,
        nv.is_logarithmic()
    );
    let artifact = match cfg.format {
        Format::Json => {
            let mut result = pairs_to_json(&pairs);
            result["is_null"] = Value::Bool(v.is_null);
            result["logarithmic"] = Value::Bool(nv.is_logarithmic());
            Artifact::Json(wrap(cfg, result))
        }
        Format::Csv => Artifact::Csv(key_value_csv(&pairs)),
    };
    Ok(Outcome { artifact, summary, ok: v.is_null })
}

fn expansion_pairs<T: Scalar + Display>(name: &str, p: &LaurentPoly<T>) -> Vec<(String, String)> {
    let TauExpansion { bulk, hat_free, hat_linear } = expand_tau(p);
    vec![
        (name.to_string(), p.to_string()),
        (format!("{name}_bulk"), bulk.to_string()),
        (format!("{name}_hat_free"), hat_free.to_string()),
        (format!("{name}_hat_linear"), hat_linear.to_string()),
    ]
}

fn link_pairs<T: Scalar + Display>(sqrt_k: Dual<T>) -> Vec<(String, String)> {
    let (a, b) = sle_coefficients(sqrt_k.clone());
    let mut out = vec![("sqrt_k".to_string(), sqrt_k.to_string())];
    out.extend(expansion_pairs("mu", &compute_mu(&a, &b)));
    out.extend(expansion_pairs("nu", &compute_nu(&b)));
    out
}

fn link(cfg: &RunConfig) -> Result<Outcome> {
    let exact = cfg.exact_k().and_then(|k| k.sqrt_exact().ok());
    let (pairs, arithmetic) = match exact {
        Some(root) => (link_pairs(root), "exact"),
        None => {
            let k = Dual::new(cfg.kappa.to_f64(), cfg.kappa_hat.to_f64());
            (link_pairs(k.sqrt()?), "float")
        }
    };
    let mut pairs: Vec<(&str, String)> = pairs.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    pairs.insert(0, ("arithmetic", arithmetic.to_string()));
    let lookup = |k: &str| pairs.iter().find(|(n, _)| *n == k).map(|(_, v)| v.clone()).unwrap_or_default();
    let summary =
        format!("k = {} + θ({}), {arithmetic}: mu = {}, nu = {}", cfg.kappa, cfg.kappa_hat, lookup("mu"), lookup("nu"));
    let artifact = match cfg.format {
        Format::Json => Artifact::Json(wrap(cfg, pairs_to_json(&pairs))),
        Format::Csv => Artifact::Csv(key_value_csv(&pairs)),
    };
    Ok(Outcome { artifact, summary, ok: true })
}

fn trajectory_rows<T: FloatScalar>(paths: &[Trajectory<T>]) -> Value {
    let pair = |z: T| json!([z.re(), z.im()]);
    let mut rows = Vec::new();
    for (path, traj) in paths.iter().enumerate() {
        for (k, (&t, states)) in traj.checkpoints.iter().zip(&traj.states).enumerate() {
            for (i, s) in states.iter().enumerate() {
                rows.push(json!({
                    "path": path,
                    "point_index": i,
                    "t": t,
                    "h": pair(s.h),
                    "h_hat": pair(s.h_hat),
                    "dh_dz": pair(s.dh_dz),
                    "dh_hat_dz": pair(s.dh_hat_dz),
                    "B": traj.brownian[k],
                    "swallowed": s.swallowed,
                }));
            }
        }
    }
    Value::Array(rows)
}

fn simulate_with<T: FloatScalar>(cfg: &RunConfig, points: &[T]) -> Result<Outcome> {
    let params = cfg.sde_params();
    let paths = evolve_ensemble(points, &params, &cfg.checkpoints, cfg.n_paths)?;
    let swallowed: usize =
        paths.iter().filter_map(|p| p.states.last()).map(|s| s.iter().filter(|s| s.swallowed).count()).sum();
    let summary = format!(
        "{} paths x {} points, {} checkpoints; {swallowed} point(s) swallowed by the last checkpoint",
        cfg.n_paths,
        points.len(),
        cfg.checkpoints.len()
    );
    let artifact = match cfg.format {
        Format::Json => Artifact::Json(wrap(cfg, trajectory_rows(&paths))),
        Format::Csv => {
            let mut buf = Vec::new();
            write_trajectory_csv(&mut buf, &paths)?;
            Artifact::Csv(String::from_utf8(buf).context("trajectory CSV is not UTF-8")?)
        }
    };
    Ok(Outcome { artifact, summary, ok: true })
}

fn simulate(cfg: &RunConfig) -> Result<Outcome> {
    let reals: Option<Vec<f64>> = cfg
        .points
        .iter()
        .map(|p| match *p {
            Point::Real(x) => Some(x),
            Point::Complex(..) => None,
        })
        .collect();
    match reals {
        Some(xs) => simulate_with(cfg, &xs),
        None => {
            let zs: Vec<Complex64> = cfg
                .points
                .iter()
                .map(|p| match *p {
                    Point::Real(x) => Complex64::new(x, 0.0),
                    Point::Complex(x, y) => Complex64::new(x, y),
                })
                .collect();
            simulate_with(cfg, &zs)
        }
    }
}

fn martingale(cfg: &RunConfig) -> Result<Outcome> {
    let points: Vec<f64> = cfg
        .points
        .iter()
        .map(|p| match *p {
            Point::Real(x) => x,
            Point::Complex(x, _) => x,
        })
        .collect();
    let mut report =
        mc_drift_report_with(&points, &cfg.delta, &cfg.sde_params(), cfg.n_paths, &cfg.checkpoints, &cfg.mc_options())?;
    let absorbed = report.absorbed_counts.last().copied().unwrap_or(0);
    let summary = format!(
        "{} paths, {} checkpoints: max |z| = {:.3}, absorbed point-paths at the last checkpoint = {absorbed}",
        report.n_paths,
        report.checkpoints.len(),
        report.max_abs_zscore()
    );
    let artifact = match cfg.format {
        Format::Json => {
            report.params["run"] = cfg.to_json();
            Artifact::Json(serde_json::from_str(&report.to_json()?)?)
        }
        Format::Csv => {
            let mut buf = Vec::new();
            report.write_csv(&mut buf)?;
            Artifact::Csv(String::from_utf8(buf).context("report CSV is not UTF-8")?)
        }
    };
    Ok(Outcome { artifact, summary, ok: true })
}

fn state_to_f64(s: &ModuleState<sle_lcft::Rational>) -> ModuleState<f64> {
    ModuleState::from_terms(s.context().to_f64(), s.terms().iter().map(|(p, c)| (p.clone(), c.to_f64())))
}

fn module_mc(cfg: &RunConfig) -> Result<Outcome> {
    let nv = null_vector_level2(&cfg.delta)?;
    let ctx = ModuleContext::new(cfg.delta.clone(), nv.central.clone());
    let ctx_f = ctx.to_f64();
    let t = cfg.t_max;
    let exact_root = cfg.exact_k().and_then(|k| k.sqrt_exact().ok());
    let (a_f, b_f, expected) = match exact_root {
        Some(root) => {
            let (a, b) = sle_coefficients(root);
            let t_q = sle_lcft::Rational::from_float(t).context("t_max is not finite")?;
            let e = module_expected_state(&t_q, cfg.cutoff, &a, &b, &ctx)?;
            (coefficients_to_f64(&a), coefficients_to_f64(&b), state_to_f64(&e))
        }
        None => {
            let root = Dual::new(cfg.kappa.to_f64(), cfg.kappa_hat.to_f64()).sqrt()?;
            let (a, b) = sle_coefficients(root);
            let e = module_expected_state(&t, cfg.cutoff, &a, &b, &ctx_f)?;
            (a, b, e)
        }
    };
    let mc =
        module_mc_state(t, cfg.cutoff, &a_f, &b_f, &ctx_f, cfg.n_paths, cfg.seed, cfg.dt, ModuleScheme::default())?;

    // zero-variance coefficients are compared to rounding
    let ratio = |d: f64, se: f64, scale: f64| {
        if se > 0.0 {
            d / se
        } else if d.abs() <= 1e-9 * scale.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY.copysign(d)
        }
    };
    let mut rows = Vec::new();
    let mut worst = 0.0_f64;
    for p in Partition::up_to_level(cfg.cutoff) {
        let (m, se, e) = (mc.mean.coefficient(&p), mc.stderr_of(&p), expected.coefficient(&p));
        let z = Dual::new(ratio(m.body - e.body, se.body, e.body), ratio(m.slope - e.slope, se.slope, e.slope));
        worst = worst.max(z.body.abs()).max(z.slope.abs());
        rows.push((p, m, se, e, z));
    }
    let summary = format!(
        "cutoff {}, t = {t}, {} paths x {} steps: max |mean - exact|/SE = {worst:.3}",
        cfg.cutoff, mc.n_paths, mc.n_steps
    );
    let artifact = match cfg.format {
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|(p, m, se, e, z)| {
                    json!({
                        "label": p.to_string(),
                        "level": p.level(),
                        "mean": [m.body, m.slope],
                        "se": [se.body, se.slope],
                        "exact": [e.body, e.slope],
                        "z": [finite_or_null(z.body), finite_or_null(z.slope)],
                    })
                })
                .collect();
            Artifact::Json(wrap(cfg, json!({ "n_paths": mc.n_paths, "n_steps": mc.n_steps, "rows": rows })))
        }
        Format::Csv => {
            let mut out = String::from("label,level,mean,mean_theta,se,se_theta,exact,exact_theta,z,z_theta\n");
            for (p, m, se, e, z) in &rows {
                out.push_str(&format!(
                    "\"{p}\",{},{},{},{},{},{},{},{},{}\n",
                    p.level(),
                    m.body,
                    m.slope,
                    se.body,
                    se.slope,
                    e.body,
                    e.slope,
                    z.body,
                    z.slope
                ));
            }
            Artifact::Csv(out)
        }
    };
    Ok(Outcome { artifact, summary, ok: true })
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}
