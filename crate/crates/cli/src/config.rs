use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use sle_lcft::loewner::SdeParams;
use sle_lcft::martingale::{Absorption, McOptions};
use sle_lcft::virasoro::null_vector_level2;
use sle_lcft::{DualQ, Rational};

use crate::args::{Command, Flags};

/// A problem with the requested configuration, reported with the flag it
/// concerns.
#[derive(Debug, thiserror::Error)]
#[error("{flag}: {message}")]
pub struct UsageError {
    pub flag: String,
    pub message: String,
}

fn usage(flag: &str, message: impl Into<String>) -> UsageError {
    UsageError { flag: format!("--{}", flag.replace('_', "-")), message: message.into() }
}

type Result<T> = std::result::Result<T, UsageError>;

fn display<S: serde::Serializer>(q: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(q)
}

/// A real setting given either exactly or as a float.
#[derive(Clone, Debug, PartialEq)]
pub enum Num {
    Exact(Rational),
    Float(f64),
}

impl Num {
    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Num::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Num::Exact(q) => Some(q),
            Num::Float(_) => None,
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(q) => write!(f, "{q}"),
            Num::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Num {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn parse_rational(flag: &str, s: &str) -> Result<Rational> {
    let s = s.trim();
    if s.contains(['.', 'e', 'E']) {
        return Err(usage(flag, format!("expected an exact rational p/q, got {s:?}")));
    }
    let q = Rational::from_str(s).map_err(|_| usage(flag, format!("malformed rational {s:?}")))?;
    Ok(q)
}

fn parse_num(flag: &str, s: &str) -> Result<Num> {
    let t = s.trim();
    if let Ok(q) = Rational::from_str(t) {
        return Ok(Num::Exact(q));
    }
    match f64::from_str(t) {
        Ok(x) if x.is_finite() => Ok(Num::Float(x)),
        _ => Err(usage(flag, format!("expected a number or p/q, got {s:?}"))),
    }
}

fn parse_f64(flag: &str, s: &str) -> Result<f64> {
    match f64::from_str(s.trim()) {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(usage(flag, format!("expected a number, got {s:?}"))),
    }
}

/// A seed point, real or `re:im`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Real(f64),
    Complex(f64, f64),
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Point::Real(x) => s.serialize_str(&x.to_string()),
            Point::Complex(x, y) => s.serialize_str(&format!("{x}:{y}")),
        }
    }
}

fn parse_points(s: &str) -> Result<Vec<Point>> {
    split_list(s)
        .map(|item| match item.split_once(':') {
            Some((re, im)) => Ok(Point::Complex(parse_f64("points", re)?, parse_f64("points", im)?)),
            None => Ok(Point::Real(parse_f64("points", item)?)),
        })
        .collect()
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// The fully resolved run, echoed into every artifact.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(serialize_with = "display")]
    pub delta: Rational,
    pub kappa: Num,
    pub kappa_hat: Num,
    pub dt: f64,
    pub t_max: f64,
    pub seed: u64,
    pub n_paths: usize,
    pub points: Vec<Point>,
    pub checkpoints: Vec<f64>,
    pub cutoff: u32,
    pub clip_quantile: Option<f64>,
    pub absorption: Absorption,
    pub swallow_eps: f64,
    pub out: Option<String>,
    pub format: Format,
}

impl RunConfig {
    pub fn sde_params(&self) -> SdeParams {
        SdeParams {
            kappa: self.kappa.to_f64(),
            kappa_hat: self.kappa_hat.to_f64(),
            dt: self.dt,
            t_max: self.t_max,
            swallow_eps: self.swallow_eps,
            seed: self.seed,
            adaptive: true,
        }
    }

    pub fn mc_options(&self) -> McOptions {
        McOptions { absorption: self.absorption, clip_quantile: self.clip_quantile }
    }

    /// `κ + θκ̂` when both parts are exact.
    pub fn exact_k(&self) -> Option<DualQ> {
        Some(DualQ::new(self.kappa.exact()?.clone(), self.kappa_hat.exact()?.clone()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

const KEYS: &[&str] = &[
    "delta",
    "kappa",
    "kappa_hat",
    "dt",
    "t_max",
    "seed",
    "n_paths",
    "points",
    "checkpoints",
    "cutoff",
    "clip_quantile",
    "absorption",
    "swallow_eps",
    "out",
    "format",
];

/// Reads a `key = value` file into raw strings; lists become comma-joined.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage("config", format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = text.parse().map_err(|e| usage("config", format!("{}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (key, value) in table {
        let key = key.replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(usage("config", format!("unknown key {key:?} in {}", path.display())));
        }
        let text = match value {
            toml::Value::Array(items) => items.iter().map(plain).collect::<Vec<_>>().join(","),
            other => plain(&other),
        };
        out.insert(key, text);
    }
    Ok(out)
}

fn plain(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flag_values(f: &Flags) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            m.insert(k.to_string(), v);
        }
    };
    put("delta", f.delta.clone());
    put("kappa", f.kappa.clone());
    put("kappa_hat", f.kappa_hat.clone());
    put("dt", f.dt.map(|x| x.to_string()));
    put("t_max", f.t_max.map(|x| x.to_string()));
    put("seed", f.seed.map(|x| x.to_string()));
    put("n_paths", f.n_paths.map(|x| x.to_string()));
    put("points", f.points.clone());
    put("checkpoints", f.checkpoints.clone());
    put("cutoff", f.cutoff.map(|x| x.to_string()));
    put("clip_quantile", f.clip_quantile.map(|x| x.to_string()));
    put("absorption", f.absorption.clone());
    put("swallow_eps", f.swallow_eps.map(|x| x.to_string()));
    put("out", f.out.as_ref().map(|p| p.display().to_string()));
    put("format", f.format.clone());
    m
}

fn parse_int<T: FromStr>(flag: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| usage(flag, format!("expected a non-negative integer, got {s:?}")))
}

/// Merges defaults, the config file and flags, then validates for `command`.
pub fn resolve(command: &Command) -> Result<RunConfig> {
    let flags = command.flags();
    let mut raw = match &flags.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    raw.extend(flag_values(flags));
    let get = |k: &str| raw.get(k).map(String::as_str);
    let name = command.name();
    let stochastic = matches!(name, "simulate" | "martingale" | "module-mc");

    let delta = parse_rational("delta", get("delta").unwrap_or("1/4"))?;
    let two_delta_plus_one = delta.clone() * Rational::from_integer(2.into()) + Rational::from_integer(1.into());
    if two_delta_plus_one.is_zero() {
        return Err(usage("delta", "gamma pole at Δ = -1/2 (2Δ + 1 = 0), no level-two null vector"));
    }
    let k = null_vector_level2(&delta).map_err(|e| usage("delta", e.to_string()))?.kappa();
    let kappa = match get("kappa") {
        Some(s) => parse_num("kappa", s)?,
        None => Num::Exact(k.body.clone()),
    };
    let kappa_hat = match get("kappa_hat") {
        Some(s) => parse_num("kappa_hat", s)?,
        None => Num::Exact(k.slope.clone()),
    };
    if (stochastic || name == "link") && !(kappa.to_f64() > 0.0) {
        return Err(usage("kappa", format!("must be positive, got {kappa}")));
    }

    let dt = get("dt").map(|s| parse_f64("dt", s)).transpose()?.unwrap_or(1e-3);
    let t_max = get("t_max").map(|s| parse_f64("t_max", s)).transpose()?.unwrap_or(0.5);
    if !(t_max > 0.0) {
        return Err(usage("t_max", format!("must be positive, got {t_max}")));
    }
    if !(dt > 0.0 && dt <= t_max) {
        return Err(usage("dt", format!("need 0 < dt <= t_max = {t_max}, got {dt}")));
    }
    let swallow_eps = get("swallow_eps").map(|s| parse_f64("swallow_eps", s)).transpose()?.unwrap_or(1e-6);
    if !(swallow_eps > 0.0) {
        return Err(usage("swallow_eps", format!("must be positive, got {swallow_eps}")));
    }
    let seed = get("seed").map(|s| parse_int("seed", s)).transpose()?.unwrap_or(1);
    let n_paths: usize = get("n_paths").map(|s| parse_int("n_paths", s)).transpose()?.unwrap_or(10_000);
    let min_paths = if name == "martingale" { sle_lcft::martingale::MIN_PATHS } else { 1 };
    if n_paths < min_paths {
        return Err(usage("n_paths", format!("need at least {min_paths}, got {n_paths}")));
    }

    let points = match get("points") {
        Some(s) => parse_points(s)?,
        None if name == "simulate" => {
            [-1.0, 0.0, 1.0].iter().flat_map(|&x| [0.5, 1.0].map(|y| Point::Complex(x, y))).collect()
        }
        None => vec![Point::Real(0.5), Point::Real(1.0), Point::Real(2.0)],
    };
    if stochastic && name != "module-mc" && points.is_empty() {
        return Err(usage("points", "no seed points given"));
    }
    for p in &points {
        match (name, *p) {
            ("martingale", Point::Real(x)) if x > 0.0 => {}
            ("martingale", _) => {
                return Err(usage("points", "the martingale test takes positive real seed points"));
            }
            (_, Point::Real(0.0)) => return Err(usage("points", "seed point 0 is already swallowed")),
            (_, Point::Complex(_, y)) if y < 0.0 => {
                return Err(usage("points", "complex seed points must lie in the upper half-plane"));
            }
            _ => {}
        }
    }

    let checkpoints: Vec<f64> = match get("checkpoints") {
        Some(s) => split_list(s).map(|x| parse_f64("checkpoints", x)).collect::<Result<_>>()?,
        None => [0.0, 0.1, 0.25, 0.5].into_iter().filter(|&t| t <= t_max).collect(),
    };
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(usage("checkpoints", "must be sorted"));
    }
    if let Some(t) = checkpoints.iter().find(|&&t| !(0.0..=t_max).contains(&t)) {
        return Err(usage("checkpoints", format!("{t} outside [0, t_max = {t_max}]")));
    }

    let cutoff = get("cutoff").map(|s| parse_int("cutoff", s)).transpose()?.unwrap_or(4);
    if cutoff < 2 {
        return Err(usage("cutoff", format!("must be at least 2, got {cutoff}")));
    }
    let clip_quantile = get("clip_quantile").map(|s| parse_f64("clip_quantile", s)).transpose()?;
    if let Some(q) = clip_quantile {
        if !(q > 0.0 && q < 1.0) {
            return Err(usage("clip_quantile", format!("must lie in (0, 1), got {q}")));
        }
    }
    let absorption = match get("absorption").unwrap_or("stop") {
        "stop" => Absorption::Stop,
        "exclude" => Absorption::Exclude,
        other => return Err(usage("absorption", format!("expected stop or exclude, got {other:?}"))),
    };
    let format = match get("format") {
        Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(other) => return Err(usage("format", format!("expected csv or json, got {other:?}"))),
        None if name == "simulate" => Format::Csv,
        None => Format::Json,
    };

    Ok(RunConfig {
        command: name.to_string(),
        delta,
        kappa,
        kappa_hat,
        dt,
        t_max,
        seed,
        n_paths,
        points,
        checkpoints,
        cutoff,
        clip_quantile,
        absorption,
        swallow_eps,
        out: get("out").map(str::to_string),
        format,
    })
}
