//! Experiment configuration: one JSON document per run, schema-checked with
//! path-named errors before any computation starts. Flat CLI flags override
//! config keys one-to-one; the effective document is echoed into the report.

use ptug::boundary::BoundaryFunction;
use ptug::game::GameParams;
use ptug::geometry::{BoundarySet, Domain, Point, Shape, Vector};
use ptug::strategies::Sense;
use serde_json::{Map, Value};
use std::fmt;

/// A schema violation, carrying the dotted path of the offending key.
#[derive(Debug)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn err(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { path: path.to_string(), message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Solve,
    Simulate,
    Measure,
    Perturb,
    Theta,
    Escape,
    Union,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Solve => "solve",
            Kind::Simulate => "simulate",
            Kind::Measure => "measure",
            Kind::Perturb => "perturb",
            Kind::Theta => "theta",
            Kind::Escape => "escape",
            Kind::Union => "union",
        }
    }

    fn parse(s: &str) -> Option<Kind> {
        Some(match s {
            "solve" => Kind::Solve,
            "simulate" => Kind::Simulate,
            "measure" => Kind::Measure,
            "perturb" => Kind::Perturb,
            "theta" => Kind::Theta,
            "escape" => Kind::Escape,
            "union" => Kind::Union,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub enum StrategySpec {
    PullToward { target: Point<f64> },
    UniformRandom,
    DppGreedy { sense: Sense },
    Perturbation { max_targets: Option<usize> },
}

/// Fully validated experiment description plus the effective raw document
/// (after flag overrides) for verbatim echo.
#[derive(Debug)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub raw: Value,
    pub domain: Domain<f64>,
    pub payoff: Option<BoundaryFunction<f64>>,
    pub set: Option<BoundarySet<f64>>,
    pub e_list: Option<Vec<BoundarySet<f64>>>,
    pub f_set: Option<BoundarySet<f64>>,
    pub overrides: Vec<(Point<f64>, f64)>,
    pub game: GameParams<f64>,
    pub strategies: Option<(StrategySpec, StrategySpec)>,
    pub x0: Option<Point<f64>>,
    pub center: Option<Point<f64>>,
    pub epsilons: Option<Vec<f64>>,
    pub deltas: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub delta_x: Option<f64>,
    pub equality_tol: f64,
    pub plan_origin: Option<Point<f64>>,
    pub plan_candidates: Option<Vec<Point<f64>>>,
    pub plan_from_domain: bool,
    pub plan_max_targets: Option<usize>,
    pub stage: usize,
    pub eps_rel: Option<f64>,
    pub n_samples: Option<u64>,
    pub seed: u64,
    pub tolerance: f64,
    pub out: String,
    pub workers: Option<usize>,
}

/// Keys a CLI flag may override, applied into the raw document before
/// validation so the echoed config is the one that actually ran.
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub workers: Option<usize>,
    pub tol: Option<f64>,
}

pub fn parse(kind: Kind, text: &str, flags: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let mut raw: Value = serde_json::from_str(text)
        .map_err(|e| err("config", format!("not valid JSON: {e}")))?;
    {
        let top = raw
            .as_object_mut()
            .ok_or_else(|| err("config", "the document must be a JSON object"))?;
        if let Some(s) = flags.seed {
            top.insert("seed".into(), Value::from(s));
        }
        if let Some(o) = &flags.out {
            top.insert("out".into(), Value::from(o.clone()));
        }
        if let Some(w) = flags.workers {
            top.insert("workers".into(), Value::from(w as u64));
        }
        if let Some(t) = flags.tol {
            top.insert("tolerance".into(), Value::from(t));
        }
    }
    validate(kind, raw)
}

const TOP_KEYS: &[&str] = &[
    "experiment",
    "domain",
    "payoff",
    "set",
    "e_list",
    "f_set",
    "overrides",
    "game",
    "strategies",
    "x0",
    "center",
    "epsilons",
    "deltas",
    "delta",
    "delta_x",
    "equality_tol",
    "plan",
    "stage",
    "eps_rel",
    "n_samples",
    "seed",
    "tolerance",
    "out",
    "workers",
];

fn validate(kind: Kind, raw: Value) -> Result<ExperimentConfig, ConfigError> {
    let top = obj(&raw, "config", TOP_KEYS)?;

    if let Some(v) = top.get("experiment") {
        let s = str_at(v, "experiment")?;
        let declared = Kind::parse(s)
            .ok_or_else(|| err("experiment", format!("unknown experiment kind \"{s}\"")))?;
        if declared != kind {
            return Err(err(
                "experiment",
                format!("document says \"{s}\" but the subcommand is \"{}\"", kind.name()),
            ));
        }
    }

    let domain = domain_at(req(top, "config", "domain")?, "domain")?;
    let dim = domain.dim();

    let game_v = req(top, "config", "game")?;
    let game = game_at(game_v, "game", dim)?;

    let payoff = top
        .get("payoff")
        .map(|v| payoff_at(v, "payoff", dim))
        .transpose()?;
    let set = top.get("set").map(|v| set_at(v, "set", dim)).transpose()?;
    let e_list = top
        .get("e_list")
        .map(|v| {
            let arr = arr_at(v, "e_list")?;
            arr.iter()
                .enumerate()
                .map(|(i, e)| set_at(e, &format!("e_list[{i}]"), dim))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    let f_set = top.get("f_set").map(|v| set_at(v, "f_set", dim)).transpose()?;

    let overrides = match top.get("overrides") {
        None => Vec::new(),
        Some(v) => {
            let arr = arr_at(v, "overrides")?;
            let mut out = Vec::with_capacity(arr.len());
            for (i, o) in arr.iter().enumerate() {
                let path = format!("overrides[{i}]");
                let m = obj(o, &path, &["at", "value"])?;
                let at = point_at(req(m, &path, "at")?, &format!("{path}.at"), dim)?;
                let value = f64_at(req(m, &path, "value")?, &format!("{path}.value"))?;
                out.push((at, value));
            }
            out
        }
    };

    let strategies = match top.get("strategies") {
        None => None,
        Some(v) => {
            let m = obj(v, "strategies", &["one", "two"])?;
            let one = strategy_at(req(m, "strategies", "one")?, "strategies.one", dim)?;
            let two = strategy_at(req(m, "strategies", "two")?, "strategies.two", dim)?;
            Some((one, two))
        }
    };

    let x0 = top.get("x0").map(|v| point_at(v, "x0", dim)).transpose()?;
    let center = top.get("center").map(|v| point_at(v, "center", dim)).transpose()?;
    let epsilons = top.get("epsilons").map(|v| f64_list_at(v, "epsilons")).transpose()?;
    let deltas = top.get("deltas").map(|v| f64_list_at(v, "deltas")).transpose()?;
    let delta = top.get("delta").map(|v| f64_at(v, "delta")).transpose()?;
    let delta_x = top.get("delta_x").map(|v| f64_at(v, "delta_x")).transpose()?;
    let equality_tol = match top.get("equality_tol") {
        Some(v) => f64_at(v, "equality_tol")?,
        None => 0.05,
    };

    let (plan_origin, plan_candidates, plan_from_domain, plan_max_targets) = match top.get("plan")
    {
        None => (None, None, false, None),
        Some(v) => {
            let m = obj(v, "plan", &["origin", "candidates", "from_domain", "max_targets"])?;
            let origin = m
                .get("origin")
                .map(|p| point_at(p, "plan.origin", dim))
                .transpose()?;
            let cands = m
                .get("candidates")
                .map(|c| {
                    let arr = arr_at(c, "plan.candidates")?;
                    arr.iter()
                        .enumerate()
                        .map(|(i, p)| point_at(p, &format!("plan.candidates[{i}]"), dim))
                        .collect::<Result<Vec<_>, _>>()
                })
                .transpose()?;
            let from_domain = match m.get("from_domain") {
                Some(b) => bool_at(b, "plan.from_domain")?,
                None => false,
            };
            let max_targets = m
                .get("max_targets")
                .map(|n| usize_at(n, "plan.max_targets"))
                .transpose()?;
            if cands.is_none() && !from_domain {
                return Err(err(
                    "plan",
                    "give explicit candidates or set from_domain to use the domain's punctures",
                ));
            }
            (origin, cands, from_domain, max_targets)
        }
    };

    let stage = match top.get("stage") {
        Some(v) => usize_at(v, "stage")?,
        None => 1,
    };
    let eps_rel = top.get("eps_rel").map(|v| f64_at(v, "eps_rel")).transpose()?;
    let n_samples = top.get("n_samples").map(|v| u64_at(v, "n_samples")).transpose()?;
    let seed = match top.get("seed") {
        Some(v) => u64_at(v, "seed")?,
        None => 0,
    };
    let tolerance = match top.get("tolerance") {
        Some(v) => {
            let t = f64_at(v, "tolerance")?;
            if !(t > 0.0) {
                return Err(err("tolerance", format!("must be positive, got {t}")));
            }
            t
        }
        None => 1e-6,
    };
    let out = match top.get("out") {
        Some(v) => str_at(v, "out")?.to_string(),
        None => "runs".to_string(),
    };
    let workers = top.get("workers").map(|v| usize_at(v, "workers")).transpose()?;

    let cfg = ExperimentConfig {
        kind,
        raw,
        domain,
        payoff,
        set,
        e_list,
        f_set,
        overrides,
        game,
        strategies,
        x0,
        center,
        epsilons,
        deltas,
        delta,
        delta_x,
        equality_tol,
        plan_origin,
        plan_candidates,
        plan_from_domain,
        plan_max_targets,
        stage,
        eps_rel,
        n_samples,
        seed,
        tolerance,
        out,
        workers,
    };
    require_per_kind(&cfg)?;
    Ok(cfg)
}

/// Presence checks for the keys each experiment kind cannot run without.
fn require_per_kind(c: &ExperimentConfig) -> Result<(), ConfigError> {
    let need = |ok: bool, path: &str| {
        if ok {
            Ok(())
        } else {
            Err(err(path, format!("required for \"{}\" experiments", c.kind.name())))
        }
    };
    match c.kind {
        Kind::Solve => {
            need(c.payoff.is_some(), "payoff")?;
        }
        Kind::Simulate => {
            need(c.payoff.is_some(), "payoff")?;
            need(c.strategies.is_some(), "strategies")?;
            need(c.x0.is_some(), "x0")?;
            need(c.n_samples.is_some(), "n_samples")?;
        }
        Kind::Measure => {
            need(c.set.is_some(), "set")?;
            need(c.x0.is_some(), "x0")?;
            need(c.epsilons.is_some(), "epsilons")?;
            need(c.deltas.is_some(), "deltas")?;
        }
        Kind::Perturb => {
            need(c.payoff.is_some(), "payoff")?;
            need(c.strategies.is_some(), "strategies")?;
            need(c.x0.is_some(), "x0")?;
            need(c.n_samples.is_some(), "n_samples")?;
        }
        Kind::Theta => {
            need(
                c.plan_candidates.is_some() || c.plan_from_domain,
                "plan",
            )?;
            need(c.x0.is_some(), "x0")?;
            need(c.eps_rel.is_some(), "eps_rel")?;
        }
        Kind::Escape => {
            need(c.payoff.is_some(), "payoff")?;
            need(c.strategies.is_some(), "strategies")?;
            need(c.x0.is_some(), "x0")?;
            need(c.center.is_some(), "center")?;
            need(c.delta.is_some(), "delta")?;
            need(c.delta_x.is_some(), "delta_x")?;
            need(c.n_samples.is_some(), "n_samples")?;
        }
        Kind::Union => {
            need(c.e_list.is_some(), "e_list")?;
            need(c.x0.is_some(), "x0")?;
            need(c.epsilons.is_some(), "epsilons")?;
            need(c.deltas.is_some(), "deltas")?;
        }
    }
    Ok(())
}

// ---- leaf readers -------------------------------------------------------

fn obj<'a>(v: &'a Value, path: &str, allowed: &[&str]) -> Result<&'a Map<String, Value>, ConfigError> {
    let m = v
        .as_object()
        .ok_or_else(|| err(path, "expected an object"))?;
    for k in m.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(err(&format!("{path}.{k}"), "unknown key"));
        }
    }
    Ok(m)
}

fn req<'a>(
    m: &'a Map<String, Value>,
    path: &str,
    key: &str,
) -> Result<&'a Value, ConfigError> {
    m.get(key).ok_or_else(|| {
        let full = if path == "config" { key.to_string() } else { format!("{path}.{key}") };
        ConfigError { path: full, message: "missing required key".into() }
    })
}

fn str_at<'a>(v: &'a Value, path: &str) -> Result<&'a str, ConfigError> {
    v.as_str().ok_or_else(|| err(path, "expected a string"))
}

fn bool_at(v: &Value, path: &str) -> Result<bool, ConfigError> {
    v.as_bool().ok_or_else(|| err(path, "expected true or false"))
}

fn f64_at(v: &Value, path: &str) -> Result<f64, ConfigError> {
    let x = v.as_f64().ok_or_else(|| err(path, "expected a number"))?;
    if !x.is_finite() {
        return Err(err(path, "must be finite"));
    }
    Ok(x)
}

fn u64_at(v: &Value, path: &str) -> Result<u64, ConfigError> {
    v.as_u64().ok_or_else(|| err(path, "expected a non-negative integer"))
}

fn usize_at(v: &Value, path: &str) -> Result<usize, ConfigError> {
    Ok(u64_at(v, path)? as usize)
}

fn arr_at<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>, ConfigError> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn f64_list_at(v: &Value, path: &str) -> Result<Vec<f64>, ConfigError> {
    let arr = arr_at(v, path)?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| f64_at(x, &format!("{path}[{i}]")))
        .collect()
}

fn coords_at(v: &Value, path: &str, dim: usize) -> Result<Vec<f64>, ConfigError> {
    let xs = f64_list_at(v, path)?;
    if xs.len() != dim {
        return Err(err(
            path,
            format!("expected {dim} coordinates to match the domain, got {}", xs.len()),
        ));
    }
    Ok(xs)
}

fn point_at(v: &Value, path: &str, dim: usize) -> Result<Point<f64>, ConfigError> {
    let xs = coords_at(v, path, dim)?;
    Ok(if dim == 2 { Point::new2(xs[0], xs[1]) } else { Point::new3(xs[0], xs[1], xs[2]) })
}

fn vector_at(v: &Value, path: &str, dim: usize) -> Result<Vector<f64>, ConfigError> {
    let xs = coords_at(v, path, dim)?;
    Ok(if dim == 2 { Vector::new2(xs[0], xs[1]) } else { Vector::new3(xs[0], xs[1], xs[2]) })
}

/// A point whose dimension sets the domain dimension (2 or 3).
fn free_point_at(v: &Value, path: &str) -> Result<Point<f64>, ConfigError> {
    let xs = f64_list_at(v, path)?;
    match xs.len() {
        2 => Ok(Point::new2(xs[0], xs[1])),
        3 => Ok(Point::new3(xs[0], xs[1], xs[2])),
        n => Err(err(path, format!("expected 2 or 3 coordinates, got {n}"))),
    }
}

// ---- structured readers -------------------------------------------------

fn domain_at(v: &Value, path: &str) -> Result<Domain<f64>, ConfigError> {
    let kind_path = format!("{path}.kind");
    let m = v
        .as_object()
        .ok_or_else(|| err(path, "expected an object"))?;
    let kind = match m.get("kind") {
        Some(k) => str_at(k, &kind_path)?,
        None => return Err(err(&kind_path, "missing required key")),
    };
    let shape = match kind {
        "ball" => {
            let m = obj(v, path, &["kind", "center", "radius"])?;
            let center = free_point_at(req(m, path, "center")?, &format!("{path}.center"))?;
            Shape::Ball {
                center,
                radius: f64_at(req(m, path, "radius")?, &format!("{path}.radius"))?,
            }
        }
        "punctured_ball" => {
            let m = obj(v, path, &["kind", "center", "radius", "puncture"])?;
            let center = free_point_at(req(m, path, "center")?, &format!("{path}.center"))?;
            let dim = center.dim();
            Shape::PuncturedBall {
                center,
                radius: f64_at(req(m, path, "radius")?, &format!("{path}.radius"))?,
                puncture: point_at(req(m, path, "puncture")?, &format!("{path}.puncture"), dim)?,
            }
        }
        "annulus" => {
            let m = obj(v, path, &["kind", "center", "inner", "outer"])?;
            let center = free_point_at(req(m, path, "center")?, &format!("{path}.center"))?;
            Shape::Annulus {
                center,
                inner: f64_at(req(m, path, "inner")?, &format!("{path}.inner"))?,
                outer: f64_at(req(m, path, "outer")?, &format!("{path}.outer"))?,
            }
        }
        "punctured_annulus" => {
            let m = obj(v, path, &["kind", "center", "inner", "outer", "puncture"])?;
            let center = free_point_at(req(m, path, "center")?, &format!("{path}.center"))?;
            let dim = center.dim();
            Shape::PuncturedAnnulus {
                center,
                inner: f64_at(req(m, path, "inner")?, &format!("{path}.inner"))?,
                outer: f64_at(req(m, path, "outer")?, &format!("{path}.outer"))?,
                puncture: point_at(req(m, path, "puncture")?, &format!("{path}.puncture"), dim)?,
            }
        }
        "slit_ball" => {
            let m = obj(v, path, &["kind", "center", "radius", "slit_a", "slit_b"])?;
            let center = free_point_at(req(m, path, "center")?, &format!("{path}.center"))?;
            let dim = center.dim();
            Shape::SlitBall {
                center,
                radius: f64_at(req(m, path, "radius")?, &format!("{path}.radius"))?,
                slit_a: point_at(req(m, path, "slit_a")?, &format!("{path}.slit_a"), dim)?,
                slit_b: point_at(req(m, path, "slit_b")?, &format!("{path}.slit_b"), dim)?,
            }
        }
        "ball_minus_point_sequence" => {
            let m = obj(
                v,
                path,
                &["kind", "center", "radius", "scale", "ratio", "direction", "k_max"],
            )?;
            let center = free_point_at(req(m, path, "center")?, &format!("{path}.center"))?;
            let dim = center.dim();
            Shape::BallMinusPointSequence {
                center,
                radius: f64_at(req(m, path, "radius")?, &format!("{path}.radius"))?,
                scale: f64_at(req(m, path, "scale")?, &format!("{path}.scale"))?,
                ratio: f64_at(req(m, path, "ratio")?, &format!("{path}.ratio"))?,
                direction: vector_at(req(m, path, "direction")?, &format!("{path}.direction"), dim)?,
                k_max: usize_at(req(m, path, "k_max")?, &format!("{path}.k_max"))?,
            }
        }
        "polygon" => {
            let m = obj(v, path, &["kind", "vertices"])?;
            let arr = arr_at(req(m, path, "vertices")?, &format!("{path}.vertices"))?;
            let vertices = arr
                .iter()
                .enumerate()
                .map(|(i, p)| point_at(p, &format!("{path}.vertices[{i}]"), 2))
                .collect::<Result<Vec<_>, _>>()?;
            Shape::Polygon { vertices }
        }
        other => {
            return Err(err(
                &kind_path,
                format!(
                    "unknown domain kind \"{other}\"; expected ball, punctured_ball, annulus, \
                     punctured_annulus, slit_ball, ball_minus_point_sequence, or polygon"
                ),
            ))
        }
    };
    Domain::new(shape).map_err(|e| err(path, e.to_string()))
}

fn set_at(v: &Value, path: &str, dim: usize) -> Result<BoundarySet<f64>, ConfigError> {
    let kind_path = format!("{path}.kind");
    let m = v
        .as_object()
        .ok_or_else(|| err(path, "expected an object"))?;
    let kind = match m.get("kind") {
        Some(k) => str_at(k, &kind_path)?,
        None => return Err(err(&kind_path, "missing required key")),
    };
    Ok(match kind {
        "point" => {
            let m = obj(v, path, &["kind", "at"])?;
            BoundarySet::Point(point_at(req(m, path, "at")?, &format!("{path}.at"), dim)?)
        }
        "points" => {
            let m = obj(v, path, &["kind", "list"])?;
            let arr = arr_at(req(m, path, "list")?, &format!("{path}.list"))?;
            let pts = arr
                .iter()
                .enumerate()
                .map(|(i, p)| point_at(p, &format!("{path}.list[{i}]"), dim))
                .collect::<Result<Vec<_>, _>>()?;
            BoundarySet::Points(pts)
        }
        "arc" => {
            let m = obj(v, path, &["kind", "center", "radius", "theta0", "theta1"])?;
            BoundarySet::Arc {
                center: point_at(req(m, path, "center")?, &format!("{path}.center"), dim)?,
                radius: f64_at(req(m, path, "radius")?, &format!("{path}.radius"))?,
                theta0: f64_at(req(m, path, "theta0")?, &format!("{path}.theta0"))?,
                theta1: f64_at(req(m, path, "theta1")?, &format!("{path}.theta1"))?,
            }
        }
        "cap" => {
            let m = obj(v, path, &["kind", "center", "radius", "axis", "half_angle"])?;
            BoundarySet::Cap {
                center: point_at(req(m, path, "center")?, &format!("{path}.center"), dim)?,
                radius: f64_at(req(m, path, "radius")?, &format!("{path}.radius"))?,
                axis: vector_at(req(m, path, "axis")?, &format!("{path}.axis"), dim)?,
                half_angle: f64_at(req(m, path, "half_angle")?, &format!("{path}.half_angle"))?,
            }
        }
        "union" => {
            let m = obj(v, path, &["kind", "parts"])?;
            let arr = arr_at(req(m, path, "parts")?, &format!("{path}.parts"))?;
            let parts = arr
                .iter()
                .enumerate()
                .map(|(i, p)| set_at(p, &format!("{path}.parts[{i}]"), dim))
                .collect::<Result<Vec<_>, _>>()?;
            BoundarySet::Union(parts)
        }
        other => {
            return Err(err(
                &kind_path,
                format!(
                    "unknown set kind \"{other}\"; expected point, points, arc, cap, or union"
                ),
            ))
        }
    })
}

fn payoff_at(v: &Value, path: &str, dim: usize) -> Result<BoundaryFunction<f64>, ConfigError> {
    let kind_path = format!("{path}.kind");
    let m = v
        .as_object()
        .ok_or_else(|| err(path, "expected an object"))?;
    let kind = match m.get("kind") {
        Some(k) => str_at(k, &kind_path)?,
        None => return Err(err(&kind_path, "missing required key")),
    };
    Ok(match kind {
        "constant" => {
            let m = obj(v, path, &["kind", "value"])?;
            BoundaryFunction::Constant(f64_at(req(m, path, "value")?, &format!("{path}.value"))?)
        }
        "linear" => {
            let m = obj(v, path, &["kind", "axis"])?;
            let axis = usize_at(req(m, path, "axis")?, &format!("{path}.axis"))?;
            if axis >= dim {
                return Err(err(
                    &format!("{path}.axis"),
                    format!("axis {axis} out of range for dimension {dim}"),
                ));
            }
            BoundaryFunction::LinearCoordinate { axis }
        }
        "tent" => {
            let m = obj(v, path, &["kind", "set", "delta"])?;
            let set = set_at(req(m, path, "set")?, &format!("{path}.set"), dim)?;
            let delta = f64_at(req(m, path, "delta")?, &format!("{path}.delta"))?;
            BoundaryFunction::tent(set, delta)
                .map_err(|e| err(path, e.to_string()))?
        }
        "sum" => {
            let m = obj(v, path, &["kind", "parts"])?;
            let arr = arr_at(req(m, path, "parts")?, &format!("{path}.parts"))?;
            let parts = arr
                .iter()
                .enumerate()
                .map(|(i, p)| payoff_at(p, &format!("{path}.parts[{i}]"), dim))
                .collect::<Result<Vec<_>, _>>()?;
            BoundaryFunction::Sum(parts)
        }
        other => {
            return Err(err(
                &kind_path,
                format!("unknown payoff kind \"{other}\"; expected constant, linear, tent, or sum"),
            ))
        }
    })
}

fn game_at(v: &Value, path: &str, dim: usize) -> Result<GameParams<f64>, ConfigError> {
    let m = obj(v, path, &["n", "p", "epsilon"])?;
    let n = usize_at(req(m, path, "n")?, &format!("{path}.n"))?;
    if n != dim {
        return Err(err(
            &format!("{path}.n"),
            format!("dimension {n} does not match the domain dimension {dim}"),
        ));
    }
    let p = f64_at(req(m, path, "p")?, &format!("{path}.p"))?;
    if !(p > 1.0) {
        return Err(err(&format!("{path}.p"), format!("the exponent must exceed 1, got {p}")));
    }
    let epsilon = f64_at(req(m, path, "epsilon")?, &format!("{path}.epsilon"))?;
    if !(epsilon > 0.0) {
        return Err(err(
            &format!("{path}.epsilon"),
            format!("the step scale must be positive, got {epsilon}"),
        ));
    }
    GameParams::new(n, p, epsilon).map_err(|e| err(path, e.to_string()))
}

fn strategy_at(v: &Value, path: &str, dim: usize) -> Result<StrategySpec, ConfigError> {
    let kind_path = format!("{path}.kind");
    let m = v
        .as_object()
        .ok_or_else(|| err(path, "expected an object"))?;
    let kind = match m.get("kind") {
        Some(k) => str_at(k, &kind_path)?,
        None => return Err(err(&kind_path, "missing required key")),
    };
    Ok(match kind {
        "pull_toward" => {
            let m = obj(v, path, &["kind", "target"])?;
            StrategySpec::PullToward {
                target: point_at(req(m, path, "target")?, &format!("{path}.target"), dim)?,
            }
        }
        "uniform_random" => {
            obj(v, path, &["kind"])?;
            StrategySpec::UniformRandom
        }
        "dpp_greedy" => {
            let m = obj(v, path, &["kind", "sense"])?;
            let sense = match m.get("sense") {
                None => {
                    if path.ends_with(".one") {
                        Sense::Maximize
                    } else {
                        Sense::Minimize
                    }
                }
                Some(s) => match str_at(s, &format!("{path}.sense"))? {
                    "maximize" => Sense::Maximize,
                    "minimize" => Sense::Minimize,
                    other => {
                        return Err(err(
                            &format!("{path}.sense"),
                            format!("unknown sense \"{other}\"; expected maximize or minimize"),
                        ))
                    }
                },
            };
            StrategySpec::DppGreedy { sense }
        }
        "perturbation" => {
            let m = obj(v, path, &["kind", "max_targets"])?;
            let max_targets = m
                .get("max_targets")
                .map(|n| usize_at(n, &format!("{path}.max_targets")))
                .transpose()?;
            StrategySpec::Perturbation { max_targets }
        }
        other => {
            return Err(err(
                &kind_path,
                format!(
                    "unknown strategy kind \"{other}\"; expected pull_toward, uniform_random, \
                     dpp_greedy, or perturbation"
                ),
            ))
        }
    })
}
