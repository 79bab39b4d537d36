//! Report files: a one-line `# generated <unix-seconds>` header followed by a
//! deterministic JSON body (keys sorted, stable float formatting), so two runs
//! with the same config and seed produce byte-identical files apart from the
//! header. Also: CSV row tables, line-delimited transcripts, and append-only
//! writes that refuse to clobber existing files.

use ptug::estimator::{MeasureMethod, MeasureReport};
use ptug::game::{Player, Transcript};
use ptug::geometry::Point;
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use super::CliError;

/// Renders the full report text. The JSON body holds the experiment kind, the
/// master seed, the effective config (echoed verbatim), and the results; the
/// timestamp lives only in the header line so byte comparison can skip it.
pub fn render(kind: &str, seed: u64, config: &Value, results: &Value) -> String {
    let body = json!({
        "experiment": kind,
        "master_seed": seed,
        "config": config,
        "results": results,
    });
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated {now}\n{}\n", to_pretty(&body))
}

/// Pretty-prints with sorted keys. `serde_json::Value` objects are backed by
/// a sorted map, so nested key order is already canonical.
fn to_pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("report values contain no non-serializable data")
}

/// Parses a report file back into its JSON body, skipping `#` header lines.
pub fn parse(text: &str) -> Result<Value, String> {
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n");
    serde_json::from_str(&body).map_err(|e| format!("not a report file: {e}"))
}

/// Writes a fresh file, refusing to overwrite unless `force` is set.
pub fn write_new(path: &Path, content: &str, force: bool) -> Result<(), CliError> {
    if path.exists() && !force {
        return Err(CliError::usage(
            &path.display().to_string(),
            "already exists; outputs are append-only, pass --force to replace it",
        ));
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::usage(&parent.display().to_string(), &format!("cannot create: {e}"))
            })?;
        }
    }
    fs::write(path, content)
        .map_err(|e| CliError::usage(&path.display().to_string(), &format!("cannot write: {e}")))
}

pub fn out_file(dir: &str, name: &str) -> PathBuf {
    Path::new(dir).join(name)
}

// ---- JSON pieces ---------------------------------------------------------

pub fn point_json(p: &Point<f64>) -> Value {
    Value::Array(p.coords().iter().map(|&x| json!(x)).collect())
}

pub fn measure_json(report: &MeasureReport<f64>) -> Value {
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|r| {
            let method = match &r.method {
                MeasureMethod::Dpp => json!({ "kind": "grid" }),
                MeasureMethod::MonteCarlo { games, stderr, guide_epsilon, guide_divisor } => {
                    json!({
                        "kind": "sampled",
                        "games": games,
                        "stderr": stderr,
                        "guide_epsilon": guide_epsilon,
                        "guide_divisor": guide_divisor,
                    })
                }
            };
            json!({
                "epsilon": r.epsilon,
                "delta": r.delta,
                "value": r.value,
                "error_bound": r.error_bound,
                "method": method,
            })
        })
        .collect();
    let extrapolated = report
        .extrapolated
        .as_ref()
        .map(|e| json!({ "value": e.value, "method": e.method }))
        .unwrap_or(Value::Null);
    json!({
        "rows": rows,
        "trend_ok": report.trend_ok,
        "extrapolated": extrapolated,
    })
}

// ---- CSV -----------------------------------------------------------------

/// One CSV table of measure rows. The `table` column distinguishes the three
/// union tables; plain measure runs label every row `measure`.
pub fn measure_csv(tables: &[(&str, &MeasureReport<f64>)]) -> String {
    let mut s = String::from(
        "table,epsilon,delta,value,error_bound,method,games,stderr,guide_epsilon,guide_divisor\n",
    );
    for (label, report) in tables {
        for r in &report.rows {
            match &r.method {
                MeasureMethod::Dpp => {
                    s.push_str(&format!(
                        "{label},{},{},{},{},grid,,,,\n",
                        r.epsilon, r.delta, r.value, r.error_bound
                    ));
                }
                MeasureMethod::MonteCarlo { games, stderr, guide_epsilon, guide_divisor } => {
                    s.push_str(&format!(
                        "{label},{},{},{},{},sampled,{},{},{},{}\n",
                        r.epsilon, r.delta, r.value, r.error_bound,
                        games, stderr, guide_epsilon, guide_divisor
                    ));
                }
            }
        }
    }
    s
}

// ---- transcripts ----------------------------------------------------------

/// One game per line: positions, coin flips, chosen moves, noise kicks,
/// termination data, payoff, and the seed tag that replays the game.
pub fn transcript_line(t: &Transcript<f64>) -> String {
    let coins: Vec<Value> = t
        .coins
        .iter()
        .map(|c| json!(match c {
            Player::One => 1,
            Player::Two => 2,
        }))
        .collect();
    let vecs = |vs: &[ptug::geometry::Vector<f64>]| -> Vec<Value> {
        vs.iter()
            .map(|v| Value::Array(v.coords().iter().map(|&x| json!(x)).collect()))
            .collect()
    };
    let line = json!({
        "seed_tag": t.seed_tag,
        "steps": t.steps,
        "terminated": t.terminated,
        "terminal": t.terminal_point.as_ref().map(point_json).unwrap_or(Value::Null),
        "payoff": t.payoff,
        "positions": t.positions.iter().map(point_json).collect::<Vec<_>>(),
        "coins": coins,
        "moves": vecs(&t.moves),
        "noises": vecs(&t.noises),
    });
    serde_json::to_string(&line).expect("transcript values contain no non-serializable data")
}

// ---- compare ---------------------------------------------------------------

/// A single numeric or structural difference between two reports.
pub struct Diff {
    pub path: String,
    pub left: String,
    pub right: String,
    pub numeric: Option<f64>,
}

/// Walks two report bodies and collects leaf differences. Numeric leaves
/// within `tol` of each other are treated as equal; the returned list carries
/// the absolute gap for numeric diffs so callers can summarize.
pub fn diff(a: &Value, b: &Value, tol: f64) -> Vec<Diff> {
    let mut out = Vec::new();
    walk(a, b, "", tol, &mut out);
    out
}

fn walk(a: &Value, b: &Value, path: &str, tol: f64, out: &mut Vec<Diff>) {
    match (a, b) {
        (Value::Object(ma), Value::Object(mb)) => {
            let mut keys: Vec<&String> = ma.keys().chain(mb.keys()).collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match (ma.get(k), mb.get(k)) {
                    (Some(x), Some(y)) => walk(x, y, &p, tol, out),
                    (Some(x), None) => out.push(leaf(&p, &show(x), "(absent)", None)),
                    (None, Some(y)) => out.push(leaf(&p, "(absent)", &show(y), None)),
                    (None, None) => unreachable!(),
                }
            }
        }
        (Value::Array(xa), Value::Array(xb)) => {
            if xa.len() != xb.len() {
                out.push(leaf(
                    path,
                    &format!("{} entries", xa.len()),
                    &format!("{} entries", xb.len()),
                    None,
                ));
                return;
            }
            for (i, (x, y)) in xa.iter().zip(xb).enumerate() {
                walk(x, y, &format!("{path}[{i}]"), tol, out);
            }
        }
        (Value::Number(na), Value::Number(nb)) => {
            let (x, y) = (na.as_f64().unwrap_or(f64::NAN), nb.as_f64().unwrap_or(f64::NAN));
            let gap = (x - y).abs();
            if !(gap <= tol) {
                out.push(leaf(path, &show(a), &show(b), Some(gap)));
            }
        }
        _ => {
            if a != b {
                out.push(leaf(path, &show(a), &show(b), None));
            }
        }
    }
}

fn leaf(path: &str, left: &str, right: &str, numeric: Option<f64>) -> Diff {
    Diff { path: path.to_string(), left: left.to_string(), right: right.to_string(), numeric }
}

fn show(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
