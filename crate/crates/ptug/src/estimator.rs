//! Monte Carlo estimation on top of the game runner: value estimates with
//! confidence intervals, boundary-measure tables over shrinking mollification
//! widths, paired payoff-perturbation experiments, and escape-window
//! probabilities. Trajectories are independent and deterministic given the
//! master seed, so every report is reproducible bit for bit.

use crate::boundary::{BoundaryError, BoundaryFunction};
use crate::game::{
    Action, GameError, GameParams, GameView, Regime, Strategy, Transcript,
};
use crate::geometry::{BoundarySet, Domain, Point, Vector};
use crate::rng::StreamFamily;
use crate::scalar::{real, Real};
use crate::solver::{
    move_vectors, noise_points, solve, solve_guide, SolveConfig, SolverError, ValueField,
};
use crate::strategies::Sense;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("{games} games is too few for a confidence interval; use at least {min}")]
    TooFewGames { games: u64, min: u64 },
    #[error("invalid estimation request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Payoff(#[from] BoundaryError),
}

/// Fewest games any estimate may average over.
pub const MIN_GAMES: u64 = 100;
/// Two-sided 95% normal quantile for the reported intervals.
const CI95: f64 = 1.96;
/// Reports carry a warning when fewer than this fraction of games terminate.
const TERMINATION_WARN: f64 = 0.99;

/// Compact per-game record kept by the batch runner (full transcripts would
/// not fit in memory for long games).
#[derive(Clone, Copy, Debug)]
struct GameOutcome<S> {
    payoff: S,
    terminal: Option<Point<S>>,
    terminated: bool,
}

/// Sample mean and standard error of the mean.
fn mean_stderr<S: Real>(xs: &[S]) -> (S, S) {
    let n = real::<S>(xs.len() as f64);
    let mean = xs.iter().fold(S::zero(), |a, &b| a + b) / n;
    if xs.len() < 2 {
        return (mean, S::zero());
    }
    let var = xs
        .iter()
        .fold(S::zero(), |a, &b| a + (b - mean) * (b - mean))
        / (n - S::one());
    (mean, (var / n).sqrt())
}

fn run_batch<S, A, B>(
    domain: &Domain<S>,
    payoff: &BoundaryFunction<S>,
    params: &GameParams<S>,
    x0: &Point<S>,
    one: &A,
    two: &B,
    family: &StreamFamily,
    games: u64,
) -> Result<Vec<GameOutcome<S>>, EstimatorError>
where
    S: Real,
    A: Strategy<S> + Clone + Sync,
    B: Strategy<S> + Clone + Sync,
{
    if games < MIN_GAMES {
        return Err(EstimatorError::TooFewGames { games, min: MIN_GAMES });
    }
    (0..games)
        .into_par_iter()
        .map(|t| {
            let mut a = one.clone();
            let mut b = two.clone();
            let mut streams = family.trajectory(t);
            let tr = crate::game::play(domain, payoff, params, x0, &mut a, &mut b, &mut streams)?;
            Ok(GameOutcome {
                payoff: tr.payoff,
                terminal: tr.terminal_point,
                terminated: tr.terminated,
            })
        })
        .collect()
}

/// Monte Carlo estimate of the expected payoff under the given strategies.
#[derive(Clone, Debug)]
pub struct EstimateReport<S> {
    pub mean: S,
    pub stderr: S,
    /// Half-width of the 95% confidence interval (mean ± ci95).
    pub ci95: S,
    pub games: u64,
    pub termination_rate: S,
    /// Set when more than 1% of the games hit the step cap; their payoff of
    /// zero is averaged in, so the mean is biased toward zero.
    pub termination_warning: bool,
    pub master_seed: u64,
}

pub fn estimate_value<S, A, B>(
    domain: &Domain<S>,
    payoff: &BoundaryFunction<S>,
    params: &GameParams<S>,
    x0: &Point<S>,
    one: &A,
    two: &B,
    family: &StreamFamily,
    games: u64,
) -> Result<EstimateReport<S>, EstimatorError>
where
    S: Real,
    A: Strategy<S> + Clone + Sync,
    B: Strategy<S> + Clone + Sync,
{
    let outcomes = run_batch(domain, payoff, params, x0, one, two, family, games)?;
    let payoffs: Vec<S> = outcomes.iter().map(|o| o.payoff).collect();
    let (mean, stderr) = mean_stderr(&payoffs);
    let done = outcomes.iter().filter(|o| o.terminated).count();
    let rate = real::<S>(done as f64 / games as f64);
    Ok(EstimateReport {
        mean,
        stderr,
        ci95: stderr * real::<S>(CI95),
        games,
        termination_rate: rate,
        termination_warning: rate < real::<S>(TERMINATION_WARN),
        master_seed: family.master(),
    })
}

/// One game per seed, payoff read under both the base datum and its
/// pointwise-overridden version at the same terminal point: the difference
/// column is exactly coupled, so its variance reflects only the games whose
/// terminal is one of the override points. With no overrides the difference
/// is identically zero — not merely statistically zero.
#[derive(Clone, Debug)]
pub struct PairedReport<S> {
    pub mean_base: S,
    pub mean_alt: S,
    pub mean_diff: S,
    pub stderr_diff: S,
    pub ci95_diff: S,
    pub games: u64,
    pub termination_rate: S,
    pub termination_warning: bool,
    pub master_seed: u64,
}

/// Play one batch of games under `f` and re-read every terminal under
/// `g = f` with the given pointwise overrides. `f` must be continuous (the
/// overrides are the only discontinuity under study) and every override
/// point must lie on the boundary.
#[allow(clippy::too_many_arguments)]
pub fn perturbation_experiment<S, A, B>(
    domain: &Domain<S>,
    f: &BoundaryFunction<S>,
    overrides: &[(Point<S>, S)],
    params: &GameParams<S>,
    x0: &Point<S>,
    one: &A,
    two: &B,
    family: &StreamFamily,
    games: u64,
) -> Result<PairedReport<S>, EstimatorError>
where
    S: Real,
    A: Strategy<S> + Clone + Sync,
    B: Strategy<S> + Clone + Sync,
{
    if !f.is_continuous() {
        return Err(EstimatorError::BadRequest(
            "the base datum must be continuous; pass its discontinuities as overrides".into(),
        ));
    }
    if !overrides.is_empty() {
        let pts = BoundarySet::Points(overrides.iter().map(|(p, _)| p.clone()).collect());
        pts.validate_on_boundary(domain, real::<S>(1e-9)).map_err(|e| {
            EstimatorError::BadRequest(format!("override points must lie on the boundary: {e}"))
        })?;
    }
    let alt = f.clone().with_overrides(overrides.to_vec());
    let outcomes = run_batch(domain, f, params, x0, one, two, family, games)?;
    let mut base_vals = Vec::with_capacity(outcomes.len());
    let mut alt_vals = Vec::with_capacity(outcomes.len());
    for o in &outcomes {
        let b = o.payoff;
        let a = match &o.terminal {
            Some(t) => alt.evaluate(domain, t)?,
            None => S::zero(), // capped games pay zero under either datum
        };
        base_vals.push(b);
        alt_vals.push(a);
    }
    let diffs: Vec<S> = alt_vals.iter().zip(&base_vals).map(|(a, b)| *a - *b).collect();
    let (mean_base, _) = mean_stderr(&base_vals);
    let (mean_alt, _) = mean_stderr(&alt_vals);
    let (mean_diff, stderr_diff) = mean_stderr(&diffs);
    let done = outcomes.iter().filter(|o| o.terminated).count();
    let rate = real::<S>(done as f64 / games as f64);
    Ok(PairedReport {
        mean_base,
        mean_alt,
        mean_diff,
        stderr_diff,
        ci95_diff: stderr_diff * real::<S>(CI95),
        games,
        termination_rate: rate,
        termination_warning: rate < real::<S>(TERMINATION_WARN),
        master_seed: family.master(),
    })
}

/// Fraction of games whose terminal point lands in the boundary window
/// δ_x ≤ |y − center| < δ (closed inner edge, open outer edge). Games that
/// hit the step cap count as misses.
#[derive(Clone, Debug)]
pub struct EscapeReport<S> {
    pub probability: S,
    /// Binomial standard error of the hit fraction.
    pub stderr: S,
    /// Binomial half-width of the 95% interval.
    pub ci95: S,
    pub hits: u64,
    pub games: u64,
    pub non_terminated: u64,
    pub delta_x: S,
    pub delta: S,
    pub master_seed: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn escape_probability<S, A, B>(
    domain: &Domain<S>,
    payoff: &BoundaryFunction<S>,
    params: &GameParams<S>,
    start: &Point<S>,
    center: &Point<S>,
    delta_x: S,
    delta: S,
    one: &A,
    two: &B,
    family: &StreamFamily,
    games: u64,
) -> Result<EscapeReport<S>, EstimatorError>
where
    S: Real,
    A: Strategy<S> + Clone + Sync,
    B: Strategy<S> + Clone + Sync,
{
    if !(delta_x > S::zero() && delta > delta_x) {
        return Err(EstimatorError::BadRequest(format!(
            "escape window needs 0 < delta_x < delta, got delta_x = {delta_x}, delta = {delta}"
        )));
    }
    let outcomes = run_batch(domain, payoff, params, start, one, two, family, games)?;
    let mut hits = 0u64;
    let mut non_terminated = 0u64;
    for o in &outcomes {
        match &o.terminal {
            Some(t) => {
                let r = t.dist(center);
                if r >= delta_x && r < delta {
                    hits += 1;
                }
            }
            None => non_terminated += 1,
        }
    }
    let p = hits as f64 / games as f64;
    let se = (p * (1.0 - p) / games as f64).sqrt();
    Ok(EscapeReport {
        probability: real::<S>(p),
        stderr: real::<S>(se),
        ci95: real::<S>(CI95 * se),
        hits,
        games,
        non_terminated,
        delta_x,
        delta,
        master_seed: family.master(),
    })
}

/// How one row of a measure table was computed.
#[derive(Clone, Debug)]
pub enum MeasureMethod<S> {
    /// Grid solve of the mollified-indicator game.
    Dpp,
    /// Both players played a steering guide greedily; the row is a Monte
    /// Carlo mean with the quoted standard error. The guide is solved at
    /// `guide_epsilon` with grid step `guide_epsilon / guide_divisor`: the
    /// same step as the game itself whenever such a grid fits the node
    /// budget, a doubled step only as a last resort.
    MonteCarlo { games: u64, stderr: S, guide_epsilon: S, guide_divisor: usize },
}

#[derive(Clone, Debug)]
pub struct MeasureRow<S> {
    /// Step size of this row's game.
    pub epsilon: S,
    pub delta: S,
    pub value: S,
    /// Solver error bound (grid rows) or the 95% half-width (sampled rows).
    pub error_bound: S,
    pub method: MeasureMethod<S>,
}

/// Width-zero limit guess attached to a [`MeasureReport`].
#[derive(Clone, Debug)]
pub struct Extrapolated<S> {
    pub value: S,
    /// How the limit was formed; the only method in use sums the geometric
    /// tail implied by the last difference ratios.
    pub method: &'static str,
}

#[derive(Clone, Debug)]
pub struct MeasureReport<S> {
    /// One block of rows per step size, each block walking the full width
    /// list in decreasing order.
    pub rows: Vec<MeasureRow<S>>,
    /// True when, within every step block, each width step kept
    /// value(δ_{k+1}) ≤ trend_factor · value(δ_k) + trend_tol — the decay a
    /// measure-zero set must show.
    pub trend_ok: bool,
    /// Geometric-tail extrapolation of the width-zero limit over the last
    /// (finest-step) block, present when the last three difference ratios
    /// agree within 20%.
    pub extrapolated: Option<Extrapolated<S>>,
}

/// Knobs for [`estimate_measure`].
#[derive(Clone, Copy, Debug)]
pub struct MeasureConfig<S> {
    pub solve: SolveConfig<S>,
    /// Decay factor a halving must beat for the trend check (default 0.8).
    pub trend_factor: S,
    /// Additive slack in the trend check.
    pub trend_tol: S,
    /// Games per Monte Carlo fallback row.
    pub mc_games: u64,
    /// How many times the guide step may double while looking for a grid
    /// that fits the node budget.
    pub mc_guide_doublings: usize,
}

impl<S: Real> Default for MeasureConfig<S> {
    fn default() -> Self {
        MeasureConfig {
            solve: SolveConfig::default(),
            trend_factor: real::<S>(0.8),
            trend_tol: real::<S>(1e-3),
            mc_games: 2000,
            mc_guide_doublings: 6,
        }
    }
}

/// Geometric-tail extrapolation: when the last three ratios of consecutive
/// differences agree within 20% and indicate contraction, sum the implied
/// tail. Returns None otherwise.
fn richardson<S: Real>(values: &[S]) -> Option<S> {
    if values.len() < 5 {
        return None;
    }
    let diffs: Vec<S> = values.windows(2).map(|w| w[0] - w[1]).collect();
    let mut ratios = Vec::new();
    for w in diffs.windows(2) {
        if w[0] == S::zero() {
            return None;
        }
        ratios.push(w[1] / w[0]);
    }
    let last3 = &ratios[ratios.len() - 3..];
    let lo = last3.iter().fold(S::infinity(), |a, &b| a.min(b));
    let hi = last3.iter().fold(S::neg_infinity(), |a, &b| a.max(b));
    if !(lo > S::zero() && hi < S::one() && hi <= lo * real::<S>(1.2)) {
        return None;
    }
    let q = (lo + hi) * real::<S>(0.5);
    let d_last = *diffs.last().unwrap();
    Some(*values.last().unwrap() - d_last * q / (S::one() - q))
}

/// Estimate the boundary measure of `set` seen from `x0`: the game value of
/// the tent-mollified indicator, tabulated over every step size in
/// `epsilons` (one block per step, in the given order) crossed with the
/// width list `deltas` (strictly decreasing within each block). Every
/// pairing must keep δ at least twice the band width of its step — the
/// termination rule cannot resolve thinner sets. Rows solve on the grid when
/// the node budget allows and fall back to greedy-guided Monte Carlo
/// otherwise; each row records which path produced it.
pub fn estimate_measure<S: Real>(
    domain: &Domain<S>,
    set: &BoundarySet<S>,
    params: &GameParams<S>,
    x0: &Point<S>,
    epsilons: &[S],
    deltas: &[S],
    cfg: &MeasureConfig<S>,
    family: &StreamFamily,
) -> Result<MeasureReport<S>, EstimatorError> {
    if epsilons.is_empty() {
        return Err(EstimatorError::BadRequest("no step sizes given".into()));
    }
    if deltas.is_empty() {
        return Err(EstimatorError::BadRequest("no mollification widths given".into()));
    }
    for w in deltas.windows(2) {
        if !(w[1] < w[0]) {
            return Err(EstimatorError::BadRequest(
                "mollification widths must strictly decrease".into(),
            ));
        }
    }
    // Check every pairing up front so no solve is paid for a doomed table.
    for &eps in epsilons {
        if !(eps > S::zero()) || !eps.is_finite() {
            return Err(EstimatorError::BadRequest(format!(
                "step size must be positive and finite, got {eps}"
            )));
        }
        let block = params.with_epsilon(eps);
        let floor = block.band_width() + block.band_width();
        if *deltas.last().unwrap() < floor {
            return Err(EstimatorError::BadRequest(format!(
                "width {} is below twice the band width {} of step {}; the termination rule blurs the payoff at that scale, shrink the step instead",
                deltas.last().unwrap(),
                block.band_width(),
                eps
            )));
        }
    }
    set.validate_on_boundary(domain, real::<S>(1e-9)).map_err(|e| {
        EstimatorError::BadRequest(format!("measured set must lie on the boundary: {e}"))
    })?;

    let mut rows = Vec::with_capacity(epsilons.len() * deltas.len());
    let mut trend_ok = true;
    let mut block_values: Vec<S> = Vec::new();
    for (b, &eps) in epsilons.iter().enumerate() {
        let block = params.with_epsilon(eps);
        block_values.clear();
        for (i, &delta) in deltas.iter().enumerate() {
            let payoff = BoundaryFunction::tent(set.clone(), delta)?;
            match solve(domain, &payoff, &block, &cfg.solve) {
                Ok(field) => {
                    let value = field.evaluate(x0)?;
                    block_values.push(value);
                    rows.push(MeasureRow {
                        epsilon: eps,
                        delta,
                        value,
                        error_bound: field.error_bound(),
                        method: MeasureMethod::Dpp,
                    });
                }
                Err(SolverError::GridTooLarge { .. }) => {
                    // Derive a per-row seed so rows stay independent.
                    let row_family = StreamFamily::new(
                        family
                            .master()
                            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
                            .wrapping_add((b * deltas.len() + i) as u64),
                    );
                    let row =
                        measure_row_mc(domain, &payoff, &block, x0, delta, cfg, &row_family)?;
                    block_values.push(row.value);
                    rows.push(row);
                }
                Err(e) => return Err(e.into()),
            }
        }
        trend_ok = trend_ok
            && block_values
                .windows(2)
                .all(|w| w[1] <= cfg.trend_factor * w[0] + cfg.trend_tol);
    }
    let extrapolated = richardson(&block_values)
        .map(|value| Extrapolated { value, method: "geometric-ratio" });
    Ok(MeasureReport { rows, trend_ok, extrapolated })
}

/// Monte Carlo fallback for one measure row: solve a steering guide on the
/// coarsest grid that fits the node budget, then play the real game with
/// both players greedy on the guide. Guides at the game's own step are tried
/// first — their termination band is the band the players actually face, so
/// greedy play near payoff edges stays honest — walking the grid coarser one
/// notch at a time. Doubling the guide step is the last resort: a wider band
/// misprices edge entries and biases greedy play toward contested frontiers.
fn measure_row_mc<S: Real>(
    domain: &Domain<S>,
    payoff: &BoundaryFunction<S>,
    params: &GameParams<S>,
    x0: &Point<S>,
    delta: S,
    cfg: &MeasureConfig<S>,
    family: &StreamFamily,
) -> Result<MeasureRow<S>, EstimatorError> {
    let mut found: Option<(Arc<ValueField<S>>, S, usize)> = None;
    for div in (1..cfg.solve.grid_divisor).rev() {
        let mut gcfg = cfg.solve;
        gcfg.grid_divisor = div;
        match solve_guide(domain, payoff, params, &gcfg) {
            Ok(f) => {
                found = Some((Arc::new(f), params.epsilon, div));
                break;
            }
            Err(SolverError::GridTooLarge { .. }) | Err(SolverError::Guard(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    if found.is_none() {
        let mut guide_eps = params.epsilon;
        for _ in 0..cfg.mc_guide_doublings {
            guide_eps = guide_eps + guide_eps;
            let gp = params.with_epsilon(guide_eps);
            let mut gcfg = cfg.solve;
            gcfg.grid_divisor = 1;
            match solve_guide(domain, payoff, &gp, &gcfg) {
                Ok(f) => {
                    found = Some((Arc::new(f), guide_eps, 1));
                    break;
                }
                Err(SolverError::GridTooLarge { .. }) | Err(SolverError::Guard(_)) => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }
    let Some((guide, guide_eps, guide_div)) = found else {
        return Err(EstimatorError::BadRequest(format!(
            "no guide grid fits the node budget within {} step doublings",
            cfg.mc_guide_doublings
        )));
    };
    let one = GuideGreedy::new(guide.clone(), Sense::Maximize, params, &cfg.solve);
    let two = GuideGreedy::new(guide.clone(), Sense::Minimize, params, &cfg.solve);
    let report =
        estimate_value(domain, payoff, params, x0, &one, &two, family, cfg.mc_games)?;
    Ok(MeasureRow {
        epsilon: params.epsilon,
        delta,
        value: report.mean,
        error_bound: report.ci95,
        method: MeasureMethod::MonteCarlo {
            games: cfg.mc_games,
            stderr: report.stderr,
            guide_epsilon: guide_eps,
            guide_divisor: guide_div,
        },
    })
}

/// Greedy play against a field solved at a coarser step: real-ε moves are
/// scored by the noise-averaged interpolated guide value, so the move set is
/// legal for the current game even though the guide grid is coarse.
#[derive(Clone)]
struct GuideGreedy<S: Real> {
    field: Arc<ValueField<S>>,
    sense: Sense,
    moves: Vec<Vector<S>>,
    noise_q3: usize,
    band_samples: usize,
}

impl<S: Real> GuideGreedy<S> {
    fn new(
        field: Arc<ValueField<S>>,
        sense: Sense,
        params: &GameParams<S>,
        cfg: &SolveConfig<S>,
    ) -> Self {
        GuideGreedy {
            field,
            sense,
            moves: move_vectors(params, cfg),
            noise_q3: cfg.noise_points_3d,
            band_samples: cfg.band_samples.max(4),
        }
    }

    fn better(&self, a: S, b: S) -> bool {
        match self.sense {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }
}

impl<S: Real> Strategy<S> for GuideGreedy<S> {
    fn act(&mut self, view: &GameView<'_, S>, _rng: &mut ChaCha8Rng) -> Action<S> {
        match view.regime {
            Regime::Band => {
                let cands = view.band_candidates(self.band_samples);
                let mut best = 0;
                let mut best_v = self.field.payoff().eval_unchecked(&cands[0]);
                for (i, c) in cands.iter().enumerate().skip(1) {
                    let v = self.field.payoff().eval_unchecked(c);
                    if self.better(v, best_v) {
                        best = i;
                        best_v = v;
                    }
                }
                Action::Terminate(cands[best])
            }
            Regime::Interior => {
                let mut best: Option<(usize, S)> = None;
                for (m, v) in self.moves.iter().enumerate() {
                    let mid = view.position.add(v);
                    let mut acc = S::zero();
                    let mut ok = true;
                    let zs = noise_points(view.params, v, self.noise_q3);
                    for z in &zs {
                        match self.field.evaluate(&mid.add(z)) {
                            Ok(val) => acc = acc + val,
                            Err(_) => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                    let avg = acc / real::<S>(zs.len() as f64);
                    if best.map_or(true, |(_, bv)| self.better(avg, bv)) {
                        best = Some((m, avg));
                    }
                }
                match best {
                    Some((m, _)) => Action::Move(self.moves[m].clone()),
                    None => Action::Move(Vector::zero(view.position.dim())),
                }
            }
        }
    }

    fn name(&self) -> String {
        match self.sense {
            Sense::Maximize => "guide_greedy_max".into(),
            Sense::Minimize => "guide_greedy_min".into(),
        }
    }
}

/// Measure tables for a finite boundary point family ∪E, a closed boundary
/// set F, and their union, on one shared (step, width) schedule — together
/// with the two limit laws the tables witness: the point family's measure
/// must trend to zero down each width column, and adjoining the points to F
/// must not move F's measure beyond the rows' own error bounds plus
/// `equality_tol`.
#[derive(Clone, Debug)]
pub struct UnionReport<S> {
    /// Rows for the point family ∪E; absent when the family is empty.
    pub e_table: Option<MeasureReport<S>>,
    /// Rows for the closed set F; absent when no F was given.
    pub f_table: Option<MeasureReport<S>>,
    /// Rows for (∪E) ∪ F; reused verbatim from the nonempty side when the
    /// other is absent, making the comparison exact by construction.
    pub ef_table: MeasureReport<S>,
    /// The point family's measures decay down every width column (vacuously
    /// true when the family is empty).
    pub e_trend_ok: bool,
    /// Largest row gap |ω̂(E∪F) − ω̂(F)| across the schedule (zero when
    /// either side is absent, since the tables are then shared).
    pub equality_gap: S,
    /// Every row gap within `equality_tol` plus the two rows' error bounds.
    pub equality_ok: bool,
    pub equality_tol: S,
}

/// Flatten a boundary set into its finite point list, refusing anything with
/// a continuum component.
fn finite_points<S: Real>(set: &BoundarySet<S>) -> Option<Vec<Point<S>>> {
    match set {
        BoundarySet::Point(p) => Some(vec![p.clone()]),
        BoundarySet::Points(ps) => Some(ps.clone()),
        BoundarySet::Union(parts) => {
            let mut all = Vec::new();
            for part in parts {
                all.extend(finite_points(part)?);
            }
            Some(all)
        }
        _ => None,
    }
}

/// Run the three measure tables of [`UnionReport`] on a shared schedule.
/// Every member of `e_list` must flatten to finitely many boundary points,
/// none of them isolated: an isolated boundary point carries positive
/// measure by itself, so no point family containing one can be measure-zero
/// and both laws would be false. An empty `e_list` (or an absent `f_set`)
/// reuses the other side's rows verbatim, so the comparison is exact.
#[allow(clippy::too_many_arguments)]
pub fn union_experiments<S: Real>(
    domain: &Domain<S>,
    e_list: &[BoundarySet<S>],
    f_set: Option<&BoundarySet<S>>,
    params: &GameParams<S>,
    x0: &Point<S>,
    epsilons: &[S],
    deltas: &[S],
    equality_tol: S,
    cfg: &MeasureConfig<S>,
    family: &StreamFamily,
) -> Result<UnionReport<S>, EstimatorError> {
    let mut points: Vec<Point<S>> = Vec::new();
    for (i, e) in e_list.iter().enumerate() {
        let Some(ps) = finite_points(e) else {
            return Err(EstimatorError::BadRequest(format!(
                "piece {} of the point family is not a finite set of points",
                i + 1
            )));
        };
        points.extend(ps);
    }
    let tol = real::<S>(1e-9);
    for pt in &points {
        for q in domain.isolated_boundary_points() {
            if pt.dist(&q) <= tol {
                return Err(EstimatorError::BadRequest(format!(
                    "{} is an isolated boundary point; every point of the family must be non-isolated, because an isolated boundary point carries positive measure by itself",
                    pt.fmt_coords()
                )));
            }
        }
    }
    let union_e =
        if points.is_empty() { None } else { Some(BoundarySet::Points(points.clone())) };
    match (union_e, f_set) {
        (None, None) => Err(EstimatorError::BadRequest(
            "nothing to measure: the point family is empty and no closed set was given".into(),
        )),
        (None, Some(f)) => {
            let f_table =
                estimate_measure(domain, f, params, x0, epsilons, deltas, cfg, family)?;
            Ok(UnionReport {
                e_table: None,
                ef_table: f_table.clone(),
                f_table: Some(f_table),
                e_trend_ok: true,
                equality_gap: S::zero(),
                equality_ok: true,
                equality_tol,
            })
        }
        (Some(e), None) => {
            let e_table =
                estimate_measure(domain, &e, params, x0, epsilons, deltas, cfg, family)?;
            Ok(UnionReport {
                ef_table: e_table.clone(),
                e_trend_ok: e_table.trend_ok,
                e_table: Some(e_table),
                f_table: None,
                equality_gap: S::zero(),
                equality_ok: true,
                equality_tol,
            })
        }
        (Some(e), Some(f)) => {
            let e_table =
                estimate_measure(domain, &e, params, x0, epsilons, deltas, cfg, family)?;
            let f_table =
                estimate_measure(domain, f, params, x0, epsilons, deltas, cfg, family)?;
            let ef = BoundarySet::Union(vec![e, f.clone()]);
            let ef_table =
                estimate_measure(domain, &ef, params, x0, epsilons, deltas, cfg, family)?;
            let mut gap = S::zero();
            let mut ok = true;
            for (rf, ref_) in f_table.rows.iter().zip(&ef_table.rows) {
                let d = (ref_.value - rf.value).abs();
                gap = gap.max(d);
                ok = ok && d <= equality_tol + rf.error_bound + ref_.error_bound;
            }
            Ok(UnionReport {
                e_trend_ok: e_table.trend_ok,
                e_table: Some(e_table),
                f_table: Some(f_table),
                ef_table,
                equality_gap: gap,
                equality_ok: ok,
                equality_tol,
            })
        }
    }
}

/// Convenience: verify a transcript batch against the runner's own invariant
/// checks (used by the harness's replay mode).
pub fn verify_batch<S: Real>(
    transcripts: &[Transcript<S>],
    domain: &Domain<S>,
    params: &GameParams<S>,
    payoff: &BoundaryFunction<S>,
) -> Result<(), EstimatorError> {
    for (i, t) in transcripts.iter().enumerate() {
        t.verify(domain, params, payoff).map_err(|v| {
            EstimatorError::BadRequest(format!("transcript {i} fails verification: {v}"))
        })?;
    }
    Ok(())
}
