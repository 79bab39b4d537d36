//! The ε-step tug-of-war game with orthogonal noise.
//!
//! Each round a fair coin picks the mover. Away from the boundary (distance
//! greater than αε) the mover displaces the token by any vector of length at
//! most ε and nature adds a noise kick of length κ·|move| in a direction
//! orthogonal to the move. Within distance αε of the boundary the mover must
//! instead terminate the game at a boundary point at most αε away, and the
//! terminal payoff is f(x_τ). Games that never terminate pay zero.
//!
//! κ = sqrt((n−1)/(p−1)) and α = 1 + κ tie the noise size to the exponent p;
//! the game value approximates the p-harmonic extension of f as ε → 0.

use crate::boundary::{BoundaryError, BoundaryFunction};
use crate::geometry::{Domain, GeometryError, Point, Vector};
use crate::rng::GameStreams;
use crate::scalar::{real, Real};
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Relative slack applied to the ε and αε step bounds so that moves built
/// from the bounds themselves (e.g. a full-length step) pass the check.
pub const STEP_SLACK: f64 = 1e-9;

/// Absolute tolerance for on-boundary checks of terminal points.
pub const TERMINAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid game parameters: {0}")]
    BadParams(String),
    #[error("protocol violation by player {player}: {reason}")]
    ProtocolViolation { player: Player, reason: String },
    #[error("start point {0} is not inside the domain")]
    StartOutsideDomain(String),
    #[error("interior step left the domain at {0}; position update is numerically inconsistent")]
    InteriorStepLeftDomain(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Payoff(#[from] BoundaryError),
}

/// Game parameters: dimension n ∈ {2,3}, exponent p > 1, step scale ε.
#[derive(Clone, Copy, Debug)]
pub struct GameParams<S> {
    pub n: usize,
    pub p: S,
    pub epsilon: S,
    /// Noise ratio κ = sqrt((n−1)/(p−1)).
    pub kappa: S,
    /// Band width multiplier α = 1 + κ.
    pub alpha: S,
    /// Step cap after which a game is declared non-terminating (payoff 0).
    pub max_steps: usize,
}

pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

impl<S: Real> GameParams<S> {
    pub fn new(n: usize, p: S, epsilon: S) -> Result<Self, GameError> {
        if n != 2 && n != 3 {
            return Err(GameError::BadParams(format!("dimension must be 2 or 3, got {n}")));
        }
        if !(p > S::one()) || !p.is_finite() {
            return Err(GameError::BadParams(format!("exponent must satisfy p > 1, got {p}")));
        }
        if !(epsilon > S::zero()) || !epsilon.is_finite() {
            return Err(GameError::BadParams(format!("step scale must be positive, got {epsilon}")));
        }
        let kappa = (real::<S>(n as f64 - 1.0) / (p - S::one())).sqrt();
        Ok(GameParams { n, p, epsilon, kappa, alpha: S::one() + kappa, max_steps: DEFAULT_MAX_STEPS })
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_epsilon(mut self, epsilon: S) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Band width αε.
    pub fn band_width(&self) -> S {
        self.alpha * self.epsilon
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Player {
    One,
    Two,
}

impl std::fmt::Display for Player {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Player::One => write!(f, "I"),
            Player::Two => write!(f, "II"),
        }
    }
}

/// Which rule applies at the current position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Interior,
    Band,
}

/// A mover's decision: an interior displacement or a terminal boundary point.
#[derive(Clone, Debug)]
pub enum Action<S> {
    Move(Vector<S>),
    Terminate(Point<S>),
}

/// Everything a strategy may inspect when choosing an action.
pub struct GameView<'a, S: Real> {
    pub domain: &'a Domain<S>,
    pub params: &'a GameParams<S>,
    pub payoff: &'a BoundaryFunction<S>,
    pub position: Point<S>,
    pub regime: Regime,
    pub player: Player,
    pub step: usize,
    /// Positions visited so far, ending with the current one.
    pub history: &'a [Point<S>],
}

impl<'a, S: Real> GameView<'a, S> {
    /// Admissible terminal points within the band reach, nearest first.
    pub fn band_candidates(&self, samples_per_component: usize) -> Vec<Point<S>> {
        self.domain.boundary_candidates(
            &self.position,
            self.params.band_width(),
            samples_per_component,
        )
    }
}

/// A player. Strategies receive a private deterministic generator; they must
/// not use any other source of randomness.
pub trait Strategy<S: Real>: Send {
    fn act(&mut self, view: &GameView<'_, S>, rng: &mut ChaCha8Rng) -> Action<S>;
    fn name(&self) -> String;
}

/// Complete record of one played game; sufficient for bit-exact replay
/// together with the seed tag.
#[derive(Clone, Debug)]
pub struct Transcript<S> {
    /// x_0 .. x_τ (the final entry is the terminal point when terminated).
    pub positions: Vec<Point<S>>,
    /// Mover for each step.
    pub coins: Vec<Player>,
    /// Chosen displacement per interior step.
    pub moves: Vec<Vector<S>>,
    /// Noise kick per interior step.
    pub noises: Vec<Vector<S>>,
    pub terminated: bool,
    pub terminal_point: Option<Point<S>>,
    pub payoff: S,
    pub steps: usize,
    pub seed_tag: String,
}

#[derive(Debug, Error)]
#[error("transcript violation at step {step}: {reason}")]
pub struct TranscriptViolation {
    pub step: usize,
    pub reason: String,
}

impl<S: Real> Transcript<S> {
    /// Replays every recorded step against the game rules, checking position
    /// arithmetic, step bounds, noise orthogonality and magnitude, regime
    /// classification, terminal membership, and the payoff value.
    pub fn verify(
        &self,
        domain: &Domain<S>,
        params: &GameParams<S>,
        payoff: &BoundaryFunction<S>,
    ) -> Result<(), TranscriptViolation> {
        let fail = |step: usize, reason: String| Err(TranscriptViolation { step, reason });
        let band = params.band_width();
        let slack = S::one() + real::<S>(STEP_SLACK);
        let tol = real::<S>(1e-12);

        if self.positions.len() != self.steps + 1 {
            return fail(0, format!(
                "expected {} positions for {} steps, found {}",
                self.steps + 1, self.steps, self.positions.len(),
            ));
        }
        if self.coins.len() != self.steps {
            return fail(0, "one coin flip per step is required".into());
        }
        let interior_steps = if self.terminated { self.steps - 1 } else { self.steps };
        if self.moves.len() != interior_steps || self.noises.len() != interior_steps {
            return fail(0, format!(
                "expected {} interior moves/noises, found {}/{}",
                interior_steps, self.moves.len(), self.noises.len(),
            ));
        }
        if !domain.contains(&self.positions[0]) {
            return fail(0, "start point is not inside the domain".into());
        }

        for k in 0..interior_steps {
            let x = &self.positions[k];
            let dist = domain
                .dist_boundary(x)
                .map_err(|e| TranscriptViolation { step: k, reason: e.to_string() })?;
            if dist <= band {
                return fail(k, format!(
                    "interior move played at boundary distance {dist} <= band width {band}"
                ));
            }
            let v = &self.moves[k];
            let z = &self.noises[k];
            if v.norm() > params.epsilon * slack {
                return fail(k, format!("move length {} exceeds {}", v.norm(), params.epsilon));
            }
            let vn = v.norm();
            if (z.norm() - params.kappa * vn).abs() > tol {
                return fail(k, format!(
                    "noise length {} differs from kappa*|move| = {}",
                    z.norm(), params.kappa * vn,
                ));
            }
            if z.dot(v).abs() > real::<S>(1e-10) * params.epsilon * params.epsilon {
                return fail(k, format!("noise is not orthogonal to the move (dot {})", z.dot(v)));
            }
            let rebuilt = x.add(v).add(z);
            if rebuilt.dist(&self.positions[k + 1]) > tol {
                return fail(k, "position update does not equal x + move + noise".into());
            }
        }

        if self.terminated {
            let prev = &self.positions[self.steps - 1];
            let term = match &self.terminal_point {
                Some(t) => t,
                None => return fail(self.steps, "terminated game lacks a terminal point".into()),
            };
            if term != self.positions.last().unwrap() {
                return fail(self.steps, "terminal point differs from final position".into());
            }
            let dist = domain
                .dist_boundary(prev)
                .map_err(|e| TranscriptViolation { step: self.steps, reason: e.to_string() })?;
            if dist > band {
                return fail(self.steps, format!(
                    "termination played at boundary distance {dist} > band width {band}"
                ));
            }
            if prev.dist(term) > band * slack {
                return fail(self.steps, format!(
                    "terminal jump {} exceeds the band reach {}",
                    prev.dist(term), band,
                ));
            }
            if !domain.on_boundary(term, real::<S>(TERMINAL_TOL)) {
                return fail(self.steps, format!("terminal point {} is not on the boundary", term.fmt_coords()));
            }
            let expect = payoff.eval_unchecked(term);
            if (expect - self.payoff).abs() > tol {
                return fail(self.steps, format!(
                    "recorded payoff {} differs from f(terminal) = {expect}",
                    self.payoff,
                ));
            }
        } else {
            if self.payoff != S::zero() {
                return fail(self.steps, "non-terminating game must pay zero".into());
            }
            if self.steps != params.max_steps {
                return fail(self.steps, format!(
                    "non-terminated transcript stopped at {} of {} steps",
                    self.steps, params.max_steps,
                ));
            }
        }
        Ok(())
    }

    /// JSON object for transcript logs (one line per game).
    pub fn to_json(&self) -> serde_json::Value {
        let pt = |p: &Point<S>| -> serde_json::Value {
            serde_json::json!(p.coords().iter().map(|c| c.f64()).collect::<Vec<f64>>())
        };
        let vc = |v: &Vector<S>| -> serde_json::Value {
            serde_json::json!(v.coords().iter().map(|c| c.f64()).collect::<Vec<f64>>())
        };
        serde_json::json!({
            "seed_tag": self.seed_tag,
            "steps": self.steps,
            "terminated": self.terminated,
            "payoff": self.payoff.f64(),
            "terminal_point": self.terminal_point.as_ref().map(|p| pt(p)),
            "coins": self.coins.iter().map(|c| c.to_string()).collect::<Vec<String>>(),
            "positions": self.positions.iter().map(pt).collect::<Vec<serde_json::Value>>(),
            "moves": self.moves.iter().map(vc).collect::<Vec<serde_json::Value>>(),
            "noises": self.noises.iter().map(vc).collect::<Vec<serde_json::Value>>(),
        })
    }
}

impl Transcript<f64> {
    /// Parse a transcript log line written by `to_json`.
    pub fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        let coords = |v: &serde_json::Value, what: &str| -> Result<Vec<f64>, String> {
            let a = v.as_array().ok_or_else(|| format!("{what}: expected array"))?;
            let c: Vec<f64> = a.iter().filter_map(|x| x.as_f64()).collect();
            if c.len() != a.len() || (c.len() != 2 && c.len() != 3) {
                return Err(format!("{what}: expected 2 or 3 numbers"));
            }
            Ok(c)
        };
        let arr_pt = |v: &serde_json::Value, what: &str| -> Result<Point<f64>, String> {
            Point::from_slice(&coords(v, what)?).map_err(|e| format!("{what}: {e}"))
        };
        let get = |k: &str| v.get(k).ok_or_else(|| format!("missing transcript field {k}"));
        let positions = get("positions")?
            .as_array()
            .ok_or("positions: expected array")?
            .iter()
            .map(|p| arr_pt(p, "position"))
            .collect::<Result<Vec<_>, _>>()?;
        let to_vec = |key: &str| -> Result<Vec<Vector<f64>>, String> {
            get(key)?
                .as_array()
                .ok_or_else(|| format!("{key}: expected array"))?
                .iter()
                .map(|p| {
                    Vector::from_slice(&coords(p, key)?).map_err(|e| format!("{key}: {e}"))
                })
                .collect()
        };
        let coins = get("coins")?
            .as_array()
            .ok_or("coins: expected array")?
            .iter()
            .map(|c| match c.as_str() {
                Some("I") => Ok(Player::One),
                Some("II") => Ok(Player::Two),
                _ => Err("coins: expected \"I\" or \"II\"".to_string()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Transcript {
            positions,
            coins,
            moves: to_vec("moves")?,
            noises: to_vec("noises")?,
            terminated: get("terminated")?.as_bool().ok_or("terminated: expected bool")?,
            terminal_point: match v.get("terminal_point") {
                Some(serde_json::Value::Null) | None => None,
                Some(t) => Some(arr_pt(t, "terminal_point")?),
            },
            payoff: get("payoff")?.as_f64().ok_or("payoff: expected number")?,
            steps: get("steps")?.as_u64().ok_or("steps: expected integer")? as usize,
            seed_tag: get("seed_tag")?.as_str().ok_or("seed_tag: expected string")?.to_string(),
        })
    }
}

/// Noise kick for a move `v`: length κ|v|, orthogonal to v. In 2D the two
/// admissible kicks are ±κ·v⊥ and a fair bit picks the sign; in 3D the kick
/// direction is uniform on the orthogonal unit circle. A null move has no
/// noise.
pub fn sample_noise<S: Real>(
    params: &GameParams<S>,
    v: &Vector<S>,
    rng: &mut ChaCha8Rng,
) -> Vector<S> {
    let vn = v.norm();
    if vn == S::zero() {
        return Vector::zero(v.dim());
    }
    if params.n == 2 {
        let sign = if rng.next_u32() & 1 == 0 { S::one() } else { -S::one() };
        v.perp().scaled(params.kappa * sign)
    } else {
        let (e1, e2) = v.orthonormal_complement();
        let phi: S = real::<S>(rng.gen::<f64>() * 2.0 * std::f64::consts::PI);
        let r = params.kappa * vn;
        e1.scaled(r * phi.cos()).add(&e2.scaled(r * phi.sin()))
    }
}

/// Play one game to termination (or the step cap). Protocol violations —
/// overlong moves, interior termination, band moves, off-boundary terminals —
/// abort with an error naming the offending player.
pub fn play<S: Real>(
    domain: &Domain<S>,
    payoff: &BoundaryFunction<S>,
    params: &GameParams<S>,
    x0: &Point<S>,
    player_one: &mut dyn Strategy<S>,
    player_two: &mut dyn Strategy<S>,
    streams: &mut GameStreams,
) -> Result<Transcript<S>, GameError> {
    if x0.dim() != domain.dim() {
        return Err(GameError::BadParams(format!(
            "start point dimension {} does not match domain dimension {}",
            x0.dim(), domain.dim(),
        )));
    }
    if params.n != domain.dim() {
        return Err(GameError::BadParams(format!(
            "game dimension {} does not match domain dimension {}",
            params.n, domain.dim(),
        )));
    }
    if !domain.contains(x0) {
        return Err(GameError::StartOutsideDomain(x0.fmt_coords()));
    }
    if params.epsilon >= domain.bounding_radius() {
        return Err(GameError::BadParams(format!(
            "step scale {} is not small relative to the domain (bounding radius {})",
            params.epsilon, domain.bounding_radius(),
        )));
    }

    let band = params.band_width();
    let slack = S::one() + real::<S>(STEP_SLACK);
    let mut positions = vec![x0.clone()];
    let mut coins = Vec::new();
    let mut moves = Vec::new();
    let mut noises = Vec::new();

    loop {
        if coins.len() >= params.max_steps {
            return Ok(Transcript {
                positions,
                coins,
                moves,
                noises,
                terminated: false,
                terminal_point: None,
                payoff: S::zero(),
                steps: params.max_steps,
                seed_tag: streams.seed_tag.clone(),
            });
        }
        let x = positions.last().unwrap().clone();
        // x is strictly inside the domain by induction, so the distance query
        // cannot fail.
        let dist = domain.dist_boundary(&x)?;
        let regime = if dist <= band { Regime::Band } else { Regime::Interior };
        let mover = if streams.coin.next_u32() & 1 == 0 { Player::One } else { Player::Two };
        coins.push(mover);
        let step = coins.len();

        let view = GameView {
            domain,
            params,
            payoff,
            position: x.clone(),
            regime,
            player: mover,
            step,
            history: &positions,
        };
        let action = match mover {
            Player::One => player_one.act(&view, &mut streams.player_one),
            Player::Two => player_two.act(&view, &mut streams.player_two),
        };
        drop(view);

        match (regime, action) {
            (Regime::Band, Action::Terminate(y)) => {
                if y.dim() != domain.dim() {
                    return Err(GameError::ProtocolViolation {
                        player: mover,
                        reason: "terminal point has the wrong dimension".into(),
                    });
                }
                if x.dist(&y) > band * slack {
                    return Err(GameError::ProtocolViolation {
                        player: mover,
                        reason: format!(
                            "terminal jump {} exceeds the band reach {band}",
                            x.dist(&y),
                        ),
                    });
                }
                if !domain.on_boundary(&y, real::<S>(TERMINAL_TOL)) {
                    return Err(GameError::ProtocolViolation {
                        player: mover,
                        reason: format!("terminal point {} is not on the boundary", y.fmt_coords()),
                    });
                }
                let value = payoff.eval_unchecked(&y);
                positions.push(y.clone());
                return Ok(Transcript {
                    positions,
                    coins,
                    moves,
                    noises,
                    terminated: true,
                    terminal_point: Some(y),
                    payoff: value,
                    steps: step,
                    seed_tag: streams.seed_tag.clone(),
                });
            }
            (Regime::Band, Action::Move(_)) => {
                return Err(GameError::ProtocolViolation {
                    player: mover,
                    reason: format!(
                        "within the boundary band (distance {dist} <= {band}) the mover must terminate"
                    ),
                });
            }
            (Regime::Interior, Action::Terminate(_)) => {
                return Err(GameError::ProtocolViolation {
                    player: mover,
                    reason: format!(
                        "termination is only allowed within the boundary band (distance {dist} > {band})"
                    ),
                });
            }
            (Regime::Interior, Action::Move(v)) => {
                if v.dim() != domain.dim() {
                    return Err(GameError::ProtocolViolation {
                        player: mover,
                        reason: "move has the wrong dimension".into(),
                    });
                }
                if !v.coords().iter().all(|c| c.is_finite()) {
                    return Err(GameError::ProtocolViolation {
                        player: mover,
                        reason: "move has non-finite coordinates".into(),
                    });
                }
                if v.norm() > params.epsilon * slack {
                    return Err(GameError::ProtocolViolation {
                        player: mover,
                        reason: format!("move length {} exceeds the step scale {}", v.norm(), params.epsilon),
                    });
                }
                let z = sample_noise(params, &v, &mut streams.noise);
                let next = x.add(&v).add(&z);
                // |v + z| ≤ ε·sqrt(1+κ²) < αε < dist, so the new position is
                // strictly inside; failure here means broken arithmetic.
                if !domain.contains(&next) {
                    return Err(GameError::InteriorStepLeftDomain(next.fmt_coords()));
                }
                moves.push(v);
                noises.push(z);
                positions.push(next);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use crate::rng::StreamFamily;

    type P = Point<f64>;

    fn disk() -> Domain<f64> {
        Domain::new(Shape::Ball { center: P::new2(0.0, 0.0), radius: 1.0 }).unwrap()
    }

    /// Pulls straight toward a target; terminates at the nearest candidate.
    struct Pull {
        target: P,
    }
    impl Strategy<f64> for Pull {
        fn act(&mut self, view: &GameView<'_, f64>, _rng: &mut ChaCha8Rng) -> Action<f64> {
            match view.regime {
                Regime::Band => Action::Terminate(view.band_candidates(8)[0].clone()),
                Regime::Interior => {
                    let d = self.target.sub(&view.position);
                    let n = d.norm();
                    if n == 0.0 {
                        Action::Move(Vector::zero(view.position.dim()))
                    } else {
                        Action::Move(d.scaled((view.params.epsilon.min(n) / n) * 0.999))
                    }
                }
            }
        }
        fn name(&self) -> String {
            "pull".into()
        }
    }

    struct AlwaysTerminate;
    impl Strategy<f64> for AlwaysTerminate {
        fn act(&mut self, view: &GameView<'_, f64>, _rng: &mut ChaCha8Rng) -> Action<f64> {
            Action::Terminate(view.domain.nearest_boundary(&view.position).0)
        }
        fn name(&self) -> String {
            "always-terminate".into()
        }
    }

    struct TooLong;
    impl Strategy<f64> for TooLong {
        fn act(&mut self, view: &GameView<'_, f64>, _rng: &mut ChaCha8Rng) -> Action<f64> {
            Action::Move(Vector::new2(view.params.epsilon * 2.0, 0.0))
        }
        fn name(&self) -> String {
            "too-long".into()
        }
    }

    #[test]
    fn params_fix_kappa_and_alpha() {
        let g = GameParams::new(2, 4.0, 0.1).unwrap();
        assert!((g.kappa - 1.0 / 3.0f64.sqrt()).abs() < 1e-15);
        assert!((g.alpha - (1.0 + 1.0 / 3.0f64.sqrt())).abs() < 1e-15);
        let g2 = GameParams::new(2, 2.0, 0.1).unwrap();
        assert_eq!(g2.kappa, 1.0);
        assert_eq!(g2.alpha, 2.0);
        assert!(GameParams::new(4, 2.0, 0.1).is_err());
        assert!(GameParams::new(2, 1.0, 0.1).is_err());
        assert!(GameParams::new(2, 2.0, 0.0).is_err());
    }

    #[test]
    fn noise_is_orthogonal_with_exact_magnitude() {
        let params = GameParams::<f64>::new(2, 4.0, 0.1).unwrap();
        let fam = StreamFamily::new(1);
        let mut s = fam.trajectory(0);
        let v = Vector::new2(0.06, -0.03);
        for _ in 0..32 {
            let z = sample_noise(&params, &v, &mut s.noise);
            assert_eq!(z.dot(&v), 0.0, "2D noise is exactly orthogonal");
            assert!((z.norm() - params.kappa * v.norm()).abs() < 1e-15);
        }
        let p3 = GameParams::<f64>::new(3, 4.0, 0.1).unwrap();
        let v3 = Vector::new3(0.02, 0.05, -0.01);
        for _ in 0..32 {
            let z = sample_noise(&p3, &v3, &mut s.noise);
            assert!(z.dot(&v3).abs() < 1e-17);
            assert!((z.norm() - p3.kappa * v3.norm()).abs() < 1e-15);
        }
        // Null move, null noise.
        let z0 = sample_noise(&params, &Vector::zero(2), &mut s.noise);
        assert_eq!(z0.norm(), 0.0);
    }

    #[test]
    fn played_games_produce_verifiable_transcripts() {
        let d = disk();
        let f = BoundaryFunction::LinearCoordinate { axis: 0 };
        let params = GameParams::new(2, 4.0, 0.05).unwrap();
        let fam = StreamFamily::new(99);
        for traj in 0..20 {
            let mut streams = fam.trajectory(traj);
            let mut a = Pull { target: P::new2(1.0, 0.0) };
            let mut b = Pull { target: P::new2(-1.0, 0.0) };
            let t = play(&d, &f, &params, &P::new2(0.2, 0.1), &mut a, &mut b, &mut streams)
                .expect("game plays out");
            assert!(t.terminated, "opposing pulls still reach the band eventually");
            t.verify(&d, &params, &f).expect("transcript verifies");
            assert_eq!(t.positions.len(), t.steps + 1);
            assert_eq!(t.seed_tag, format!("master:99/traj:{traj}"));
        }
    }

    #[test]
    fn replay_is_bit_exact() {
        let d = disk();
        let f = BoundaryFunction::LinearCoordinate { axis: 0 };
        let params = GameParams::new(2, 3.0, 0.05).unwrap();
        let fam = StreamFamily::new(7);
        let run = |fam: &StreamFamily| {
            let mut streams = fam.trajectory(3);
            let mut a = Pull { target: P::new2(1.0, 0.0) };
            let mut b = Pull { target: P::new2(0.0, -1.0) };
            play(&d, &f, &params, &P::new2(0.0, 0.0), &mut a, &mut b, &mut streams).unwrap()
        };
        let t1 = run(&fam);
        let t2 = run(&fam);
        assert_eq!(t1.positions.len(), t2.positions.len());
        for (p, q) in t1.positions.iter().zip(&t2.positions) {
            assert_eq!(p, q, "replayed positions must match bitwise");
        }
        assert_eq!(t1.payoff, t2.payoff);
        // JSON round trip preserves every bit.
        let back = Transcript::from_json(&t1.to_json()).unwrap();
        for (p, q) in t1.positions.iter().zip(&back.positions) {
            assert_eq!(p, q);
        }
        assert_eq!(back.payoff, t1.payoff);
        back.verify(&d, &params, &f).unwrap();
    }

    #[test]
    fn band_rule_violations_name_the_player() {
        let d = disk();
        let f = BoundaryFunction::Constant(1.0);
        let params = GameParams::new(2, 4.0, 0.05).unwrap();
        // Start inside the band so the first mover must terminate; Pull would
        // terminate but AlwaysTerminate in the interior is also exercised.
        let fam = StreamFamily::new(5);
        let mut streams = fam.trajectory(0);
        let mut a = TooLong;
        let mut b = TooLong;
        let err = play(&d, &f, &params, &P::new2(0.0, 0.0), &mut a, &mut b, &mut streams)
            .unwrap_err();
        match err {
            GameError::ProtocolViolation { reason, .. } => {
                assert!(reason.contains("exceeds the step scale"), "got: {reason}");
            }
            other => panic!("expected a protocol violation, got {other}"),
        }

        // Interior termination is a violation too.
        let mut streams = fam.trajectory(1);
        let mut a = AlwaysTerminate;
        let mut b = AlwaysTerminate;
        let err = play(&d, &f, &params, &P::new2(0.0, 0.0), &mut a, &mut b, &mut streams)
            .unwrap_err();
        assert!(matches!(err, GameError::ProtocolViolation { .. }));
    }

    #[test]
    fn step_cap_pays_zero_and_verifies() {
        let d = disk();
        let f = BoundaryFunction::Constant(1.0);
        let params = GameParams::new(2, 4.0, 0.05).unwrap().with_max_steps(50);
        // Both players hold still: the game can never reach the band.
        struct Still;
        impl Strategy<f64> for Still {
            fn act(&mut self, view: &GameView<'_, f64>, _rng: &mut ChaCha8Rng) -> Action<f64> {
                match view.regime {
                    Regime::Band => Action::Terminate(view.band_candidates(4)[0].clone()),
                    Regime::Interior => Action::Move(Vector::zero(2)),
                }
            }
            fn name(&self) -> String {
                "still".into()
            }
        }
        let fam = StreamFamily::new(2);
        let mut streams = fam.trajectory(0);
        let t = play(&d, &f, &params, &P::new2(0.0, 0.0), &mut Still, &mut Still, &mut streams)
            .unwrap();
        assert!(!t.terminated);
        assert_eq!(t.payoff, 0.0);
        assert_eq!(t.steps, 50);
        t.verify(&d, &params, &f).unwrap();
    }

    #[test]
    fn start_point_must_be_interior() {
        let d = disk();
        let f = BoundaryFunction::Constant(0.0);
        let params = GameParams::new(2, 4.0, 0.05).unwrap();
        let fam = StreamFamily::new(0);
        let mut streams = fam.trajectory(0);
        let err = play(
            &d, &f, &params, &P::new2(2.0, 0.0),
            &mut AlwaysTerminate, &mut AlwaysTerminate, &mut streams,
        )
        .unwrap_err();
        assert!(matches!(err, GameError::StartOutsideDomain(_)));
    }
}
