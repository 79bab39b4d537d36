//! Payoff functions on domain boundaries.
//!
//! Indicator targets are always approximated from above by tent functions
//! `max(0, 1 − dist(y, E)/δ)`, which are continuous, so the solver sees
//! continuous data. Pointwise overrides (discontinuous by construction) are
//! legal only for direct game play, never for solver input.

use crate::geometry::{BoundarySet, Domain, GeometryError, Point};
use crate::scalar::{real, Real};
use thiserror::Error;

/// Points farther than this from ∂Ω are rejected by `evaluate`.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Exact-coordinate tolerance for pointwise overrides.
pub const OVERRIDE_MATCH_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error("point {0} is not on the domain boundary (distance > {BOUNDARY_TOL})")]
    OffBoundary(String),
    #[error("invalid boundary function: {0}")]
    Invalid(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Boundary payoff. All kinds except `PointwiseOverride` are continuous.
#[derive(Clone, Debug)]
pub enum BoundaryFunction<S> {
    Constant(S),
    /// f(y) = y[axis].
    LinearCoordinate { axis: usize },
    /// Piecewise-linear profile in the polar angle about `center`; 2D only.
    /// Entries are (angle in [−π, π), value), strictly increasing in angle,
    /// interpolated circularly.
    AngularProfile { center: Point<S>, table: Vec<(S, S)> },
    /// Tent approximation of the indicator of E from above:
    /// f(y) = max(0, 1 − dist(y, E)/δ).
    MollifiedIndicator { set: BoundarySet<S>, delta: S },
    /// Base function with finitely many exact-point replacements.
    PointwiseOverride { base: Box<BoundaryFunction<S>>, overrides: Vec<(Point<S>, S)> },
    Sum(Vec<BoundaryFunction<S>>),
}

impl<S: Real> BoundaryFunction<S> {
    pub fn tent(set: BoundarySet<S>, delta: S) -> Result<Self, BoundaryError> {
        if !(delta > S::zero()) {
            return Err(BoundaryError::Invalid(format!(
                "mollification width must be positive, got {delta}"
            )));
        }
        Ok(BoundaryFunction::MollifiedIndicator { set, delta })
    }

    pub fn with_overrides(
        self,
        overrides: Vec<(Point<S>, S)>,
    ) -> BoundaryFunction<S> {
        BoundaryFunction::PointwiseOverride { base: Box::new(self), overrides }
    }

    /// True when the function contains no (nonempty) pointwise override.
    pub fn is_continuous(&self) -> bool {
        match self {
            BoundaryFunction::PointwiseOverride { overrides, .. } => overrides.is_empty(),
            BoundaryFunction::Sum(fs) => fs.iter().all(|f| f.is_continuous()),
            _ => true,
        }
    }

    /// Payoff at a boundary point. Errors when y is off ∂Ω (beyond 1e−9).
    pub fn evaluate(&self, domain: &Domain<S>, y: &Point<S>) -> Result<S, BoundaryError> {
        if !domain.on_boundary(y, real::<S>(BOUNDARY_TOL)) {
            return Err(BoundaryError::OffBoundary(y.fmt_coords()));
        }
        Ok(self.eval_unchecked(y))
    }

    /// Payoff without the boundary-membership check; callers guarantee the
    /// point is on (or within solver tolerance of) the boundary.
    pub fn eval_unchecked(&self, y: &Point<S>) -> S {
        match self {
            BoundaryFunction::Constant(c) => *c,
            BoundaryFunction::LinearCoordinate { axis } => y.coords()[*axis],
            BoundaryFunction::AngularProfile { center, table } => {
                angular_interp(center, table, y)
            }
            BoundaryFunction::MollifiedIndicator { set, delta } => {
                (S::one() - set.dist(y) / *delta).max(S::zero())
            }
            BoundaryFunction::PointwiseOverride { base, overrides } => {
                let tol = real::<S>(OVERRIDE_MATCH_TOL);
                for (p, v) in overrides {
                    if p.dim() == y.dim() && p.dist(y) <= tol {
                        return *v;
                    }
                }
                base.eval_unchecked(y)
            }
            BoundaryFunction::Sum(fs) => {
                fs.iter().fold(S::zero(), |acc, f| acc + f.eval_unchecked(y))
            }
        }
    }

    /// Structural validation (axis range, profile table shape, tent width).
    pub fn validate(&self, dim: usize) -> Result<(), BoundaryError> {
        match self {
            BoundaryFunction::Constant(c) => {
                if !c.is_finite() {
                    return Err(BoundaryError::Invalid("constant must be finite".into()));
                }
            }
            BoundaryFunction::LinearCoordinate { axis } => {
                if *axis >= dim {
                    return Err(BoundaryError::Invalid(format!(
                        "coordinate axis {axis} out of range for dimension {dim}"
                    )));
                }
            }
            BoundaryFunction::AngularProfile { table, .. } => {
                if dim != 2 {
                    return Err(BoundaryError::Invalid(
                        "angular profiles are 2D only".into(),
                    ));
                }
                if table.is_empty() {
                    return Err(BoundaryError::Invalid("profile table is empty".into()));
                }
                let pi = S::PI();
                for w in table.windows(2) {
                    if !(w[0].0 < w[1].0) {
                        return Err(BoundaryError::Invalid(
                            "profile angles must be strictly increasing".into(),
                        ));
                    }
                }
                if table[0].0 < -pi || table[table.len() - 1].0 >= pi {
                    return Err(BoundaryError::Invalid(
                        "profile angles must lie in [-pi, pi)".into(),
                    ));
                }
            }
            BoundaryFunction::MollifiedIndicator { delta, .. } => {
                if !(*delta > S::zero()) {
                    return Err(BoundaryError::Invalid(
                        "mollification width must be positive".into(),
                    ));
                }
            }
            BoundaryFunction::PointwiseOverride { base, overrides } => {
                base.validate(dim)?;
                for (p, v) in overrides {
                    if p.dim() != dim {
                        return Err(BoundaryError::Invalid(
                            "override point dimension mismatch".into(),
                        ));
                    }
                    if !v.is_finite() {
                        return Err(BoundaryError::Invalid(
                            "override value must be finite".into(),
                        ));
                    }
                }
            }
            BoundaryFunction::Sum(fs) => {
                if fs.is_empty() {
                    return Err(BoundaryError::Invalid("empty sum".into()));
                }
                for f in fs {
                    f.validate(dim)?;
                }
            }
        }
        Ok(())
    }
}

fn angular_interp<S: Real>(center: &Point<S>, table: &[(S, S)], y: &Point<S>) -> S {
    let d = y.sub(center);
    let ang = d.y().atan2(d.x());
    if table.len() == 1 {
        return table[0].1;
    }
    let two_pi = S::PI() * real::<S>(2.0);
    // Find the bracketing pair, wrapping the last->first gap through ±π.
    for w in table.windows(2) {
        if ang >= w[0].0 && ang <= w[1].0 {
            let t = (ang - w[0].0) / (w[1].0 - w[0].0);
            return w[0].1 + (w[1].1 - w[0].1) * t;
        }
    }
    let (a_last, v_last) = table[table.len() - 1];
    let (a_first, v_first) = table[0];
    let gap = a_first + two_pi - a_last;
    let ang_shift = if ang < a_first { ang + two_pi } else { ang };
    let t = (ang_shift - a_last) / gap;
    v_last + (v_first - v_last) * t
}

/// Tents for a strictly decreasing width sequence: pointwise nonincreasing
/// in k and each everywhere ≥ the indicator of E.
pub fn mollify_sequence<S: Real>(
    set: &BoundarySet<S>,
    deltas: &[S],
) -> Result<Vec<BoundaryFunction<S>>, BoundaryError> {
    if deltas.is_empty() {
        return Err(BoundaryError::Invalid("empty width sequence".into()));
    }
    for w in deltas.windows(2) {
        if !(w[1] < w[0]) {
            return Err(BoundaryError::Invalid(format!(
                "widths must be strictly decreasing, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    deltas
        .iter()
        .map(|d| BoundaryFunction::tent(set.clone(), *d))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;

    type P = Point<f64>;
    type BF = BoundaryFunction<f64>;

    fn unit_disk() -> Domain<f64> {
        Domain::new(Shape::Ball { center: P::new2(0.0, 0.0), radius: 1.0 }).unwrap()
    }

    #[test]
    fn tent_matches_the_formula() {
        let e = BoundarySet::Point(P::new2(1.0, 0.0));
        let f = BF::tent(e, 0.5).unwrap();
        let y = P::new2(0.3f64.cos(), 0.3f64.sin());
        let dist = y.dist(&P::new2(1.0, 0.0));
        let expect = (1.0 - dist / 0.5).max(0.0);
        assert_eq!(f.eval_unchecked(&y), expect);
        // Far side of the circle: clamped to zero.
        assert_eq!(f.eval_unchecked(&P::new2(-1.0, 0.0)), 0.0);
        // At the target: exactly one.
        assert_eq!(f.eval_unchecked(&P::new2(1.0, 0.0)), 1.0);
    }

    #[test]
    fn evaluate_rejects_interior_points() {
        let d = unit_disk();
        let f = BF::Constant(1.0);
        assert!(f.evaluate(&d, &P::new2(0.5, 0.0)).is_err());
        assert_eq!(f.evaluate(&d, &P::new2(0.0, 1.0)).unwrap(), 1.0);
    }

    #[test]
    fn mollified_sequence_decreases_toward_the_indicator() {
        let e = BoundarySet::Point(P::new2(1.0, 0.0));
        let fs = mollify_sequence(&e, &[0.4, 0.2, 0.1]).unwrap();
        for k in 0..64 {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / 64.0;
            let y = P::new2(ang.cos(), ang.sin());
            let vals: Vec<f64> = fs.iter().map(|f| f.eval_unchecked(&y)).collect();
            assert!(vals[0] >= vals[1] && vals[1] >= vals[2], "not decreasing at {ang}");
            let chi = if y == P::new2(1.0, 0.0) { 1.0 } else { 0.0 };
            assert!(vals[2] >= chi);
        }
        // Rejects non-decreasing widths.
        assert!(mollify_sequence(&e, &[0.2, 0.2]).is_err());
    }

    #[test]
    fn override_replaces_exact_points_only() {
        let base = BF::Constant(0.0);
        let f = base.with_overrides(vec![(P::new2(1.0, 0.0), 5.0)]);
        assert!(!f.is_continuous());
        assert_eq!(f.eval_unchecked(&P::new2(1.0, 0.0)), 5.0);
        let near = P::new2(1.0 - 1e-6, 0.0);
        assert_eq!(f.eval_unchecked(&near), 0.0);
        let empty = BF::Constant(0.0).with_overrides(vec![]);
        assert!(empty.is_continuous());
    }

    #[test]
    fn angular_profile_interpolates_circularly() {
        let table = vec![(-std::f64::consts::PI, 0.0), (0.0, 1.0)];
        let f = BF::AngularProfile { center: P::new2(0.0, 0.0), table };
        f.validate(2).unwrap();
        let at = |ang: f64| f.eval_unchecked(&P::new2(ang.cos(), ang.sin()));
        assert!((at(-std::f64::consts::FRAC_PI_2) - 0.5).abs() < 1e-12);
        assert!((at(0.0) - 1.0).abs() < 1e-12);
        // Wrap side: halfway from angle 0 (value 1) back to −π (value 0).
        assert!((at(std::f64::consts::FRAC_PI_2) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sum_adds_values() {
        let f = BF::Sum(vec![BF::Constant(0.25), BF::LinearCoordinate { axis: 1 }]);
        assert!((f.eval_unchecked(&P::new2(0.0, 1.0)) - 1.25).abs() < 1e-15);
        assert!(f.is_continuous());
    }

    #[test]
    fn validation_catches_bad_axis_and_width() {
        assert!(BF::LinearCoordinate { axis: 2 }.validate(2).is_err());
        assert!(BF::tent(BoundarySet::Point(P::new2(1.0, 0.0)), 0.0).is_err());
    }
}
