//! Domains, their boundary decompositions, and boundary target sets.
//!
//! Every domain is an open set in ℝⁿ (n = 2 or 3) built from exact analytic
//! primitives — spheres, segments, isolated points — so distance to the
//! boundary is closed-form, never a mesh approximation. Isolated boundary
//! points (punctures) are first-class citizens: excluded from membership,
//! counted by boundary distance, and eligible as terminal points.

use crate::scalar::{real, Real};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("dimension mismatch: domain is {domain}D, point is {point}D")]
    DimensionMismatch { domain: usize, point: usize },
    #[error("point {0} is not in the open domain")]
    OutsideDomain(String),
    #[error("invalid boundary set: {0}")]
    InvalidBoundarySet(String),
}

// ---------------------------------------------------------------------------
// Points and vectors
// ---------------------------------------------------------------------------

/// Position in ℝⁿ, n ∈ {2, 3}. The third coordinate of a 2D point is zero.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point<S> {
    c: [S; 3],
    dim: usize,
}

/// Displacement in ℝⁿ, n ∈ {2, 3}.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vector<S> {
    c: [S; 3],
    dim: usize,
}

macro_rules! impl_coords {
    ($t:ident) => {
        impl<S: Real> $t<S> {
            pub fn new2(x: S, y: S) -> Self {
                Self { c: [x, y, S::zero()], dim: 2 }
            }

            pub fn new3(x: S, y: S, z: S) -> Self {
                Self { c: [x, y, z], dim: 3 }
            }

            /// Builds from a coordinate slice of length 2 or 3.
            pub fn from_slice(v: &[S]) -> Result<Self, GeometryError> {
                match v {
                    [x, y] => Ok(Self::new2(*x, *y)),
                    [x, y, z] => Ok(Self::new3(*x, *y, *z)),
                    _ => Err(GeometryError::InvalidDomain(format!(
                        "coordinate list must have 2 or 3 entries, got {}",
                        v.len()
                    ))),
                }
            }

            pub fn zero(dim: usize) -> Self {
                assert!(dim == 2 || dim == 3, "dimension must be 2 or 3");
                Self { c: [S::zero(); 3], dim }
            }

            #[inline]
            pub fn dim(&self) -> usize {
                self.dim
            }

            #[inline]
            pub fn coords(&self) -> &[S] {
                &self.c[..self.dim]
            }

            #[inline]
            pub fn x(&self) -> S {
                self.c[0]
            }

            #[inline]
            pub fn y(&self) -> S {
                self.c[1]
            }

            #[inline]
            pub fn z(&self) -> S {
                self.c[2]
            }

            pub fn fmt_coords(&self) -> String {
                let v: Vec<String> = self.coords().iter().map(|c| format!("{c}")).collect();
                format!("({})", v.join(", "))
            }

            /// Space-separated full-precision coordinates for text dumps.
            pub fn fmt_row(&self) -> String {
                let v: Vec<String> = self.coords().iter().map(|c| format!("{c:e}")).collect();
                v.join(" ")
            }
        }
    };
}

impl_coords!(Point);
impl_coords!(Vector);

impl<S: Real> Point<S> {
    #[inline]
    pub fn sub(&self, other: &Point<S>) -> Vector<S> {
        debug_assert_eq!(self.dim, other.dim, "mixed-dimension point subtraction");
        Vector {
            c: [self.c[0] - other.c[0], self.c[1] - other.c[1], self.c[2] - other.c[2]],
            dim: self.dim,
        }
    }

    #[inline]
    pub fn add(&self, v: &Vector<S>) -> Point<S> {
        debug_assert_eq!(self.dim, v.dim, "mixed-dimension translate");
        Point {
            c: [self.c[0] + v.c[0], self.c[1] + v.c[1], self.c[2] + v.c[2]],
            dim: self.dim,
        }
    }

    #[inline]
    pub fn dist(&self, other: &Point<S>) -> S {
        self.sub(other).norm()
    }

    #[inline]
    pub fn dist_sq(&self, other: &Point<S>) -> S {
        self.sub(other).norm_sq()
    }
}

impl<S: Real> Vector<S> {
    #[inline]
    pub fn dot(&self, other: &Vector<S>) -> S {
        debug_assert_eq!(self.dim, other.dim, "mixed-dimension dot product");
        self.c[0] * other.c[0] + self.c[1] * other.c[1] + self.c[2] * other.c[2]
    }

    #[inline]
    pub fn norm_sq(&self) -> S {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> S {
        self.norm_sq().sqrt()
    }

    #[inline]
    pub fn scaled(&self, s: S) -> Vector<S> {
        Vector { c: [self.c[0] * s, self.c[1] * s, self.c[2] * s], dim: self.dim }
    }

    #[inline]
    pub fn add(&self, other: &Vector<S>) -> Vector<S> {
        debug_assert_eq!(self.dim, other.dim, "mixed-dimension vector add");
        Vector {
            c: [self.c[0] + other.c[0], self.c[1] + other.c[1], self.c[2] + other.c[2]],
            dim: self.dim,
        }
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn unit(&self) -> Option<Vector<S>> {
        let n = self.norm();
        if n == S::zero() {
            None
        } else {
            Some(self.scaled(S::one() / n))
        }
    }

    /// Counterclockwise quarter turn; 2D only.
    pub fn perp(&self) -> Vector<S> {
        assert_eq!(self.dim, 2, "perp is defined for 2D vectors");
        Vector { c: [-self.c[1], self.c[0], S::zero()], dim: 2 }
    }

    /// Cross product; 3D only.
    pub fn cross(&self, other: &Vector<S>) -> Vector<S> {
        assert_eq!(self.dim, 3, "cross product is defined for 3D vectors");
        Vector {
            c: [
                self.c[1] * other.c[2] - self.c[2] * other.c[1],
                self.c[2] * other.c[0] - self.c[0] * other.c[2],
                self.c[0] * other.c[1] - self.c[1] * other.c[0],
            ],
            dim: 3,
        }
    }

    /// A deterministic pair of unit vectors spanning the plane orthogonal to
    /// `self`; 3D only, `self` nonzero.
    pub fn orthonormal_complement(&self) -> (Vector<S>, Vector<S>) {
        assert_eq!(self.dim, 3, "orthonormal complement is a 3D operation");
        let u = self.unit().expect("orthonormal complement of a nonzero vector");
        let ax = u.c[0].abs();
        let ay = u.c[1].abs();
        let az = u.c[2].abs();
        // Cross against the axis least aligned with u for stability.
        let helper = if ax <= ay && ax <= az {
            Vector::new3(S::one(), S::zero(), S::zero())
        } else if ay <= az {
            Vector::new3(S::zero(), S::one(), S::zero())
        } else {
            Vector::new3(S::zero(), S::zero(), S::one())
        };
        let e1 = u.cross(&helper).unit().expect("helper axis not parallel to u");
        let e2 = u.cross(&e1).unit().expect("cross of orthonormal pair");
        (e1, e2)
    }
}

/// Closest point of segment [a, b] to x, with its parameter t ∈ [0, 1].
fn segment_closest<S: Real>(a: &Point<S>, b: &Point<S>, x: &Point<S>) -> (Point<S>, S) {
    let ab = b.sub(a);
    let len_sq = ab.norm_sq();
    if len_sq == S::zero() {
        return (*a, S::zero());
    }
    let t = x.sub(a).dot(&ab) / len_sq;
    let t = t.max(S::zero()).min(S::one());
    (a.add(&ab.scaled(t)), t)
}

// ---------------------------------------------------------------------------
// Boundary components
// ---------------------------------------------------------------------------

/// One analytic piece of ∂Ω.
#[derive(Clone, Debug)]
pub enum BoundaryComponent<S> {
    /// Circle (2D) or sphere (3D) centered at `center`.
    Sphere { center: Point<S>, radius: S },
    /// Closed segment [a, b].
    Segment { a: Point<S>, b: Point<S> },
    /// Single boundary point. `isolated` is false only for accumulation
    /// points of puncture sequences.
    Point { p: Point<S>, isolated: bool },
}

impl<S: Real> BoundaryComponent<S> {
    /// Distance from x to the component together with the nearest witness
    /// point on it.
    pub fn nearest(&self, x: &Point<S>) -> (Point<S>, S) {
        match self {
            BoundaryComponent::Sphere { center, radius } => {
                let d = x.sub(center);
                let n = d.norm();
                let dir = d.unit().unwrap_or_else(|| {
                    let mut e = Vector::zero(x.dim());
                    e.c[0] = S::one();
                    e
                });
                let witness = center.add(&dir.scaled(*radius));
                (witness, (n - *radius).abs())
            }
            BoundaryComponent::Segment { a, b } => {
                let (w, _) = segment_closest(a, b, x);
                (w, w.dist(x))
            }
            BoundaryComponent::Point { p, .. } => (*p, p.dist(x)),
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, BoundaryComponent::Point { .. })
    }
}

// ---------------------------------------------------------------------------
// Domains
// ---------------------------------------------------------------------------

/// The analytic domain families the lab works on.
#[derive(Clone, Debug)]
pub enum Shape<S> {
    Ball { center: Point<S>, radius: S },
    PuncturedBall { center: Point<S>, radius: S, puncture: Point<S> },
    Annulus { center: Point<S>, inner: S, outer: S },
    PuncturedAnnulus { center: Point<S>, inner: S, outer: S, puncture: Point<S> },
    /// Ball minus a closed segment.
    SlitBall { center: Point<S>, radius: S, slit_a: Point<S>, slit_b: Point<S> },
    /// Ball minus the punctures center + scale·ratioᵏ·direction, k = 1..=k_max,
    /// minus their accumulation point (the center).
    BallMinusPointSequence {
        center: Point<S>,
        radius: S,
        scale: S,
        ratio: S,
        direction: Vector<S>,
        k_max: usize,
    },
    /// Interior of a simple polygon, 2D only. Vertices in order, not repeated.
    Polygon { vertices: Vec<Point<S>> },
}

#[derive(Clone, Debug)]
pub struct Domain<S> {
    shape: Shape<S>,
    dim: usize,
    components: Vec<BoundaryComponent<S>>,
}

impl<S: Real> Domain<S> {
    pub fn new(shape: Shape<S>) -> Result<Self, GeometryError> {
        let bad = |msg: String| Err(GeometryError::InvalidDomain(msg));
        let dim = match &shape {
            Shape::Ball { center, radius } => {
                if !(*radius > S::zero()) {
                    return bad(format!("ball radius must be positive, got {radius}"));
                }
                center.dim()
            }
            Shape::PuncturedBall { center, radius, puncture } => {
                if !(*radius > S::zero()) {
                    return bad(format!("ball radius must be positive, got {radius}"));
                }
                if puncture.dim() != center.dim() {
                    return Err(GeometryError::DimensionMismatch {
                        domain: center.dim(),
                        point: puncture.dim(),
                    });
                }
                if !(puncture.dist(center) < *radius) {
                    return bad("puncture must lie strictly inside the ball".into());
                }
                center.dim()
            }
            Shape::Annulus { center, inner, outer } => {
                if !(S::zero() < *inner && *inner < *outer) {
                    return bad(format!("annulus needs 0 < inner < outer, got {inner}, {outer}"));
                }
                center.dim()
            }
            Shape::PuncturedAnnulus { center, inner, outer, puncture } => {
                if !(S::zero() < *inner && *inner < *outer) {
                    return bad(format!("annulus needs 0 < inner < outer, got {inner}, {outer}"));
                }
                let r = puncture.dist(center);
                if !(*inner < r && r < *outer) {
                    return bad("puncture must lie strictly inside the annulus".into());
                }
                center.dim()
            }
            Shape::SlitBall { center, radius, slit_a, slit_b } => {
                if !(*radius > S::zero()) {
                    return bad(format!("ball radius must be positive, got {radius}"));
                }
                if slit_a.dim() != center.dim() || slit_b.dim() != center.dim() {
                    return Err(GeometryError::DimensionMismatch {
                        domain: center.dim(),
                        point: slit_a.dim().max(slit_b.dim()),
                    });
                }
                if !(slit_a.dist(center) < *radius) || !(slit_b.dist(center) < *radius) {
                    return bad("slit endpoints must lie inside the ball".into());
                }
                if slit_a == slit_b {
                    return bad("slit must have positive length".into());
                }
                center.dim()
            }
            Shape::BallMinusPointSequence { center, radius, scale, ratio, direction, k_max } => {
                if !(*radius > S::zero()) {
                    return bad(format!("ball radius must be positive, got {radius}"));
                }
                if !(*ratio > S::zero() && *ratio < S::one()) {
                    return bad(format!("sequence ratio must satisfy 0 < ratio < 1, got {ratio}"));
                }
                if !(*scale > S::zero()) {
                    return bad(format!("sequence scale must be positive, got {scale}"));
                }
                if direction.unit().is_none() {
                    return bad("sequence direction must be nonzero".into());
                }
                if *k_max == 0 {
                    return bad("sequence needs k_max >= 1".into());
                }
                if !(*scale * *ratio < *radius) {
                    return bad("first puncture scale*ratio must lie inside the ball".into());
                }
                center.dim()
            }
            Shape::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return bad("polygon needs at least 3 vertices".into());
                }
                if vertices.iter().any(|v| v.dim() != 2) {
                    return bad("polygon vertices must be 2D".into());
                }
                2
            }
        };
        if dim != 2 && dim != 3 {
            return bad(format!("dimension must be 2 or 3, got {dim}"));
        }
        let components = Self::build_components(&shape);
        Ok(Domain { shape, dim, components })
    }

    fn build_components(shape: &Shape<S>) -> Vec<BoundaryComponent<S>> {
        match shape {
            Shape::Ball { center, radius } => {
                vec![BoundaryComponent::Sphere { center: *center, radius: *radius }]
            }
            Shape::PuncturedBall { center, radius, puncture } => vec![
                BoundaryComponent::Sphere { center: *center, radius: *radius },
                BoundaryComponent::Point { p: *puncture, isolated: true },
            ],
            Shape::Annulus { center, inner, outer } => vec![
                BoundaryComponent::Sphere { center: *center, radius: *outer },
                BoundaryComponent::Sphere { center: *center, radius: *inner },
            ],
            Shape::PuncturedAnnulus { center, inner, outer, puncture } => vec![
                BoundaryComponent::Sphere { center: *center, radius: *outer },
                BoundaryComponent::Sphere { center: *center, radius: *inner },
                BoundaryComponent::Point { p: *puncture, isolated: true },
            ],
            Shape::SlitBall { center, radius, slit_a, slit_b } => vec![
                BoundaryComponent::Sphere { center: *center, radius: *radius },
                BoundaryComponent::Segment { a: *slit_a, b: *slit_b },
            ],
            Shape::BallMinusPointSequence { center, radius, scale, ratio, direction, k_max } => {
                let mut comps =
                    vec![BoundaryComponent::Sphere { center: *center, radius: *radius }];
                let dir = direction.unit().expect("validated nonzero");
                let mut r = *scale;
                for _ in 1..=*k_max {
                    r = r * *ratio;
                    comps.push(BoundaryComponent::Point {
                        p: center.add(&dir.scaled(r)),
                        isolated: true,
                    });
                }
                // Accumulation point of the punctures: part of the boundary,
                // but not isolated.
                comps.push(BoundaryComponent::Point { p: *center, isolated: false });
                comps
            }
            Shape::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| BoundaryComponent::Segment {
                        a: vertices[i],
                        b: vertices[(i + 1) % n],
                    })
                    .collect()
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape<S> {
        &self.shape
    }

    /// Stable kind tag for reports and dumps.
    pub fn shape_name(&self) -> &'static str {
        match &self.shape {
            Shape::Ball { .. } => "ball",
            Shape::PuncturedBall { .. } => "punctured_ball",
            Shape::Annulus { .. } => "annulus",
            Shape::PuncturedAnnulus { .. } => "punctured_annulus",
            Shape::SlitBall { .. } => "slit_ball",
            Shape::BallMinusPointSequence { .. } => "ball_minus_point_sequence",
            Shape::Polygon { .. } => "polygon",
        }
    }

    pub fn components(&self) -> &[BoundaryComponent<S>] {
        &self.components
    }

    fn check_dim(&self, x: &Point<S>) -> Result<(), GeometryError> {
        if x.dim() != self.dim {
            Err(GeometryError::DimensionMismatch { domain: self.dim, point: x.dim() })
        } else {
            Ok(())
        }
    }

    /// Membership in the open set: boundary points and punctures excluded.
    pub fn contains(&self, x: &Point<S>) -> bool {
        if x.dim() != self.dim {
            return false;
        }
        match &self.shape {
            Shape::Ball { center, radius } => x.dist(center) < *radius,
            Shape::PuncturedBall { center, radius, puncture } => {
                x.dist(center) < *radius && x != puncture
            }
            Shape::Annulus { center, inner, outer } => {
                let r = x.dist(center);
                *inner < r && r < *outer
            }
            Shape::PuncturedAnnulus { center, inner, outer, puncture } => {
                let r = x.dist(center);
                *inner < r && r < *outer && x != puncture
            }
            Shape::SlitBall { center, radius, slit_a, slit_b } => {
                if !(x.dist(center) < *radius) {
                    return false;
                }
                let (w, _) = segment_closest(slit_a, slit_b, x);
                w.dist(x) > S::zero()
            }
            Shape::BallMinusPointSequence { center, radius, .. } => {
                if !(x.dist(center) < *radius) {
                    return false;
                }
                if x == center {
                    return false;
                }
                for comp in &self.components {
                    if let BoundaryComponent::Point { p, .. } = comp {
                        if x == p {
                            return false;
                        }
                    }
                }
                true
            }
            Shape::Polygon { vertices } => {
                polygon_contains(vertices, x) && {
                    // Strictly inside means positive distance to every edge.
                    self.components.iter().all(|c| c.nearest(x).1 > S::zero())
                }
            }
        }
    }

    /// Distance from an interior point to ∂Ω. Punctures count.
    pub fn dist_boundary(&self, x: &Point<S>) -> Result<S, GeometryError> {
        self.check_dim(x)?;
        if !self.contains(x) {
            return Err(GeometryError::OutsideDomain(x.fmt_coords()));
        }
        Ok(self.boundary_distance_unchecked(x))
    }

    /// Distance from any point of ℝⁿ to the boundary set ∂Ω.
    pub fn boundary_distance_unchecked(&self, x: &Point<S>) -> S {
        self.components
            .iter()
            .map(|c| c.nearest(x).1)
            .fold(S::infinity(), |a, b| a.min(b))
    }

    /// Nearest boundary point to x (x may be anywhere), with its distance.
    /// Ties are broken by component order.
    pub fn nearest_boundary(&self, x: &Point<S>) -> (Point<S>, S) {
        let mut best: Option<(Point<S>, S)> = None;
        for comp in &self.components {
            let (w, d) = comp.nearest(x);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((w, d));
            }
        }
        best.expect("domain has at least one boundary component")
    }

    /// True when x lies within `tol` of ∂Ω.
    pub fn on_boundary(&self, x: &Point<S>, tol: S) -> bool {
        x.dim() == self.dim && self.boundary_distance_unchecked(x) <= tol
    }

    /// The punctures of the domain, in construction order. Accumulation
    /// points of puncture sequences are boundary points but not isolated,
    /// so they are not listed.
    pub fn isolated_boundary_points(&self) -> Vec<Point<S>> {
        self.components
            .iter()
            .filter_map(|c| match c {
                BoundaryComponent::Point { p, isolated: true } => Some(*p),
                _ => None,
            })
            .collect()
    }

    /// Finite set of terminal candidates on ∂Ω within distance r of x:
    /// the nearest boundary point, every puncture within r, and `m` spread
    /// samples per smooth component intersecting B(x, r).
    ///
    /// Every candidate p satisfies |p − x| ≤ r + 1e−12 and `!contains(p)`.
    pub fn boundary_candidates(&self, x: &Point<S>, r: S, m: usize) -> Vec<Point<S>> {
        let slack = real::<S>(1e-12);
        let mut out = Vec::with_capacity(m + 2);
        let (nearest, d) = self.nearest_boundary(x);
        if d <= r + slack {
            out.push(nearest);
        }
        for comp in &self.components {
            match comp {
                BoundaryComponent::Point { p, .. } => {
                    if p.dist(x) <= r + slack {
                        out.push(*p);
                    }
                }
                BoundaryComponent::Sphere { center, radius } => {
                    sphere_cap_samples(center, *radius, x, r, m, &mut out);
                }
                BoundaryComponent::Segment { a, b } => {
                    segment_samples(a, b, x, r, m, &mut out);
                }
            }
        }
        out.retain(|p| p.dist(x) <= r + slack && !self.contains(p));
        out
    }

    /// Axis-aligned bounding box of the closure of Ω.
    pub fn bounding_box(&self) -> (Point<S>, Point<S>) {
        match &self.shape {
            Shape::Ball { center, radius }
            | Shape::PuncturedBall { center, radius, .. }
            | Shape::SlitBall { center, radius, .. }
            | Shape::BallMinusPointSequence { center, radius, .. } => {
                box_around(center, *radius)
            }
            Shape::Annulus { center, outer, .. } | Shape::PuncturedAnnulus { center, outer, .. } => {
                box_around(center, *outer)
            }
            Shape::Polygon { vertices } => {
                let mut lo = [S::infinity(); 3];
                let mut hi = [S::neg_infinity(); 3];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v.c[k]);
                        hi[k] = hi[k].max(v.c[k]);
                    }
                }
                lo[2] = S::zero();
                hi[2] = S::zero();
                (Point { c: lo, dim: 2 }, Point { c: hi, dim: 2 })
            }
        }
    }

    /// Radius of the smallest origin-at-center ball containing Ω; used for
    /// step-size sanity checks.
    pub fn bounding_radius(&self) -> S {
        let (lo, hi) = self.bounding_box();
        let mut r = S::zero();
        for k in 0..self.dim {
            r = r.max((hi.c[k] - lo.c[k]) * real::<S>(0.5));
        }
        r
    }
}

fn box_around<S: Real>(center: &Point<S>, radius: S) -> (Point<S>, Point<S>) {
    let mut lo = center.c;
    let mut hi = center.c;
    for k in 0..center.dim() {
        lo[k] = lo[k] - radius;
        hi[k] = hi[k] + radius;
    }
    (Point { c: lo, dim: center.dim() }, Point { c: hi, dim: center.dim() })
}

/// Even-odd crossing test; boundary points are resolved separately by edge
/// distance, so the raw parity answer here is only used for strict interior.
fn polygon_contains<S: Real>(vertices: &[Point<S>], x: &Point<S>) -> bool {
    let mut inside = false;
    let n = vertices.len();
    let (px, py) = (x.c[0], x.c[1]);
    for i in 0..n {
        let (x1, y1) = (vertices[i].c[0], vertices[i].c[1]);
        let (x2, y2) = (vertices[(i + 1) % n].c[0], vertices[(i + 1) % n].c[1]);
        if (y1 > py) != (y2 > py) {
            let t = (py - y1) / (y2 - y1);
            let xc = x1 + t * (x2 - x1);
            if px < xc {
                inside = !inside;
            }
        }
    }
    inside
}

/// Evenly spread samples of {y ∈ sphere : |y − x| ≤ r}, appended to `out`.
fn sphere_cap_samples<S: Real>(
    center: &Point<S>,
    radius: S,
    x: &Point<S>,
    r: S,
    m: usize,
    out: &mut Vec<Point<S>>,
) {
    if m == 0 {
        return;
    }
    let d = x.dist(center);
    // Intersection is empty when the ball around x misses the sphere.
    if (d - radius).abs() > r {
        return;
    }
    let two = real::<S>(2.0);
    // Law of cosines for the angular half-width of the intersection cap,
    // as seen from the sphere center.
    let cos_gamma = if d == S::zero() {
        -S::one()
    } else {
        ((d * d + radius * radius - r * r) / (two * d * radius)).max(-S::one()).min(S::one())
    };
    let gamma = cos_gamma.acos();
    if x.dim() == 2 {
        let to_x = x.sub(center);
        let theta0 = to_x.c[1].atan2(to_x.c[0]);
        for i in 0..m {
            let frac = (real::<S>(2.0) * real::<S>(i as f64 + 0.5) / real::<S>(m as f64))
                - S::one();
            let theta = theta0 + gamma * frac;
            out.push(Point::new2(
                center.c[0] + radius * theta.cos(),
                center.c[1] + radius * theta.sin(),
            ));
        }
    } else {
        // Fibonacci spiral over the spherical cap around the axis through x.
        let axis = match x.sub(center).unit() {
            Some(u) => u,
            None => Vector::new3(S::one(), S::zero(), S::zero()),
        };
        let (e1, e2) = axis.orthonormal_complement();
        let golden = real::<S>(std::f64::consts::PI * (3.0 - 5.0_f64.sqrt()));
        for i in 0..m {
            let frac = real::<S>(i as f64 + 0.5) / real::<S>(m as f64);
            let cos_t = S::one() - (S::one() - gamma.cos()) * frac;
            let sin_t = (S::one() - cos_t * cos_t).max(S::zero()).sqrt();
            let phi = golden * real::<S>(i as f64);
            let dir = axis
                .scaled(cos_t)
                .add(&e1.scaled(sin_t * phi.cos()))
                .add(&e2.scaled(sin_t * phi.sin()));
            out.push(center.add(&dir.scaled(radius)));
        }
    }
}

/// Evenly spread samples of {y ∈ [a,b] : |y − x| ≤ r}, appended to `out`.
fn segment_samples<S: Real>(
    a: &Point<S>,
    b: &Point<S>,
    x: &Point<S>,
    r: S,
    m: usize,
    out: &mut Vec<Point<S>>,
) {
    if m == 0 {
        return;
    }
    // Solve |a + t(b−a) − x|² = r² for the admissible t-interval.
    let ab = b.sub(a);
    let ax = a.sub(x);
    let qa = ab.norm_sq();
    let qb = real::<S>(2.0) * ab.dot(&ax);
    let qc = ax.norm_sq() - r * r;
    let disc = qb * qb - real::<S>(4.0) * qa * qc;
    if disc < S::zero() || qa == S::zero() {
        return;
    }
    let sq = disc.sqrt();
    let t0 = ((-qb - sq) / (real::<S>(2.0) * qa)).max(S::zero());
    let t1 = ((-qb + sq) / (real::<S>(2.0) * qa)).min(S::one());
    if t0 > t1 {
        return;
    }
    for i in 0..m {
        let frac = real::<S>(i as f64 + 0.5) / real::<S>(m as f64);
        let t = t0 + (t1 - t0) * frac;
        out.push(a.add(&ab.scaled(t)));
    }
}

// ---------------------------------------------------------------------------
// Boundary target sets
// ---------------------------------------------------------------------------

/// Subset of ∂Ω whose p-harmonic measure is being estimated. Distances are
/// exact minima over the listed pieces.
#[derive(Clone, Debug)]
pub enum BoundarySet<S> {
    Point(Point<S>),
    Points(Vec<Point<S>>),
    /// Circular arc on the circle |y − center| = radius from angle theta0 to
    /// theta1 (radians, theta0 < theta1). 2D only.
    Arc { center: Point<S>, radius: S, theta0: S, theta1: S },
    /// Spherical cap around `axis` with the given half-angle. 3D only.
    Cap { center: Point<S>, radius: S, axis: Vector<S>, half_angle: S },
    Union(Vec<BoundarySet<S>>),
}

impl<S: Real> BoundarySet<S> {
    /// Euclidean distance from y to the set.
    pub fn dist(&self, y: &Point<S>) -> S {
        match self {
            BoundarySet::Point(p) => p.dist(y),
            BoundarySet::Points(ps) => {
                ps.iter().map(|p| p.dist(y)).fold(S::infinity(), |a, b| a.min(b))
            }
            BoundarySet::Arc { center, radius, theta0, theta1 } => {
                arc_dist(center, *radius, *theta0, *theta1, y)
            }
            BoundarySet::Cap { center, radius, axis, half_angle } => {
                cap_dist(center, *radius, axis, *half_angle, y)
            }
            BoundarySet::Union(sets) => {
                sets.iter().map(|s| s.dist(y)).fold(S::infinity(), |a, b| a.min(b))
            }
        }
    }

    /// Representative points of the set, used for boundary-membership
    /// validation (and, for finite kinds, as the full member list).
    pub fn representatives(&self) -> Vec<Point<S>> {
        match self {
            BoundarySet::Point(p) => vec![*p],
            BoundarySet::Points(ps) => ps.clone(),
            BoundarySet::Arc { center, radius, theta0, theta1 } => {
                [*theta0, (*theta0 + *theta1) * real::<S>(0.5), *theta1]
                    .iter()
                    .map(|t| {
                        Point::new2(center.x() + *radius * t.cos(), center.y() + *radius * t.sin())
                    })
                    .collect()
            }
            BoundarySet::Cap { center, radius, axis, half_angle } => {
                let u = axis.unit().expect("cap axis must be nonzero");
                let (e1, _) = u.orthonormal_complement();
                let pole = center.add(&u.scaled(*radius));
                let rim_dir = u.scaled(half_angle.cos()).add(&e1.scaled(half_angle.sin()));
                vec![pole, center.add(&rim_dir.scaled(*radius))]
            }
            BoundarySet::Union(sets) => sets.iter().flat_map(|s| s.representatives()).collect(),
        }
    }

    /// The set's points when it is finite; `None` for arcs and caps.
    pub fn finite_points(&self) -> Option<Vec<Point<S>>> {
        match self {
            BoundarySet::Point(p) => Some(vec![*p]),
            BoundarySet::Points(ps) => Some(ps.clone()),
            BoundarySet::Union(sets) => {
                let mut out = Vec::new();
                for s in sets {
                    out.extend(s.finite_points()?);
                }
                Some(out)
            }
            _ => None,
        }
    }

    /// Checks that the set's representative points lie on ∂Ω (within tol).
    pub fn validate_on_boundary(
        &self,
        domain: &Domain<S>,
        tol: S,
    ) -> Result<(), GeometryError> {
        for p in self.representatives() {
            if p.dim() != domain.dim() {
                return Err(GeometryError::DimensionMismatch {
                    domain: domain.dim(),
                    point: p.dim(),
                });
            }
            if !domain.on_boundary(&p, tol) {
                return Err(GeometryError::InvalidBoundarySet(format!(
                    "set point {} lies off the domain boundary",
                    p.fmt_coords()
                )));
            }
        }
        Ok(())
    }
}

fn arc_dist<S: Real>(center: &Point<S>, radius: S, theta0: S, theta1: S, y: &Point<S>) -> S {
    let d = y.sub(center);
    let ang = d.c[1].atan2(d.c[0]);
    let two_pi = S::PI() * real::<S>(2.0);
    // Normalize the angle into [theta0, theta0 + 2π).
    let mut a = ang;
    while a < theta0 {
        a = a + two_pi;
    }
    while a >= theta0 + two_pi {
        a = a - two_pi;
    }
    if a <= theta1 {
        // Radial projection lands on the arc.
        (d.norm() - radius).abs()
    } else {
        let e0 = Point::new2(center.x() + radius * theta0.cos(), center.y() + radius * theta0.sin());
        let e1 = Point::new2(center.x() + radius * theta1.cos(), center.y() + radius * theta1.sin());
        e0.dist(y).min(e1.dist(y))
    }
}

fn cap_dist<S: Real>(
    center: &Point<S>,
    radius: S,
    axis: &Vector<S>,
    half_angle: S,
    y: &Point<S>,
) -> S {
    let u = axis.unit().expect("cap axis must be nonzero");
    let d = y.sub(center);
    let n = d.norm();
    if n == S::zero() {
        return radius;
    }
    let cos_polar = (d.dot(&u) / n).max(-S::one()).min(S::one());
    let polar = cos_polar.acos();
    if polar <= half_angle {
        (n - radius).abs()
    } else {
        // Nearest point is on the rim circle; use the chord through the
        // plane spanned by u and y.
        let delta = polar - half_angle;
        // Rim point in that plane at angular distance `delta` from y's ray.
        let rr = radius;
        (n * n + rr * rr - real::<S>(2.0) * n * rr * delta.cos()).max(S::zero()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type P = Point<f64>;

    fn unit_disk() -> Domain<f64> {
        Domain::new(Shape::Ball { center: P::new2(0.0, 0.0), radius: 1.0 }).unwrap()
    }

    fn punctured_disk() -> Domain<f64> {
        Domain::new(Shape::PuncturedBall {
            center: P::new2(0.0, 0.0),
            radius: 1.0,
            puncture: P::new2(0.0, 0.0),
        })
        .unwrap()
    }

    #[test]
    fn punctured_ball_distance_counts_the_puncture() {
        let d = punctured_disk();
        assert_eq!(d.dist_boundary(&P::new2(0.5, 0.0)).unwrap(), 0.5);
        // Closer to the puncture than to the circle.
        assert_eq!(d.dist_boundary(&P::new2(0.25, 0.0)).unwrap(), 0.25);
        assert!(!d.contains(&P::new2(0.0, 0.0)));
        assert!(d.contains(&P::new2(1e-300, 0.0)));
    }

    #[test]
    fn annulus_distance_is_min_over_shells() {
        let d = Domain::new(Shape::Annulus { center: P::new2(0.0, 0.0), inner: 1.0, outer: 2.0 })
            .unwrap();
        assert_eq!(d.dist_boundary(&P::new2(1.5, 0.0)).unwrap(), 0.5);
        assert!(d.dist_boundary(&P::new2(0.5, 0.0)).is_err());
        assert!(d.dist_boundary(&P::new2(2.5, 0.0)).is_err());
    }

    #[test]
    fn slit_ball_uses_exact_segment_distance() {
        let d = Domain::new(Shape::SlitBall {
            center: P::new2(0.0, 0.0),
            radius: 1.0,
            slit_a: P::new2(-0.5, 0.0),
            slit_b: P::new2(0.5, 0.0),
        })
        .unwrap();
        assert!((d.dist_boundary(&P::new2(0.0, 0.3)).unwrap() - 0.3).abs() < 1e-15);
        // Beyond the endpoint, distance is to the endpoint itself.
        let x = P::new2(0.7, 0.1);
        let expect = x.dist(&P::new2(0.5, 0.0));
        assert!((d.dist_boundary(&x).unwrap() - expect).abs() < 1e-15);
        assert!(!d.contains(&P::new2(0.25, 0.0)));
    }

    #[test]
    fn point_sequence_punctures_and_accumulation() {
        let d = Domain::new(Shape::BallMinusPointSequence {
            center: P::new2(0.0, 0.0),
            radius: 1.0,
            scale: 1.0,
            ratio: 0.25,
            direction: Vector::new2(1.0, 0.0),
            k_max: 8,
        })
        .unwrap();
        let punctures = d.isolated_boundary_points();
        assert_eq!(punctures.len(), 8);
        assert_eq!(punctures[0], P::new2(0.25, 0.0));
        assert_eq!(punctures[7], P::new2(0.25f64.powi(8), 0.0));
        // The accumulation point is boundary but not isolated.
        assert!(!d.contains(&P::new2(0.0, 0.0)));
        assert!(!punctures.contains(&P::new2(0.0, 0.0)));
        // Distance from a mid-shell point sees the nearest puncture.
        let x = P::new2(0.125, 0.0);
        assert!((d.dist_boundary(&x).unwrap() - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn candidates_stay_within_reach_and_off_the_open_set() {
        let d = unit_disk();
        let x = P::new2(0.9, 0.0);
        let cands = d.boundary_candidates(&x, 0.3, 16);
        assert!(cands.len() >= 16);
        for p in &cands {
            assert!(p.dist(&x) <= 0.3 + 1e-12, "candidate out of reach: {p:?}");
            assert!(!d.contains(p));
            assert!(d.on_boundary(p, 1e-12));
        }
    }

    #[test]
    fn candidates_include_reachable_punctures() {
        let d = punctured_disk();
        let x = P::new2(0.01, 0.0);
        let cands = d.boundary_candidates(&x, 0.05, 8);
        assert!(cands.iter().any(|p| *p == P::new2(0.0, 0.0)));
    }

    #[test]
    fn candidates_far_from_boundary_are_empty() {
        let d = unit_disk();
        let cands = d.boundary_candidates(&P::new2(0.0, 0.0), 0.5, 8);
        assert!(cands.is_empty());
    }

    #[test]
    fn polygon_containment_and_distance() {
        let square = Domain::new(Shape::Polygon {
            vertices: vec![
                P::new2(0.0, 0.0),
                P::new2(1.0, 0.0),
                P::new2(1.0, 1.0),
                P::new2(0.0, 1.0),
            ],
        })
        .unwrap();
        assert!(square.contains(&P::new2(0.5, 0.5)));
        assert!(!square.contains(&P::new2(1.5, 0.5)));
        assert!(!square.contains(&P::new2(1.0, 0.5)));
        assert!((square.dist_boundary(&P::new2(0.5, 0.25)).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ball_3d_roundtrip() {
        let d = Domain::new(Shape::Ball { center: Point::new3(0.0, 0.0, 0.0), radius: 2.0 })
            .unwrap();
        let x = Point::new3(1.0, 1.0, 1.0);
        let expect = 2.0 - 3.0f64.sqrt();
        assert!((d.dist_boundary(&x).unwrap() - expect).abs() < 1e-15);
        let (nb, nd) = d.nearest_boundary(&x);
        assert!((nb.dist(&Point::zero(3)) - 2.0).abs() < 1e-15);
        assert!((nd - expect).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let d = unit_disk();
        let err = d.dist_boundary(&Point::new3(0.1, 0.1, 0.1)).unwrap_err();
        assert!(matches!(err, GeometryError::DimensionMismatch { .. }));
    }

    #[test]
    fn arc_distance_projects_or_clamps() {
        let arc = BoundarySet::Arc {
            center: P::new2(0.0, 0.0),
            radius: 1.0,
            theta0: 0.0,
            theta1: std::f64::consts::FRAC_PI_2,
        };
        // Radially inside the arc's sector.
        assert!((arc.dist(&P::new2(0.5, 0.5)) - (1.0 - 0.5f64.hypot(0.5))).abs() < 1e-15);
        // Behind the end: nearest is the endpoint (1, 0).
        let y = P::new2(0.8, -0.2);
        assert!((arc.dist(&y) - y.dist(&P::new2(1.0, 0.0))).abs() < 1e-15);
    }

    #[test]
    fn union_distance_is_min() {
        let u = BoundarySet::Union(vec![
            BoundarySet::Point(P::new2(1.0, 0.0)),
            BoundarySet::Point(P::new2(-1.0, 0.0)),
        ]);
        assert_eq!(u.dist(&P::new2(0.6, 0.0)), 0.4);
    }

    #[test]
    fn boundary_set_validation_catches_interior_points() {
        let d = unit_disk();
        let good = BoundarySet::Point(P::new2(1.0, 0.0));
        assert!(good.validate_on_boundary(&d, 1e-9).is_ok());
        let bad = BoundarySet::Point(P::new2(0.5, 0.0));
        assert!(bad.validate_on_boundary(&d, 1e-9).is_err());
    }
}
