//! Grid dynamic-programming solver for game values.
//!
//! The game value satisfies, at interior points,
//!
//! u(x) = ½ max_{|v|≤ε} Āu(x+v) + ½ min_{|v|≤ε} Āu(x+v),
//!
//! where Ā averages over the orthogonal noise kicks, while within the band
//! (boundary distance ≤ αε) the mover terminates and
//! u(x) = ½ max_y f(y) + ½ min_y f(y) over reachable boundary points y. The
//! solver discretizes Ω on a uniform grid of spacing h ≤ ε/4, restricts moves
//! to magnitudes {0, ε/2, ε} times a fixed direction set, evaluates off-grid
//! points by multilinear interpolation, and iterates the update with plain
//! two-buffer sweeps.
//!
//! Because the grid is uniform, every (move, noise) pair lands at the same
//! fractional cell position from any node, so each pair is precompiled into a
//! constant stencil of index offsets and weights, and each sweep is pure
//! slice arithmetic over rows of interior nodes.
//!
//! Plain sweeps contract slowly (rate ≈ 1 − O(ε²) per sweep), so sweeps are
//! combined with a safeguarded Anderson mixer: the iterate is extrapolated
//! from a short window of previous residuals, and any step that increases the
//! residual is discarded together with the window. Acceleration changes only
//! the iteration path, never the fixed point. Stopping is error-targeted: the
//! contraction factor ρ̂ is measured from a tail of plain sweeps and the
//! iteration stops once residual/(1−ρ̂) ≤ tol, so `tol` bounds the sup-norm
//! distance to the discrete fixed point, not just the last update size.

use crate::boundary::{BoundaryError, BoundaryFunction};
use crate::game::GameParams;
use crate::geometry::{Domain, GeometryError, Point, Shape, Vector};
use crate::scalar::{real, Real};
use std::collections::VecDeque;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver precondition failed: {0}")]
    Guard(String),
    #[error("grid of {nodes} nodes exceeds the budget of {max_nodes}; coarsen the grid or shrink the domain")]
    GridTooLarge { nodes: usize, max_nodes: usize },
    #[error("no convergence after {sweeps} sweeps: residual {residual:e} (target {target:e})")]
    NonConvergence { residual: f64, target: f64, sweeps: usize },
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Payoff(#[from] BoundaryError),
}

/// Solver knobs. Defaults follow the accuracy contract h ≤ ε/4 with 16 move
/// directions in 2D and 8-point noise quadrature in 3D.
#[derive(Clone, Copy, Debug)]
pub struct SolveConfig<S> {
    /// Error target: on success the field is within `tol` (sup-norm estimate)
    /// of the discrete fixed point, and its residual is below `tol` as well.
    pub tol: S,
    pub max_sweeps: usize,
    /// h = ε / grid_divisor; must be at least 4.
    pub grid_divisor: usize,
    /// Move directions in 2D (evenly spaced angles).
    pub directions_2d: usize,
    /// Noise quadrature points on the orthogonal circle in 3D.
    pub noise_points_3d: usize,
    /// Boundary candidate samples per smooth component for band values.
    pub band_samples: usize,
    /// Hard cap on grid nodes.
    pub max_nodes: usize,
    /// Anderson mixing window (0 disables acceleration).
    pub anderson_depth: usize,
}

impl<S: Real> Default for SolveConfig<S> {
    fn default() -> Self {
        SolveConfig {
            tol: real::<S>(1e-6),
            max_sweeps: 400_000,
            grid_divisor: 4,
            directions_2d: 16,
            noise_points_3d: 8,
            band_samples: 32,
            max_nodes: 6_000_000,
            anderson_depth: 8,
        }
    }
}

impl<S: Real> SolveConfig<S> {
    pub fn with_tol(mut self, tol: S) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_nodes(mut self, max_nodes: usize) -> Self {
        self.max_nodes = max_nodes;
        self
    }

    fn validate(&self) -> Result<(), SolverError> {
        if self.grid_divisor < 4 {
            return Err(SolverError::BadConfig(format!(
                "grid divisor must be at least 4 so that h <= epsilon/4, got {}",
                self.grid_divisor
            )));
        }
        if !(self.tol > S::zero()) {
            return Err(SolverError::BadConfig("tolerance must be positive".into()));
        }
        if self.directions_2d < 8 {
            return Err(SolverError::BadConfig("need at least 8 move directions".into()));
        }
        if self.noise_points_3d < 4 || self.noise_points_3d % 2 != 0 {
            return Err(SolverError::BadConfig(
                "3D noise quadrature needs an even count of at least 4 points".into(),
            ));
        }
        if self.band_samples < 4 {
            return Err(SolverError::BadConfig("need at least 4 band samples".into()));
        }
        Ok(())
    }
}

/// Node classification on the solver grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    /// Inside the bounding box but outside the open domain; carries the
    /// nearest-boundary payoff and is read only through interpolation.
    Exterior,
    /// Boundary distance ≤ αε: value fixed by the termination rule.
    Band,
    /// Updated by the dynamic-programming sweep.
    Interior,
}

/// Uniform grid over the padded bounding box of the domain.
#[derive(Clone, Debug)]
pub struct Grid<S> {
    pub origin: Point<S>,
    pub h: S,
    pub dims: [usize; 3],
    pub dim: usize,
}

impl<S: Real> Grid<S> {
    pub fn node_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn coord(&self, idx: usize) -> Point<S> {
        let nx = self.dims[0];
        let ny = self.dims[1];
        let i = idx % nx;
        let j = (idx / nx) % ny;
        let k = idx / (nx * ny);
        let o = self.origin.coords();
        let x = o[0] + self.h * real::<S>(i as f64);
        let y = o[1] + self.h * real::<S>(j as f64);
        if self.dim == 2 {
            Point::new2(x, y)
        } else {
            Point::new3(x, y, o[2] + self.h * real::<S>(k as f64))
        }
    }

    /// Cell containing x: base node index plus per-axis fractions in [0,1].
    /// None when x lies outside the grid box.
    pub fn locate(&self, x: &Point<S>) -> Option<(usize, [S; 3])> {
        let o = self.origin.coords();
        let mut cell = [0usize; 3];
        let mut frac = [S::zero(); 3];
        for a in 0..self.dim {
            let t = (x.coords()[a] - o[a]) / self.h;
            if t < S::zero() {
                return None;
            }
            let mut c = t.floor().to_f64().unwrap() as usize;
            // Points exactly on the upper face belong to the last cell.
            if c + 1 >= self.dims[a] {
                if t > real::<S>(self.dims[a] as f64 - 1.0) + real::<S>(1e-9) {
                    return None;
                }
                c = self.dims[a].saturating_sub(2);
            }
            cell[a] = c;
            frac[a] = (t - real::<S>(c as f64)).max(S::zero()).min(S::one());
        }
        let nx = self.dims[0];
        let base = match self.dim {
            2 => cell[1] * nx + cell[0],
            _ => (cell[2] * self.dims[1] + cell[1]) * nx + cell[0],
        };
        Some((base, frac))
    }
}

/// One move with its fused (noise × interpolation-corner) stencil taps,
/// expressed as index offsets from any interior node.
struct MoveStencil<S> {
    v: Vector<S>,
    offsets: Vec<i64>,
    weights: Vec<S>,
}

/// A solved game-value field on a grid.
pub struct ValueField<S> {
    domain: Domain<S>,
    payoff: BoundaryFunction<S>,
    params: GameParams<S>,
    cfg: SolveConfig<S>,
    grid: Grid<S>,
    values: Vec<S>,
    class: Vec<NodeClass>,
    moves: Vec<MoveStencil<S>>,
    runs: Vec<(u32, u32)>,
    residual: S,
    error_bound: S,
    rho: S,
    sweeps: usize,
}

impl<S: Real> ValueField<S> {
    pub fn domain(&self) -> &Domain<S> {
        &self.domain
    }
    pub fn payoff(&self) -> &BoundaryFunction<S> {
        &self.payoff
    }
    pub fn params(&self) -> &GameParams<S> {
        &self.params
    }
    pub fn config(&self) -> &SolveConfig<S> {
        &self.cfg
    }
    pub fn grid(&self) -> &Grid<S> {
        &self.grid
    }
    pub fn values(&self) -> &[S] {
        &self.values
    }
    pub fn class(&self) -> &[NodeClass] {
        &self.class
    }
    /// Sup-norm size of the last sweep update.
    pub fn residual(&self) -> S {
        self.residual
    }
    /// Estimated sup-norm distance to the discrete fixed point.
    pub fn error_bound(&self) -> S {
        self.error_bound
    }
    /// Measured per-sweep contraction factor near the fixed point.
    pub fn rho(&self) -> S {
        self.rho
    }
    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Move set of the discrete game (null move first).
    pub fn move_set(&self) -> impl Iterator<Item = &Vector<S>> {
        self.moves.iter().map(|m| &m.v)
    }

    /// Noise-averaged interpolated value of the field after displacing `x`
    /// by move `m`, i.e. the quantity the dynamic program optimizes.
    /// None when the displaced stencil leaves the grid box.
    pub fn move_value(&self, x: &Point<S>, m: usize) -> Option<S> {
        let st = &self.moves[m];
        // Reconstruct the noise points for this move and interpolate each.
        let mut acc = S::zero();
        let noises = noise_points(&self.params, &st.v, self.cfg.noise_points_3d);
        let w = S::one() / real::<S>(noises.len() as f64);
        for z in &noises {
            let p = x.add(&st.v).add(z);
            acc = acc + self.interp_raw(&p)? * w;
        }
        Some(acc)
    }

    /// Multilinear interpolation at any point of the grid box (including the
    /// band and the exterior extension). None outside the box.
    pub fn interp_raw(&self, x: &Point<S>) -> Option<S> {
        let (base, f) = self.grid.locate(x)?;
        let nx = self.grid.dims[0];
        let v = &self.values;
        if self.grid.dim == 2 {
            let (fx, fy) = (f[0], f[1]);
            let gx = S::one() - fx;
            let gy = S::one() - fy;
            Some(
                v[base] * gx * gy
                    + v[base + 1] * fx * gy
                    + v[base + nx] * gx * fy
                    + v[base + nx + 1] * fx * fy,
            )
        } else {
            let nxy = nx * self.grid.dims[1];
            let (fx, fy, fz) = (f[0], f[1], f[2]);
            let (gx, gy, gz) = (S::one() - fx, S::one() - fy, S::one() - fz);
            Some(
                (v[base] * gx * gy
                    + v[base + 1] * fx * gy
                    + v[base + nx] * gx * fy
                    + v[base + nx + 1] * fx * fy)
                    * gz
                    + (v[base + nxy] * gx * gy
                        + v[base + nxy + 1] * fx * gy
                        + v[base + nxy + nx] * gx * fy
                        + v[base + nxy + nx + 1] * fx * fy)
                        * fz,
            )
        }
    }

    /// Field value at an interior point of the domain.
    pub fn evaluate(&self, x: &Point<S>) -> Result<S, SolverError> {
        if !self.domain.contains(x) {
            return Err(SolverError::Geometry(GeometryError::OutsideDomain(x.fmt_coords())));
        }
        self.interp_raw(x).ok_or_else(|| {
            SolverError::Guard(format!("point {} escapes the solver grid", x.fmt_coords()))
        })
    }

    /// Recompute one full sweep without mutating the field and report the
    /// sup-norm change; by the stopping rule it is at most 2·tol.
    pub fn residual_check(&self) -> S {
        let mut scratch = self.values.clone();
        sweep(&self.values, &mut scratch, &self.runs, &self.moves)
    }

    /// Test hook: nudge one stored node value in place.
    #[cfg(test)]
    pub(crate) fn perturb_node(&mut self, idx: usize, amount: S) {
        self.values[idx] = self.values[idx] + amount;
    }

    /// Test hook: one sweep of this field's dynamic program applied to an
    /// arbitrary value vector (same grid layout); nodes outside the interior
    /// runs pass through unchanged.
    #[cfg(test)]
    pub(crate) fn sweep_once(&self, input: &[S]) -> Vec<S> {
        let mut out = input.to_vec();
        sweep(input, &mut out, &self.runs, &self.moves);
        out
    }

    /// Test hook: interior-run node indices.
    #[cfg(test)]
    pub(crate) fn run_indices(&self) -> Vec<usize> {
        self.runs
            .iter()
            .flat_map(|&(s, l)| s as usize..s as usize + l as usize)
            .collect()
    }

    /// Structured text dump: header lines with `#`, then one
    /// `i j [k] x y [z] class value` row per in-domain node.
    pub fn write_dump(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "# value-field dump")?;
        writeln!(w, "# shape: {}", self.domain.shape_name())?;
        writeln!(w, "# n: {}", self.params.n)?;
        writeln!(w, "# p: {}", self.params.p)?;
        writeln!(w, "# epsilon: {:e}", self.params.epsilon)?;
        writeln!(w, "# kappa: {:e}", self.params.kappa)?;
        writeln!(w, "# alpha: {:e}", self.params.alpha)?;
        writeln!(w, "# h: {:e}", self.grid.h)?;
        writeln!(w, "# origin: {}", self.grid.origin.fmt_row())?;
        if self.grid.dim == 2 {
            writeln!(w, "# dims: {} {}", self.grid.dims[0], self.grid.dims[1])?;
        } else {
            writeln!(w, "# dims: {} {} {}", self.grid.dims[0], self.grid.dims[1], self.grid.dims[2])?;
        }
        writeln!(w, "# tol: {:e}", self.cfg.tol)?;
        writeln!(w, "# sweeps: {}", self.sweeps)?;
        writeln!(w, "# residual: {:e}", self.residual)?;
        writeln!(w, "# error-bound: {:e}", self.error_bound)?;
        if self.grid.dim == 2 {
            writeln!(w, "# columns: i j x y class value")?;
        } else {
            writeln!(w, "# columns: i j k x y z class value")?;
        }
        let nx = self.grid.dims[0];
        let ny = self.grid.dims[1];
        for (idx, (&c, &v)) in self.class.iter().zip(&self.values).enumerate() {
            let tag = match c {
                NodeClass::Exterior => continue,
                NodeClass::Band => "band",
                NodeClass::Interior => "interior",
            };
            let p = self.grid.coord(idx);
            if self.grid.dim == 2 {
                writeln!(w, "{} {} {} {tag} {v:e}", idx % nx, idx / nx, p.fmt_row())?;
            } else {
                let i = idx % nx;
                let j = (idx / nx) % ny;
                let k = idx / (nx * ny);
                writeln!(w, "{i} {j} {k} {} {tag} {v:e}", p.fmt_row())?;
            }
        }
        Ok(())
    }
}

/// Noise displacement points for a move (the set Ā averages over): the two
/// signed orthogonal kicks in 2D, a uniform `q3`-point circle quadrature in
/// 3D, and a single zero kick for the null move.
pub(crate) fn noise_points<S: Real>(
    params: &GameParams<S>,
    v: &Vector<S>,
    q3: usize,
) -> Vec<Vector<S>> {
    if v.norm() == S::zero() {
        return vec![Vector::zero(v.dim())];
    }
    if params.n == 2 {
        let z = v.perp().scaled(params.kappa);
        vec![z.clone(), z.scaled(-S::one())]
    } else {
        let (e1, e2) = v.orthonormal_complement();
        let r = params.kappa * v.norm();
        (0..q3)
            .map(|i| {
                let phi = real::<S>(2.0 * std::f64::consts::PI * i as f64 / q3 as f64);
                e1.scaled(r * phi.cos()).add(&e2.scaled(r * phi.sin()))
            })
            .collect()
    }
}

/// The discrete move set: null move plus magnitudes {ε/2, ε} across the
/// direction set (evenly spaced angles in 2D, normalized lattice directions
/// in 3D).
pub fn move_vectors<S: Real>(params: &GameParams<S>, cfg: &SolveConfig<S>) -> Vec<Vector<S>> {
    let mut out = vec![Vector::zero(params.n)];
    let mags = [params.epsilon * real::<S>(0.5), params.epsilon];
    if params.n == 2 {
        for &mag in &mags {
            for j in 0..cfg.directions_2d {
                let th = 2.0 * std::f64::consts::PI * j as f64 / cfg.directions_2d as f64;
                out.push(Vector::new2(mag * real::<S>(th.cos()), mag * real::<S>(th.sin())));
            }
        }
    } else {
        let mut dirs = Vec::new();
        for i in -1i32..=1 {
            for j in -1i32..=1 {
                for k in -1i32..=1 {
                    if i == 0 && j == 0 && k == 0 {
                        continue;
                    }
                    let d = Vector::new3(
                        real::<S>(i as f64),
                        real::<S>(j as f64),
                        real::<S>(k as f64),
                    );
                    dirs.push(d.scaled(S::one() / d.norm()));
                }
            }
        }
        for &mag in &mags {
            for d in &dirs {
                out.push(d.scaled(mag));
            }
        }
    }
    out
}

fn build_moves<S: Real>(
    params: &GameParams<S>,
    cfg: &SolveConfig<S>,
    grid: &Grid<S>,
) -> Vec<MoveStencil<S>> {
    let nx = grid.dims[0] as i64;
    let nxy = nx * grid.dims[1] as i64;
    let dim = grid.dim;
    let mut stencils = Vec::new();
    for v in move_vectors(params, cfg) {
        let noises = noise_points(params, &v, cfg.noise_points_3d);
        let wq = S::one() / real::<S>(noises.len() as f64);
        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        for z in &noises {
            let d = v.add(z);
            let c = d.coords();
            // Split each displacement into integer cells plus a fraction.
            let mut base = [0i64; 3];
            let mut frac = [S::zero(); 3];
            for a in 0..dim {
                let t = c[a] / grid.h;
                let fl = t.floor();
                base[a] = fl.to_f64().unwrap() as i64;
                frac[a] = t - fl;
            }
            let corners: &[[i64; 3]] = if dim == 2 {
                &[[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]
            } else {
                &[
                    [0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0],
                    [0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1],
                ]
            };
            for corner in corners {
                let mut w = wq;
                for a in 0..dim {
                    w = w * if corner[a] == 1 { frac[a] } else { S::one() - frac[a] };
                }
                let off = (base[0] + corner[0])
                    + (base[1] + corner[1]) * nx
                    + if dim == 3 { (base[2] + corner[2]) * nxy } else { 0 };
                if w != S::zero() {
                    offsets.push(off);
                    weights.push(w);
                }
            }
        }
        stencils.push(MoveStencil { v, offsets, weights });
    }
    stencils
}

/// One two-buffer sweep: update every interior node in `new` from `old` and
/// return the sup-norm change. Rows of consecutive interior nodes are
/// processed as slices so stencil taps are contiguous loads.
fn sweep<S: Real>(
    old: &[S],
    new: &mut [S],
    runs: &[(u32, u32)],
    moves: &[MoveStencil<S>],
) -> S {
    let mut res = S::zero();
    let max_len = runs.iter().map(|r| r.1 as usize).max().unwrap_or(0);
    let mut acc = vec![S::zero(); max_len];
    let mut hi = vec![S::zero(); max_len];
    let mut lo = vec![S::zero(); max_len];
    for &(start, len) in runs {
        let start = start as usize;
        let len = len as usize;
        let hi = &mut hi[..len];
        let lo = &mut lo[..len];
        let mut first = true;
        for st in moves {
            let acc = &mut acc[..len];
            acc.fill(S::zero());
            for (&off, &w) in st.offsets.iter().zip(&st.weights) {
                let src = &old[(start as i64 + off) as usize..][..len];
                for (a, &s) in acc.iter_mut().zip(src) {
                    *a = *a + w * s;
                }
            }
            if first {
                hi.copy_from_slice(acc);
                lo.copy_from_slice(acc);
                first = false;
            } else {
                for ((h, l), &a) in hi.iter_mut().zip(lo.iter_mut()).zip(acc.iter()) {
                    if a > *h {
                        *h = a;
                    }
                    if a < *l {
                        *l = a;
                    }
                }
            }
        }
        let half = real::<S>(0.5);
        for ((dst, (&h, &l)), &prev) in new[start..start + len]
            .iter_mut()
            .zip(hi.iter().zip(lo.iter()))
            .zip(&old[start..start + len])
        {
            let val = half * (h + l);
            let d = (val - prev).abs();
            if d > res {
                res = d;
            }
            *dst = val;
        }
    }
    res
}

/// Solve the normal-equation system of the Anderson mixer: coefficients γ
/// minimizing ‖r_k − ΔR·γ‖₂ with a small ridge for rank safety.
fn anderson_gamma<S: Real>(dr: &[Vec<S>], rk: &[S]) -> Option<Vec<f64>> {
    let m = dr.len();
    let mut a = vec![0.0f64; m * m];
    let mut b = vec![0.0f64; m];
    for i in 0..m {
        for j in i..m {
            let mut s = 0.0;
            for (x, y) in dr[i].iter().zip(&dr[j]) {
                s += x.f64() * y.f64();
            }
            a[i * m + j] = s;
            a[j * m + i] = s;
        }
        let mut s = 0.0;
        for (x, y) in dr[i].iter().zip(rk) {
            s += x.f64() * y.f64();
        }
        b[i] = s;
    }
    let ridge = (0..m).map(|i| a[i * m + i]).sum::<f64>() / m as f64 * 1e-12 + 1e-300;
    for i in 0..m {
        a[i * m + i] += ridge;
    }
    // Gaussian elimination with partial pivoting on the m×m system.
    for col in 0..m {
        let mut piv = col;
        for r in col + 1..m {
            if a[r * m + col].abs() > a[piv * m + col].abs() {
                piv = r;
            }
        }
        if a[piv * m + col] == 0.0 {
            return None;
        }
        if piv != col {
            for c in 0..m {
                a.swap(col * m + c, piv * m + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * m + col];
        for r in col + 1..m {
            let f = a[r * m + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..m {
                a[r * m + c] -= f * a[col * m + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut g = vec![0.0f64; m];
    for col in (0..m).rev() {
        let mut s = b[col];
        for c in col + 1..m {
            s -= a[col * m + c] * g[c];
        }
        g[col] = s / a[col * m + col];
        if !g[col].is_finite() {
            return None;
        }
    }
    Some(g)
}

/// Domains on which the solver's value is meaningful for the requested
/// exponent: either p > n (isolated boundary points carry mass) or the
/// domain has no punctures at all.
fn regularity_guard<S: Real>(domain: &Domain<S>, params: &GameParams<S>) -> Result<(), SolverError> {
    if params.p > real::<S>(params.n as f64) {
        return Ok(());
    }
    let ok = matches!(
        domain.shape(),
        Shape::Ball { .. } | Shape::Annulus { .. } | Shape::Polygon { .. } | Shape::SlitBall { .. }
    );
    if ok {
        Ok(())
    } else {
        Err(SolverError::Guard(format!(
            "exponent p = {} with dimension n = {} cannot see isolated boundary points; \
             a domain with punctures has no continuous solution attaining them",
            params.p, params.n,
        )))
    }
}

pub fn solve<S: Real>(
    domain: &Domain<S>,
    payoff: &BoundaryFunction<S>,
    params: &GameParams<S>,
    cfg: &SolveConfig<S>,
) -> Result<ValueField<S>, SolverError> {
    solve_warm(domain, payoff, params, cfg, None)
}

/// Solve with an optional warm start: where the initial guess field covers a
/// node, its interpolated value seeds the iteration (band, exterior, and
/// uncovered nodes are always rebuilt from the payoff).
pub fn solve_warm<S: Real>(
    domain: &Domain<S>,
    payoff: &BoundaryFunction<S>,
    params: &GameParams<S>,
    cfg: &SolveConfig<S>,
    init: Option<&ValueField<S>>,
) -> Result<ValueField<S>, SolverError> {
    cfg.validate()?;
    solve_impl(domain, payoff, params, cfg, init)
}

/// Steering-quality solve: identical to [`solve`] except that grid divisors
/// down to 1 are allowed, so the grid can be up to 16× smaller than the
/// accuracy contract permits. The returned field carries no accuracy claim —
/// it exists to guide Monte Carlo strategies when the full grid does not fit
/// the node budget — but it is solved at the game's own step scale, so its
/// band structure matches the game the strategies actually play.
pub(crate) fn solve_guide<S: Real>(
    domain: &Domain<S>,
    payoff: &BoundaryFunction<S>,
    params: &GameParams<S>,
    cfg: &SolveConfig<S>,
) -> Result<ValueField<S>, SolverError> {
    if cfg.grid_divisor == 0 {
        return Err(SolverError::BadConfig("grid divisor must be positive".into()));
    }
    let mut checked = *cfg;
    checked.grid_divisor = cfg.grid_divisor.max(4);
    checked.validate()?;
    solve_impl(domain, payoff, params, cfg, None)
}

/// Shared solve body; `cfg` is taken as already validated so that cascade
/// scaffolding levels may use divisors below 4.
fn solve_impl<S: Real>(
    domain: &Domain<S>,
    payoff: &BoundaryFunction<S>,
    params: &GameParams<S>,
    cfg: &SolveConfig<S>,
    init: Option<&ValueField<S>>,
) -> Result<ValueField<S>, SolverError> {
    payoff.validate(domain.dim())?;
    if !payoff.is_continuous() {
        return Err(SolverError::Guard(
            "the grid solver requires continuous boundary data; pointwise overrides are \
             invisible to it and would be silently dropped"
                .into(),
        ));
    }
    if params.n != domain.dim() {
        return Err(SolverError::Guard(format!(
            "game dimension {} does not match domain dimension {}",
            params.n,
            domain.dim()
        )));
    }
    regularity_guard(domain, params)?;
    if params.epsilon >= domain.bounding_radius() {
        return Err(SolverError::Guard(format!(
            "step scale {} is not small relative to the domain (bounding radius {})",
            params.epsilon,
            domain.bounding_radius(),
        )));
    }

    let band = params.band_width();
    let h = params.epsilon / real::<S>(cfg.grid_divisor as f64);
    let (lo, hi) = domain.bounding_box();
    let pad = (band / h).ceil().to_f64().unwrap() as usize + 2;
    let mut dims = [1usize; 3];
    for a in 0..domain.dim() {
        let span = (hi.coords()[a] - lo.coords()[a]) / h;
        dims[a] = span.ceil().to_f64().unwrap() as usize + 1 + 2 * pad;
    }
    let mut oc = [S::zero(); 3];
    for a in 0..domain.dim() {
        oc[a] = lo.coords()[a] - h * real::<S>(pad as f64);
    }
    let origin = if domain.dim() == 2 {
        Point::new2(oc[0], oc[1])
    } else {
        Point::new3(oc[0], oc[1], oc[2])
    };
    let grid = Grid { origin, h, dims, dim: domain.dim() };
    let nodes = grid.node_count();
    if nodes > cfg.max_nodes {
        return Err(SolverError::GridTooLarge { nodes, max_nodes: cfg.max_nodes });
    }

    // Classify nodes and set initial/fixed values.
    let mut values = vec![S::zero(); nodes];
    let mut class = vec![NodeClass::Exterior; nodes];
    for idx in 0..nodes {
        let x = grid.coord(idx);
        if !domain.contains(&x) {
            let (witness, _) = domain.nearest_boundary(&x);
            values[idx] = payoff.eval_unchecked(&witness);
            continue;
        }
        let dist = domain.boundary_distance_unchecked(&x);
        if dist <= band {
            class[idx] = NodeClass::Band;
            let cands = domain.boundary_candidates(&x, band, cfg.band_samples);
            debug_assert!(!cands.is_empty());
            let mut hi = S::neg_infinity();
            let mut lo = S::infinity();
            for c in &cands {
                let f = payoff.eval_unchecked(c);
                hi = hi.max(f);
                lo = lo.min(f);
            }
            values[idx] = real::<S>(0.5) * (hi + lo);
        } else {
            class[idx] = NodeClass::Interior;
            values[idx] = match init.and_then(|f| f.interp_raw(&x)) {
                Some(v) => v,
                None => payoff.eval_unchecked(&domain.nearest_boundary(&x).0),
            };
        }
    }

    // Runs of consecutive interior nodes within each grid row.
    let nx = grid.dims[0];
    let mut runs: Vec<(u32, u32)> = Vec::new();
    let mut idx = 0usize;
    while idx < nodes {
        if class[idx] != NodeClass::Interior {
            idx += 1;
            continue;
        }
        let start = idx;
        let row = start / nx;
        let mut end = start;
        while end < nodes && end / nx == row && class[end] == NodeClass::Interior {
            end += 1;
        }
        runs.push((start as u32, (end - start) as u32));
        idx = end;
    }

    let moves = build_moves(params, cfg, &grid);
    // Safety margin: every stencil tap from every interior node must stay in
    // bounds. The band (width αε ≥ reach ε(1+κ)) plus padding guarantees it;
    // verify once so sweeps can trust plain slice indexing.
    let min_off = moves.iter().flat_map(|m| m.offsets.iter()).copied().min().unwrap_or(0);
    let max_off = moves.iter().flat_map(|m| m.offsets.iter()).copied().max().unwrap_or(0);
    for &(start, len) in &runs {
        let a = start as i64;
        let b = start as i64 + len as i64 - 1;
        if a + min_off < 0 || b + max_off >= nodes as i64 {
            return Err(SolverError::Guard(
                "internal: stencil reach exceeds grid padding".into(),
            ));
        }
    }

    // Iterate: plain sweeps + safeguarded Anderson mixing, with an
    // error-targeted stop (residual/(1−ρ̂) ≤ tol, ρ̂ from plain-sweep tails).
    let mut u = values;
    let mut g = u.clone();
    let mut sweeps = 0usize;
    let mut history: VecDeque<(Vec<S>, Vec<S>)> = VecDeque::new(); // (g_k, r_k)
    let mut res_prev = S::infinity();
    let mut aa_last = false;
    let mut stop_target = cfg.tol;
    let (residual, error_bound, rho) = loop {
        if sweeps >= cfg.max_sweeps {
            let res = res_prev;
            return Err(SolverError::NonConvergence {
                residual: res.f64(),
                target: stop_target.f64(),
                sweeps,
            });
        }
        let res = sweep(&u, &mut g, &runs, &moves);
        sweeps += 1;
        if !res.is_finite() {
            return Err(SolverError::NonConvergence {
                residual: f64::NAN,
                target: stop_target.f64(),
                sweeps,
            });
        }

        if res <= stop_target {
            // Probe phase: run plain sweeps until the fast transients die and
            // read the contraction factor off the ratio tail. The sweep
            // budget grows with the work done so far because slow modes take
            // longer to dominate on large grids.
            let probe_len = (sweeps / 8).clamp(8, 48);
            let mut res_tail = res;
            let mut ratios = Vec::with_capacity(probe_len);
            for _ in 0..probe_len {
                std::mem::swap(&mut u, &mut g);
                let r2 = sweep(&u, &mut g, &runs, &moves);
                sweeps += 1;
                if res_tail > S::zero() {
                    ratios.push((r2 / res_tail).f64());
                }
                res_tail = r2;
                if res_tail == S::zero() {
                    break;
                }
            }
            let rho_hat = ratios[ratios.len() / 2..]
                .iter()
                .copied()
                .fold(0.0f64, f64::max)
                .clamp(0.0, 1.0 - 1e-9);
            let rho = real::<S>(rho_hat);
            // The tail can only underestimate how slow the slowest surviving
            // mode is, so budget a 4× margin on the measured spectral gap.
            let gap = (S::one() - rho) * real::<S>(0.25);
            let bound = res_tail / gap;
            let floor = S::epsilon() * real::<S>(1e3);
            if bound <= cfg.tol || res_tail <= floor {
                break (res_tail, bound, rho);
            }
            stop_target = (cfg.tol * gap).max(res_tail * real::<S>(0.25)).max(floor);
            history.clear();
            res_prev = res_tail;
            aa_last = false;
            std::mem::swap(&mut u, &mut g);
            continue;
        }

        if aa_last && res > res_prev {
            // The accelerated step regressed: drop the window and fall back
            // to the plain sweep from here.
            history.clear();
        }
        let r: Vec<S> = g.iter().zip(&u).map(|(a, b)| *a - *b).collect();
        history.push_back((g.clone(), r));
        if history.len() > cfg.anderson_depth + 1 {
            history.pop_front();
        }
        if cfg.anderson_depth > 0 && history.len() >= 2 {
            let m = history.len() - 1;
            let rk = &history[m].1;
            let dr: Vec<Vec<S>> = (0..m)
                .map(|i| {
                    history[i + 1]
                        .1
                        .iter()
                        .zip(&history[i].1)
                        .map(|(a, b)| *a - *b)
                        .collect()
                })
                .collect();
            match anderson_gamma(&dr, rk) {
                Some(gamma) => {
                    // u_{k+1} = g_k − Σ γ_j (g_{j+1} − g_j)
                    std::mem::swap(&mut u, &mut g);
                    for (j, &gj) in gamma.iter().enumerate() {
                        if gj == 0.0 {
                            continue;
                        }
                        let w = real::<S>(gj);
                        let (ga, gb) = (&history[j].0, &history[j + 1].0);
                        for ((t, a), b) in u.iter_mut().zip(ga).zip(gb) {
                            *t = *t - w * (*b - *a);
                        }
                    }
                    aa_last = true;
                }
                None => {
                    std::mem::swap(&mut u, &mut g);
                    aa_last = false;
                }
            }
        } else {
            std::mem::swap(&mut u, &mut g);
            aa_last = false;
        }
        res_prev = res;
    };

    // The in-progress buffer g holds T(u) from the final probe sweep; keep it
    // (one extra contraction) as the returned field.
    let final_values = g;
    if final_values.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonConvergence {
            residual: f64::NAN,
            target: cfg.tol.f64(),
            sweeps,
        });
    }

    Ok(ValueField {
        domain: domain.clone(),
        payoff: payoff.clone(),
        params: *params,
        cfg: *cfg,
        grid,
        values: final_values,
        class,
        moves,
        runs,
        residual,
        error_bound,
        rho,
        sweeps,
    })
}

/// Coarse-to-fine cascade: solve with progressively finer grids (given as
/// divisors of ε), warm-starting each level from the previous one. The final
/// level uses `cfg.grid_divisor`. Intermediate levels may use h > ε/4; only
/// the returned field honors the h ≤ ε/4 contract.
pub fn solve_cascade<S: Real>(
    domain: &Domain<S>,
    payoff: &BoundaryFunction<S>,
    params: &GameParams<S>,
    cfg: &SolveConfig<S>,
    coarse_divisors: &[usize],
) -> Result<ValueField<S>, SolverError> {
    let mut field: Option<ValueField<S>> = None;
    for &d in coarse_divisors {
        let mut level_cfg = *cfg;
        level_cfg.grid_divisor = d.max(1);
        level_cfg.tol = (cfg.tol * real::<S>(4.0)).min(real::<S>(1e-3)).max(cfg.tol);
        // Coarse scaffolding levels skip the h ≤ ε/4 validation on purpose;
        // everything else is checked as usual.
        {
            let mut check = level_cfg;
            check.grid_divisor = check.grid_divisor.max(4);
            check.validate()?;
        }
        field = Some(solve_impl(domain, payoff, params, &level_cfg, field.as_ref())?);
    }
    solve_warm(domain, payoff, params, cfg, field.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundarySet;
    use crate::oracles;

    type P = Point<f64>;
    type BF = BoundaryFunction<f64>;

    fn disk() -> Domain<f64> {
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
    fn linear_payoff_is_a_near_fixed_point() {
        // For f(y) = y₁ with p = 2 the true extension is u(x) = x₁, and the
        // discrete dynamic program reproduces it up to the band rule's
        // O((αε)²) curvature error.
        let d = disk();
        let f = BF::LinearCoordinate { axis: 0 };
        let params = GameParams::new(2, 2.0, 0.1).unwrap();
        let cfg = SolveConfig::default().with_tol(1e-7);
        let field = solve(&d, &f, &params, &cfg).unwrap();
        let band = params.band_width();
        for &(x, y) in &[(0.0, 0.0), (0.3, 0.4), (-0.5, 0.1), (0.0, -0.6)] {
            let v = field.evaluate(&P::new2(x, y)).unwrap();
            // The termination rule distorts values by O(αε) inside the band
            // and the distortion decays toward the center, so 2αε is the
            // honest uniform bound at interior probes.
            assert!(
                (v - x).abs() <= 2.0 * band,
                "|u({x},{y}) − {x}| = {} exceeds 2αε = {}",
                (v - x).abs(),
                2.0 * band
            );
        }
        // At the center the band distortion cancels by symmetry.
        let center = field.evaluate(&P::new2(0.0, 0.0)).unwrap();
        assert!(center.abs() < 0.02, "u(0,0) = {center} should nearly vanish");
        assert!(field.residual_check() <= 2.0 * cfg.tol);
    }

    #[test]
    fn punctured_disk_value_approaches_the_closed_form() {
        // p = 4 > n = 2: the puncture carries mass and the game value at
        // radius 0.5 converges to 1 − 0.5^(2/3) from above as ε shrinks.
        let d = punctured_disk();
        let f = BF::tent(BoundarySet::Point(P::new2(0.0, 0.0)), 0.1).unwrap();
        let params = GameParams::new(2, 4.0, 0.04).unwrap();
        let cfg = SolveConfig::default().with_tol(1e-4);
        let field = solve(&d, &f, &params, &cfg).unwrap();
        let oracle = oracles::punctured_ball_value(2, 4.0, 0.5, 1.0).unwrap();
        let got = field.evaluate(&P::new2(0.5, 0.0)).unwrap();
        let err = got - oracle;
        assert!(
            err > -0.01 && err < 0.09,
            "discrete-game error at ε=0.04 should be a small positive bias, got {err} \
             (value {got}, oracle {oracle})"
        );
        assert!(field.residual_check() <= 2.0 * cfg.tol, "residual recheck");
    }

    #[test]
    fn guards_reject_bad_inputs() {
        let d = punctured_disk();
        let tent = BF::tent(BoundarySet::Point(P::new2(0.0, 0.0)), 0.1).unwrap();
        // p ≤ n on a punctured domain is meaningless.
        let p2 = GameParams::new(2, 2.0, 0.05).unwrap();
        assert!(matches!(
            solve(&d, &tent, &p2, &SolveConfig::default()),
            Err(SolverError::Guard(_))
        ));
        // Discontinuous payoffs are for direct play only.
        let p4 = GameParams::new(2, 4.0, 0.05).unwrap();
        let over = BF::Constant(0.0).with_overrides(vec![(P::new2(0.0, 0.0), 1.0)]);
        assert!(matches!(
            solve(&d, &over, &p4, &SolveConfig::default()),
            Err(SolverError::Guard(_))
        ));
        // Node budget.
        let mut small = SolveConfig::default();
        small.max_nodes = 100;
        assert!(matches!(
            solve(&disk(), &BF::Constant(1.0), &p4, &small),
            Err(SolverError::GridTooLarge { .. })
        ));
        // Divisor below 4 violates h ≤ ε/4.
        let mut coarse = SolveConfig::default();
        coarse.grid_divisor = 2;
        assert!(matches!(
            solve(&disk(), &BF::Constant(1.0), &p4, &coarse),
            Err(SolverError::BadConfig(_))
        ));
    }

    #[test]
    fn sweep_cap_reports_nonconvergence() {
        let d = disk();
        let f = BF::LinearCoordinate { axis: 0 };
        let params = GameParams::new(2, 2.0, 0.1).unwrap();
        let mut cfg = SolveConfig::default();
        cfg.max_sweeps = 3;
        match solve(&d, &f, &params, &cfg) {
            Err(SolverError::NonConvergence { residual, sweeps, .. }) => {
                assert_eq!(sweeps, 3);
                assert!(residual.is_finite() && residual > 0.0);
            }
            other => panic!("expected NonConvergence, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn solves_are_bitwise_deterministic() {
        let d = punctured_disk();
        let f = BF::tent(BoundarySet::Point(P::new2(0.0, 0.0)), 0.2).unwrap();
        let params = GameParams::new(2, 4.0, 0.1).unwrap();
        let cfg = SolveConfig::default().with_tol(1e-5);
        let a = solve(&d, &f, &params, &cfg).unwrap();
        let b = solve(&d, &f, &params, &cfg).unwrap();
        assert_eq!(a.sweeps(), b.sweeps());
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(x, y, "solver must be bitwise reproducible");
        }
    }

    #[test]
    fn constant_payoff_is_exact_and_monotone_under_data_growth() {
        let d = disk();
        let params = GameParams::new(2, 3.0, 0.1).unwrap();
        let cfg = SolveConfig::default();
        let lo = solve(&d, &BF::Constant(0.0), &params, &cfg).unwrap();
        let hi = solve(&d, &BF::Constant(1.0), &params, &cfg).unwrap();
        for (a, b) in lo.values().iter().zip(hi.values()) {
            assert!(a <= b, "monotone in the boundary data");
        }
        assert!((hi.evaluate(&P::new2(0.2, 0.2)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stopping_rule_honors_the_error_target() {
        // Solve once to near machine precision as a reference fixed point,
        // then check that a loose-tolerance solve really lands within tol.
        let d = punctured_disk();
        let f = BF::tent(BoundarySet::Point(P::new2(0.0, 0.0)), 0.2).unwrap();
        let params = GameParams::new(2, 4.0, 0.1).unwrap();
        let tight = solve(&d, &f, &params, &SolveConfig::default().with_tol(1e-11)).unwrap();
        for tol in [1e-4, 1e-6] {
            let loose = solve(&d, &f, &params, &SolveConfig::default().with_tol(tol)).unwrap();
            let mut worst = 0.0f64;
            for (a, b) in loose.values().iter().zip(tight.values()) {
                worst = worst.max((a - b).abs());
            }
            assert!(
                worst <= tol,
                "tol {tol}: distance to the fixed point {worst:e} exceeds the target"
            );
        }
    }

    #[test]
    fn warm_start_and_cascade_agree_with_direct_solve() {
        let d = punctured_disk();
        let f = BF::tent(BoundarySet::Point(P::new2(0.0, 0.0)), 0.2).unwrap();
        let params = GameParams::new(2, 4.0, 0.08).unwrap();
        let cfg = SolveConfig::default().with_tol(1e-6);
        let direct = solve(&d, &f, &params, &cfg).unwrap();
        let cascaded = solve_cascade(&d, &f, &params, &cfg, &[1, 2]).unwrap();
        let probe = P::new2(0.5, 0.1);
        let a = direct.evaluate(&probe).unwrap();
        let b = cascaded.evaluate(&probe).unwrap();
        assert!(
            (a - b).abs() <= 2.0 * cfg.tol,
            "cascade must land on the same fixed point: {a} vs {b}"
        );
    }

    #[test]
    fn dump_has_headers_and_parsable_rows() {
        let d = disk();
        let f = BF::Constant(1.0);
        let params = GameParams::new(2, 2.0, 0.2).unwrap();
        let field = solve(&d, &f, &params, &SolveConfig::default()).unwrap();
        let mut buf = Vec::new();
        field.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# value-field dump"));
        assert!(text.contains("# shape: ball"));
        assert!(text.contains("# columns: i j x y class value"));
        let row = text.lines().find(|l| !l.starts_with('#')).unwrap();
        let parts: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(parts.len(), 6);
        let _: usize = parts[0].parse().unwrap();
        let _: f64 = parts[2].parse().unwrap();
        let v: f64 = parts[5].parse().unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn guide_solves_allow_coarse_grids() {
        let d = disk();
        let f = BF::LinearCoordinate { axis: 0 };
        let params = GameParams::new(2, 2.0, 0.1).unwrap();
        let mut cfg = SolveConfig::default().with_tol(1e-5);
        cfg.grid_divisor = 1;
        let guide = solve_guide(&d, &f, &params, &cfg).unwrap();
        // Steering quality only, but a coarse grid still lands near the
        // harmonic extension u(x) = x₁ away from the band.
        let v = guide.evaluate(&P::new2(0.3, 0.0)).unwrap();
        assert!((v - 0.3).abs() < 0.15, "guide value {v}");
        // The strict entry point refuses the same config, and a zero divisor
        // is refused everywhere.
        assert!(matches!(solve(&d, &f, &params, &cfg), Err(SolverError::BadConfig(_))));
        cfg.grid_divisor = 0;
        assert!(solve_guide(&d, &f, &params, &cfg).is_err());
    }

    #[test]
    fn point_perturbation_is_visible_to_the_residual_recheck() {
        // The recursion averages a single-node nudge with weight at most
        // one half, so the recheck must see at least half of it.
        let d = disk();
        let f = BF::LinearCoordinate { axis: 0 };
        let params = GameParams::new(2, 2.0, 0.2).unwrap();
        let cfg = SolveConfig::default().with_tol(1e-9);
        let mut field = solve(&d, &f, &params, &cfg).unwrap();
        assert!(field.residual_check() <= 2.0 * cfg.tol);
        let idx = field.run_indices()[die_roll(&field)];
        field.perturb_node(idx, 1e-3);
        let res = field.residual_check();
        assert!(
            res >= 5e-4 * 0.999,
            "a 1e-3 nudge must leave a residual of at least half its size, got {res:e}"
        );
    }

    /// Deterministic "random" pick of an interior run node.
    fn die_roll(field: &ValueField<f64>) -> usize {
        field.run_indices().len() / 3
    }

    #[test]
    fn one_sweep_is_nonexpansive_in_sup_norm() {
        use rand::{Rng, SeedableRng};
        let d = disk();
        let f = BF::LinearCoordinate { axis: 0 };
        let params = GameParams::new(2, 2.0, 0.2).unwrap();
        let field = solve(&d, &f, &params, &SolveConfig::default()).unwrap();
        let u: Vec<f64> = field.values().to_vec();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for round in 0..5 {
            // Two arbitrary value vectors within the payoff's range.
            let w: Vec<f64> = u.iter().map(|v| v + rng.gen_range(-0.3..0.3)).collect();
            let z: Vec<f64> = u.iter().map(|v| v + rng.gen_range(-0.3..0.3)).collect();
            let dist = w
                .iter()
                .zip(&z)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            let sw = field.sweep_once(&w);
            let sz = field.sweep_once(&z);
            let after = sw
                .iter()
                .zip(&sz)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(
                after <= dist * (1.0 + 1e-12),
                "round {round}: sweep expanded the pair, {after:e} > {dist:e}"
            );
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(6))]
        #[test]
        fn random_payoffs_solve_monotone_and_bounded(
            c in -0.5f64..0.5,
            angle in 0.0f64..6.28,
            delta in 0.15f64..0.5,
        ) {
            // f ≤ g pointwise on the boundary forces solve(f) ≤ solve(g)
            // nodewise up to 2·tol, and both stay inside the data's range.
            let d = disk();
            let params = GameParams::new(2, 3.0, 0.2).unwrap();
            let cfg = SolveConfig::default().with_tol(1e-7);
            let f = BF::Sum(vec![
                BF::Constant(c),
                BF::LinearCoordinate { axis: 0 },
            ]);
            let bump = BF::tent(
                BoundarySet::Point(P::new2(angle.cos(), angle.sin())),
                delta,
            )
            .unwrap();
            let g = BF::Sum(vec![f.clone(), bump]);
            let lo = solve(&d, &f, &params, &cfg).unwrap();
            let hi = solve(&d, &g, &params, &cfg).unwrap();
            let slack = 2.0 * cfg.tol;
            for (&a, &b) in lo.values().iter().zip(hi.values()) {
                proptest::prop_assert!(a <= b + slack, "monotonicity broke: {a} > {b}");
            }
            // Range of f on the circle: [c − 1, c + 1]; the tent adds up to
            // one more on top for g.
            for &idx in &lo.run_indices() {
                let v = lo.values()[idx];
                proptest::prop_assert!(v >= c - 1.0 - 1e-9 && v <= c + 1.0 + 1e-9);
                let w = hi.values()[idx];
                proptest::prop_assert!(w >= c - 1.0 - 1e-9 && w <= c + 2.0 + 1e-9);
            }
        }
    }

    #[test]
    fn f32_grids_solve_to_coarser_tolerances() {
        let d = Domain::<f32>::new(Shape::Ball {
            center: Point::new2(0.0f32, 0.0),
            radius: 1.0,
        })
        .unwrap();
        let f = BoundaryFunction::<f32>::LinearCoordinate { axis: 0 };
        let params = GameParams::new(2, 2.0f32, 0.2f32).unwrap();
        let cfg = SolveConfig::<f32>::default().with_tol(1e-3);
        let field = solve(&d, &f, &params, &cfg).unwrap();
        let v = field.evaluate(&Point::new2(0.25f32, 0.0)).unwrap();
        assert!((v - 0.25).abs() < 0.1, "got {v}");
    }
}
