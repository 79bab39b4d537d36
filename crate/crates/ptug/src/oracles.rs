//! Closed-form reference solutions used to check the solver and estimators.
//!
//! Radial p-harmonic functions in n dimensions solve the ODE
//! (r^{n−1} |u′|^{p−2} u′)′ = 0, whose solutions are A + B·r^β with
//! β = (p−n)/(p−1) when p ≠ n, and A + B·ln r when p = n. These give exact
//! values on balls with a boundary puncture and on annuli. For p = 2 on the
//! unit disk the Poisson integral provides an oracle for arbitrary
//! continuous boundary data.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("closed form requires p > n (isolated boundary points carry no mass otherwise); got p = {p}, n = {n}")]
    PunctureMassless { p: f64, n: usize },
    #[error("invalid oracle input: {0}")]
    Invalid(String),
}

/// Radial exponent β = (p−n)/(p−1) of the power-form solution.
pub fn radial_exponent(n: usize, p: f64) -> f64 {
    (p - n as f64) / (p - 1.0)
}

/// Value at radius `r` of the p-harmonic function on the punctured ball
/// B_R(0) \ {0} with value 1 at the puncture and 0 on the outer sphere:
/// u(r) = 1 − (r/R)^β. Requires p > n, else the puncture is invisible.
pub fn punctured_ball_value(n: usize, p: f64, r: f64, radius: f64) -> Result<f64, OracleError> {
    if !(p > n as f64) {
        return Err(OracleError::PunctureMassless { p, n });
    }
    if !(radius > 0.0) || !(r > 0.0) || r > radius {
        return Err(OracleError::Invalid(format!(
            "need 0 < r <= R, got r = {r}, R = {radius}"
        )));
    }
    Ok(1.0 - (r / radius).powf(radial_exponent(n, p)))
}

/// Value at radius `r` of the radial p-harmonic function on the annulus
/// r_in < |x| < r_out with boundary values v_in and v_out.
pub fn annulus_value(
    n: usize,
    p: f64,
    r: f64,
    r_in: f64,
    r_out: f64,
    v_in: f64,
    v_out: f64,
) -> Result<f64, OracleError> {
    if !(0.0 < r_in && r_in < r_out) || r < r_in || r > r_out {
        return Err(OracleError::Invalid(format!(
            "need 0 < r_in <= r <= r_out, got {r_in}, {r}, {r_out}"
        )));
    }
    if !(p > 1.0) {
        return Err(OracleError::Invalid(format!("need p > 1, got {p}")));
    }
    let t = if (p - n as f64).abs() < 1e-12 {
        // Conformal case: logarithmic profile.
        (r.ln() - r_in.ln()) / (r_out.ln() - r_in.ln())
    } else {
        let beta = radial_exponent(n, p);
        (r.powf(beta) - r_in.powf(beta)) / (r_out.powf(beta) - r_in.powf(beta))
    };
    Ok(v_in + (v_out - v_in) * t)
}

/// Centered O(h²) finite-difference residual of the radial p-harmonic ODE
/// (r^{n−1} |u′|^{p−2} u′)′ at `r` for a candidate profile `u`.
pub fn radial_ode_residual(n: usize, p: f64, u: &dyn Fn(f64) -> f64, r: f64, h: f64) -> f64 {
    let flux = |s: f64| -> f64 {
        let du = (u(s + 0.5 * h) - u(s - 0.5 * h)) / h;
        s.powi(n as i32 - 1) * du.abs().powf(p - 2.0) * du
    };
    (flux(r + 0.5 * h) - flux(r - 0.5 * h)) / h
}

/// Harmonic (p = 2) extension of boundary data on the unit disk, evaluated by
/// the Poisson integral with `m`-node midpoint quadrature.
pub fn p2_disk_value(g: &dyn Fn(f64) -> f64, x: f64, y: f64, m: usize) -> Result<f64, OracleError> {
    let rho2 = x * x + y * y;
    if rho2 >= 1.0 {
        return Err(OracleError::Invalid(format!(
            "Poisson integral needs an interior point of the unit disk, got ({x}, {y})"
        )));
    }
    if m == 0 {
        return Err(OracleError::Invalid("quadrature needs at least one node".into()));
    }
    let mut acc = 0.0;
    for k in 0..m {
        let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
        let (ct, st) = (theta.cos(), theta.sin());
        let d2 = (x - ct) * (x - ct) + (y - st) * (y - st);
        acc += g(theta) * (1.0 - rho2) / d2;
    }
    Ok(acc / m as f64)
}

/// Default quadrature size for [`p2_disk_value`].
pub const P2_NODES: usize = 4096;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn punctured_disk_reference_point() {
        // p = 4, n = 2 at half radius: β = 2/3 and u = 1 − 0.5^(2/3).
        let v = punctured_ball_value(2, 4.0, 0.5, 1.0).unwrap();
        assert!((v - 0.3700394750525634).abs() < 1e-15);
        // Endpoints.
        assert!((punctured_ball_value(2, 4.0, 1.0, 1.0).unwrap()).abs() < 1e-15);
        assert!(punctured_ball_value(2, 4.0, 1e-9, 1.0).unwrap() > 0.99);
        // The closed form refuses p ≤ n.
        assert!(matches!(
            punctured_ball_value(2, 2.0, 0.5, 1.0),
            Err(OracleError::PunctureMassless { .. })
        ));
        assert!(punctured_ball_value(3, 3.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn annulus_limits_to_the_punctured_ball() {
        let direct = punctured_ball_value(2, 4.0, 0.5, 1.0).unwrap();
        let via_annulus = annulus_value(2, 4.0, 0.5, 1e-12, 1.0, 1.0, 0.0).unwrap();
        assert!((direct - via_annulus).abs() < 1e-7);
        // Boundary interpolation is exact.
        assert!((annulus_value(2, 4.0, 0.25, 0.25, 1.0, 3.0, 7.0).unwrap() - 3.0).abs() < 1e-12);
        assert!((annulus_value(2, 4.0, 1.0, 0.25, 1.0, 3.0, 7.0).unwrap() - 7.0).abs() < 1e-12);
        // Conformal case p = n uses the log profile: midpoint in log scale.
        let mid = (0.25f64.ln() * 0.5).exp();
        let v = annulus_value(2, 2.0, mid, 0.25, 1.0, 0.0, 1.0).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ode_residual_vanishes_only_for_true_profiles() {
        let h = 1e-4;
        // Power profile at p = 4, n = 2.
        let beta = radial_exponent(2, 4.0);
        let u_true = move |r: f64| r.powf(beta);
        let res_true = radial_ode_residual(2, 4.0, &u_true, 0.5, h).abs();
        assert!(res_true < 1e-5, "true-profile residual {res_true}");
        let u_off = move |r: f64| r.powf(beta + 0.1);
        let res_off = radial_ode_residual(2, 4.0, &u_off, 0.5, h).abs();
        assert!(
            res_off > 10.0 * res_true.max(1e-9),
            "perturbed profile must be visibly non-solving: {res_off} vs {res_true}"
        );
        // Log profile at p = n = 2.
        let u_log = |r: f64| r.ln();
        assert!(radial_ode_residual(2, 2.0, &u_log, 0.5, h).abs() < 1e-5);
        // 3D power profile at p = 4: β = 1/3.
        let b3 = radial_exponent(3, 4.0);
        let u3 = move |r: f64| 2.0 - r.powf(b3);
        assert!(radial_ode_residual(3, 4.0, &u3, 0.6, h).abs() < 1e-5);
    }

    #[test]
    fn poisson_integral_reproduces_harmonic_functions() {
        // Boundary data cos θ extends to u(x, y) = x.
        let g = |t: f64| t.cos();
        let v = p2_disk_value(&g, 0.3, 0.2, P2_NODES).unwrap();
        assert!((v - 0.3).abs() < 1e-10, "got {v}");
        // Constant data.
        let one = |_: f64| 1.0;
        assert!((p2_disk_value(&one, -0.4, 0.1, P2_NODES).unwrap() - 1.0).abs() < 1e-10);
        // Mean value at the center for a half-circle indicator.
        let half = |t: f64| if t.cos() > 0.0 { 1.0 } else { 0.0 };
        let v0 = p2_disk_value(&half, 0.0, 0.0, P2_NODES).unwrap();
        assert!((v0 - 0.5).abs() < 1e-3, "got {v0}");
        // Exterior points are rejected.
        assert!(p2_disk_value(&one, 1.0, 0.0, P2_NODES).is_err());
    }
}
