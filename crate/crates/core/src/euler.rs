//! Reference solutions of the Euler equation `u_t + u u_x = 0`.
//!
//! Blow-up data `u(x, 0) = C0 |x|^(alpha/beta)` on `x < 0`, with
//! `beta = 1 + alpha`, continue uniquely for `t > 0`: characteristics give
//! `u = C0 (u t - x)^(alpha/beta)`, and the similarity form
//! `u = t^alpha F(x / t^beta)` reduces that to the algebraic equation
//! `F^beta / (F + |y|)^alpha = C0^beta`. The shock speed `(F0- + F0+)/2`
//! vanishes only for the symmetric jump.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerParams {
    alpha: f64,
    beta: f64,
    c0: f64,
}

impl EulerParams {
    pub fn new(alpha: f64, c0: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Range(format!("alpha = {alpha} outside (0, 1)")));
        }
        if !(c0 > 0.0) || !c0.is_finite() {
            return Err(Error::Range(format!("C0 = {c0} must be positive")));
        }
        Ok(Self {
            alpha,
            beta: 1.0 + alpha,
            c0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn alpha_over_beta(&self) -> f64 {
        self.alpha / self.beta
    }
}

/// `F^beta / (F + |y|)^alpha - C0^beta`, in logarithmic form.
fn log_gap(f: f64, abs_y: f64, p: &EulerParams) -> f64 {
    p.beta * f.ln() - p.alpha * (f + abs_y).ln() - p.beta * p.c0.ln()
}

/// Residual `F^beta / (F + |y|)^alpha - C0^beta`.
pub fn euler_residual(f: f64, y: f64, p: &EulerParams) -> f64 {
    f.powf(p.beta) / (f + y.abs()).powf(p.alpha) - p.c0.powf(p.beta)
}

/// The positive root of `F^beta / (F + |y|)^alpha = C0^beta`.
pub fn euler_f(y: f64, p: &EulerParams) -> Result<f64> {
    if !(y <= 0.0) {
        return Err(Error::Range(format!("y = {y} must be <= 0")));
    }
    let abs_y = -y;
    let mut lo = p.c0.powf(p.beta);
    if abs_y == 0.0 {
        return Ok(lo);
    }
    let mut hi = lo + p.c0 * abs_y.powf(p.alpha_over_beta()) + 1.0;
    while log_gap(hi, abs_y, p) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if log_gap(mid, abs_y, p) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `u(x, t)` from the characteristic relation `u = C0 (u t - x)^(alpha/beta)`,
/// by fixed-point iteration started above the solution.
pub fn euler_characteristics(x: f64, t: f64, p: &EulerParams) -> Result<f64> {
    if !(x <= 0.0) {
        return Err(Error::Range(format!("x = {x} must be <= 0")));
    }
    if !(t > 0.0) {
        return Err(Error::Range(format!("t = {t} must be positive")));
    }
    let q = p.alpha_over_beta();
    let phi = |u: f64| p.c0 * (u * t - x).powf(q);
    let mut u = 1.0;
    while phi(u) > u {
        u *= 2.0;
    }
    // phi is concave and increasing, so the iterates decrease monotonically
    // to the largest fixed point; the contraction factor is at most q
    for _ in 0..10_000 {
        let next = phi(u);
        if next >= u {
            break;
        }
        u = next;
    }
    Ok(u)
}

/// `u(0^-, t) = C0^beta t^alpha`.
pub fn euler_shock_value(t: f64, p: &EulerParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Range(format!("t = {t} must be positive")));
    }
    Ok(p.c0.powf(p.beta) * t.powf(p.alpha))
}

/// Shock speed `(F0- + F0+) / 2`.
pub fn euler_rh_speed(f0_minus: f64, f0_plus: f64) -> f64 {
    0.5 * (f0_minus + f0_plus)
}

/// The only right state with zero speed: `F0+ = -F0-`.
pub fn euler_rh_symmetry(f0_minus: f64) -> f64 {
    -f0_minus
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_value() {
        let p = EulerParams::new(0.2, 1.7).unwrap();
        assert_eq!(euler_f(0.0, &p).unwrap(), 1.7f64.powf(1.2));
    }

    #[test]
    fn hand_example() {
        let p = EulerParams::new(0.2, 1.0).unwrap();
        let f = euler_f(-1.0, &p).unwrap();
        assert!((f - 1.135).abs() < 1e-3, "{f}");
        assert!(euler_residual(f, -1.0, &p).abs() < 1e-12);
    }

    #[test]
    fn far_field_power_law() {
        let p = EulerParams::new(0.4, 2.0).unwrap();
        let y: f64 = -1e6;
        let f = euler_f(y, &p).unwrap();
        assert!((f / (2.0 * (-y).powf(p.alpha_over_beta())) - 1.0).abs() < 0.01);
    }

    #[test]
    fn characteristics_limits() {
        let p = EulerParams::new(0.2, 1.3).unwrap();
        let u = euler_characteristics(0.0, 0.5, &p).unwrap();
        assert!((u - euler_shock_value(0.5, &p).unwrap()).abs() < 1e-12);
        let u = euler_characteristics(-2.0, 1e-12, &p).unwrap();
        assert!((u - 1.3 * 2f64.powf(p.alpha_over_beta())).abs() < 1e-9);
    }

    #[test]
    fn rh_symmetry() {
        assert_eq!(euler_rh_symmetry(1.0), -1.0);
        assert_eq!(euler_rh_speed(2.0, -2.0), 0.0);
        assert!(EulerParams::new(1.0, 1.0).is_err());
        assert!(EulerParams::new(0.5, 0.0).is_err());
    }
}
