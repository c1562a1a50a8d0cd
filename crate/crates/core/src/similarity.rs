//! Similarity exponents and the two profile ODEs.
//!
//! Both the blow-up profile `f` (for `t < 0`) and the extension profile `F`
//! (for `t > 0`) satisfy a third-order ODE on `y < 0`:
//!
//! ```text
//! blow-up:    (f f')'' - beta f' y + alpha f = 0
//! extension:  (F F')'' + beta F' y - alpha F = 0
//! ```
//!
//! With `(f f')'' = f f''' + 3 f' f''` both are solved in the normal form
//! `f''' = (sigma (beta y f' - alpha f) - 3 f' f'') / f`, where `sigma = +1`
//! on the blow-up side and `-1` on the extension side. The equations are
//! singular where the profile vanishes.

use crate::error::{Error, Result};
use crate::odeint::RhsError;

/// Lower end of the admissible exponent range.
pub const ALPHA_MIN: f64 = -0.1;
/// Upper end; `alpha = 1/2` is the degenerate edge where `alpha / beta = 1`.
pub const ALPHA_MAX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityParams {
    alpha: f64,
    beta: f64,
}

impl SimilarityParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(ALPHA_MIN..=ALPHA_MAX).contains(&alpha) {
            return Err(Error::Range(format!(
                "alpha = {alpha} outside the admissible interval [-1/10, 1/2]"
            )));
        }
        Ok(Self {
            alpha,
            beta: (1.0 + alpha) / 3.0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Far-field power `alpha / beta = 3 alpha / (1 + alpha)`.
    pub fn alpha_over_beta(&self) -> f64 {
        3.0 * self.alpha / (1.0 + self.alpha)
    }

    /// WKBJ phase exponent `1 + (1 - alpha/beta) / 2`.
    pub fn gamma(&self) -> f64 {
        1.0 + 0.5 * (1.0 - self.alpha_over_beta())
    }

    /// Exponent by which the far-field constant `C0` scales under
    /// `f -> a^3 f(y / a)`: `C0 -> a^(3 - alpha/beta) C0`.
    pub fn c0_scaling_exponent(&self) -> f64 {
        3.0 - self.alpha_over_beta()
    }
}

/// Which of the two similarity ODEs a profile solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `u_-(x,t) = (-t)^alpha f(x / (-t)^beta)`, `t < 0`.
    BlowUp,
    /// `u_+(x,t) = t^alpha F(x / t^beta)`, `t > 0`.
    Extension,
}

impl Side {
    pub fn sigma(self) -> f64 {
        match self {
            Side::BlowUp => 1.0,
            Side::Extension => -1.0,
        }
    }

    /// Sign of the explicit cubic solution `sign * y^3 / 60`.
    pub fn cubic_sign(self) -> f64 {
        self.sigma()
    }
}

/// A phase point `(y, f, f', f'')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileState {
    pub y: f64,
    pub f: f64,
    pub fp: f64,
    pub fpp: f64,
}

impl ProfileState {
    pub fn as_array(&self) -> [f64; 3] {
        [self.f, self.fp, self.fpp]
    }
}

/// Third derivative from the normal form.
pub fn third_derivative(side: Side, p: &SimilarityParams, y: f64, s: &[f64]) -> Result<f64, RhsError> {
    let (f, fp, fpp) = (s[0], s[1], s[2]);
    if f == 0.0 {
        return Err(RhsError(format!("profile vanishes at y = {y}")));
    }
    Ok((side.sigma() * (p.beta() * y * fp - p.alpha() * f) - 3.0 * fp * fpp) / f)
}

/// Right-hand side of the first-order system `(f, f', f'')' = (f', f'', f''')`.
pub fn profile_rhs(
    side: Side,
    p: SimilarityParams,
) -> impl Fn(f64, &[f64], &mut [f64]) -> Result<(), RhsError> + Copy + Send + Sync {
    move |y, s, d| {
        d[0] = s[1];
        d[1] = s[2];
        d[2] = third_derivative(side, &p, y, s)?;
        Ok(())
    }
}

/// The ODE operator evaluated on given derivatives:
/// `f f''' + 3 f' f'' - sigma (beta f' y - alpha f)`.
pub fn operator_residual(side: Side, p: &SimilarityParams, y: f64, d: [f64; 4]) -> f64 {
    let [f, fp, fpp, fppp] = d;
    f * fppp + 3.0 * fp * fpp - side.sigma() * (p.beta() * fp * y - p.alpha() * f)
}

/// Explicit solution `sign * y^3 / 60` with its first three derivatives.
pub fn explicit_cubic(side: Side, y: f64) -> [f64; 4] {
    let s = side.cubic_sign();
    [s * y.powi(3) / 60.0, s * y * y / 20.0, s * y / 10.0, s / 10.0]
}

/// Coefficients `(c3, c5)` of the odd origin series `A y + c3 y^3 + c5 y^5`.
///
/// `c3 = sigma (1 - 2 alpha) / 72` and `c5 = (1 - 2 alpha)(1 + 10 alpha) / (51840 A)`
/// follow from matching the `y` and `y^3` orders of the ODE.
pub fn origin_series_coefficients(side: Side, p: &SimilarityParams, a: f64) -> (f64, f64) {
    let alpha = p.alpha();
    let c3 = side.sigma() * (1.0 - 2.0 * alpha) / 72.0;
    let c5 = (1.0 - 2.0 * alpha) * (1.0 + 10.0 * alpha) / (51840.0 * a);
    (c3, c5)
}

/// Series state `(f, f', f'')` at `y = -delta`.
pub fn origin_series_at(side: Side, p: &SimilarityParams, a: f64, delta: f64) -> ProfileState {
    let (c3, c5) = origin_series_coefficients(side, p, a);
    let y = -delta;
    ProfileState {
        y,
        f: a * y + c3 * y.powi(3) + c5 * y.powi(5),
        fp: a + 3.0 * c3 * y * y + 5.0 * c5 * y.powi(4),
        fpp: 6.0 * c3 * y + 20.0 * c5 * y.powi(3),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_and_power() {
        let p = SimilarityParams::new(0.2).unwrap();
        assert!((p.beta() - 0.4).abs() < 1e-15);
        assert!((p.alpha_over_beta() - 0.5).abs() < 1e-15);
        assert!((p.gamma() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn alpha_guard() {
        assert!(SimilarityParams::new(0.7).is_err());
        assert!(SimilarityParams::new(-0.2).is_err());
        assert!(SimilarityParams::new(-0.1).is_ok());
        assert!(SimilarityParams::new(0.5).is_ok());
    }

    #[test]
    fn hand_evaluated_normal_form() {
        let p = SimilarityParams::new(0.2).unwrap();
        let bu = third_derivative(Side::BlowUp, &p, -1.0, &[1.0, 0.0, 0.0]).unwrap();
        assert!((bu + 0.2).abs() < 1e-15);
        let ex = third_derivative(Side::Extension, &p, -1.0, &[1.0, 0.0, 0.0]).unwrap();
        assert!((ex - 0.2).abs() < 1e-15);
    }

    #[test]
    fn vanishing_profile_is_rhs_failure() {
        let p = SimilarityParams::new(0.2).unwrap();
        let rhs = profile_rhs(Side::Extension, p);
        let mut d = [0.0; 3];
        assert!(rhs(-1.0, &[0.0, 1.0, 0.0], &mut d).is_err());
    }

    #[test]
    fn cubic_solves_both_sides() {
        for alpha in [-0.1, 0.0, 0.2, 0.45] {
            let p = SimilarityParams::new(alpha).unwrap();
            for side in [Side::BlowUp, Side::Extension] {
                for y in [-10.0, -3.3, -1.0] {
                    let d = explicit_cubic(side, y);
                    let r = operator_residual(side, &p, y, d);
                    assert!(r.abs() <= 1e-11 * y.abs().powi(3), "{side:?} {alpha} {y}: {r}");
                }
            }
        }
    }

    #[test]
    fn series_value_example() {
        let p = SimilarityParams::new(0.2).unwrap();
        let s = origin_series_at(Side::BlowUp, &p, -1.0, 0.01);
        assert!((s.f - 0.009_999_991_7).abs() < 5e-11);
        let p = SimilarityParams::new(0.5).unwrap();
        let s = origin_series_at(Side::BlowUp, &p, -3.0, 0.01);
        assert_eq!(s.f, 0.03);
    }

    /// Residual of the truncated series, with exact polynomial derivatives,
    /// must vanish through order y^3 (leaving O(y^5)).
    #[test]
    fn series_residual_order() {
        for side in [Side::BlowUp, Side::Extension] {
            for alpha in [0.05, 0.2, 0.37] {
                let p = SimilarityParams::new(alpha).unwrap();
                let a = -1.3;
                let (c3, c5) = origin_series_coefficients(side, &p, a);
                let res = |y: f64| {
                    let d = [
                        a * y + c3 * y.powi(3) + c5 * y.powi(5),
                        a + 3.0 * c3 * y * y + 5.0 * c5 * y.powi(4),
                        6.0 * c3 * y + 20.0 * c5 * y.powi(3),
                        6.0 * c3 + 60.0 * c5 * y * y,
                    ];
                    operator_residual(side, &p, y, d)
                };
                let r1 = res(-0.02).abs();
                let r2 = res(-0.01).abs();
                // halving y shrinks an O(y^5) residual by 32
                assert!(r1 / r2 > 25.0, "{side:?} alpha={alpha}: ratio {}", r1 / r2);
            }
        }
    }
}
