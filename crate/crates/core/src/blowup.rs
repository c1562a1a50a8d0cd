//! Gradient blow-up profiles `f(y)` for `t < 0`.
//!
//! Odd profiles start from the origin series `f = A y + c3 y^3 + c5 y^5` with
//! `A < 0`; every such orbit is attracted by the three-dimensional far-field
//! bundle, so no shooting is needed. The far field oscillates about
//! `C0 |y|^(alpha/beta)` with WKBJ phase `omega |y|^gamma`, and as `t -> 0^-`
//! the solution converges to the final-time profile `sign(-x) C0 |x|^(alpha/beta)`.

use crate::bundles::{classify_trajectory, integrate_profile, BundleKind, SolveConfig};
use crate::error::{Error, Result};
use crate::odeint::Trajectory;
use crate::similarity::{origin_series_at, origin_series_coefficients, ProfileState, Side, SimilarityParams};
use crate::tail::{estimate_tail_c0, wkbj_omega, TailAsymptotics};

/// Origin data for an odd blow-up profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OriginSeed {
    /// origin slope `f'(0) < 0`
    pub a: f64,
    /// series step-off distance
    pub delta: f64,
}

impl OriginSeed {
    /// Seed with the default step-off `1e-3 * max(1, 1/|A|)`.
    pub fn new(a: f64) -> Result<Self> {
        Self::with_delta(a, 1e-3 * (1.0f64).max(1.0 / a.abs()))
    }

    pub fn with_delta(a: f64, delta: f64) -> Result<Self> {
        if !(a < 0.0) {
            return Err(Error::Range(format!("origin slope A = {a} must be negative")));
        }
        if !(delta > 0.0) {
            return Err(Error::Range(format!("step-off delta = {delta} must be positive")));
        }
        Ok(Self { a, delta })
    }

    fn validate_for(&self, p: &SimilarityParams) -> Result<()> {
        let (_, c5) = origin_series_coefficients(Side::BlowUp, p, self.a);
        if (c5 * self.delta.powi(5)).abs() >= 1e-6 * (self.a * self.delta).abs() {
            return Err(Error::Range(format!(
                "step-off delta = {} too large for A = {}",
                self.delta, self.a
            )));
        }
        Ok(())
    }
}

/// Series state at `y = -delta`.
pub fn origin_series_state(p: &SimilarityParams, seed: &OriginSeed) -> Result<ProfileState> {
    seed.validate_for(p)?;
    Ok(origin_series_at(Side::BlowUp, p, seed.a, seed.delta))
}

fn require_matched(traj: &Trajectory, p: &SimilarityParams, scale: f64, cfg: &SolveConfig) -> Result<()> {
    let cls = classify_trajectory(traj, Side::BlowUp, p, cfg.thresholds, scale, false)?;
    if cls.kind != BundleKind::Matched {
        return Err(Error::Classification(format!(
            "alpha = {}: orbit entered bundle {} at y = {:?} (diagnostic {:.6e}); last node y = {}",
            p.alpha(),
            cls.kind.label(),
            cls.trigger_y,
            cls.diagnostic,
            traj.last_y()
        )));
    }
    if let Some((y, s)) = traj.nodes().find(|(y, s)| *y < 0.0 && s[0] <= 0.0) {
        return Err(Error::Classification(format!(
            "profile not positive: f({y}) = {}",
            s[0]
        )));
    }
    Ok(())
}

/// Odd blow-up profile from the origin series, integrated to `y_end`.
/// The tail is fitted on the last half of the span.
pub fn solve_blowup_profile(
    p: &SimilarityParams,
    seed: &OriginSeed,
    y_end: f64,
    cfg: &SolveConfig,
) -> Result<(Trajectory, TailAsymptotics)> {
    if !(y_end <= -10.0) {
        return Err(Error::Range(format!("y_end = {y_end} must be <= -10")));
    }
    let s0 = origin_series_state(p, seed)?;
    let cfg = SolveConfig { y_end, ..*cfg };
    let traj = integrate_profile(Side::BlowUp, p, s0.y, s0.as_array(), s0.f, &cfg)?;
    require_matched(&traj, p, s0.f, &cfg)?;
    let tail = estimate_tail_c0(&traj, Side::BlowUp, p, (y_end, 0.5 * y_end))?;
    Ok((traj, tail))
}

/// Profile with a collapsing shock: regular Cauchy data `(f0, f1, f2)` at `y = 0`.
pub fn solve_collapse_profile(
    p: &SimilarityParams,
    f0: f64,
    f1: f64,
    f2: f64,
    y_end: f64,
    cfg: &SolveConfig,
) -> Result<(Trajectory, TailAsymptotics)> {
    if !(f0 > 0.0) {
        return Err(Error::Range(format!("f0 = {f0} must be positive")));
    }
    if !(y_end <= -10.0) {
        return Err(Error::Range(format!("y_end = {y_end} must be <= -10")));
    }
    let cfg = SolveConfig { y_end, ..*cfg };
    let traj = integrate_profile(Side::BlowUp, p, 0.0, [f0, f1, f2], f0, &cfg)?;
    require_matched(&traj, p, f0, &cfg)?;
    let tail = estimate_tail_c0(&traj, Side::BlowUp, p, (y_end, 0.5 * y_end))?;
    Ok((traj, tail))
}

/// Jump `[u_-(0, t)] = 2 f0 (-t)^alpha` of a collapsing shock at `t < 0`.
pub fn collapse_jump(f0: f64, p: &SimilarityParams, t: f64) -> Result<f64> {
    if !(t < 0.0) {
        return Err(Error::Range(format!("t = {t} must be negative")));
    }
    Ok(2.0 * f0 * (-t).powf(p.alpha()))
}

/// `y -> a^3 f(y / a)`, carried through the derivatives and the dense output.
pub fn rescale_profile(traj: &Trajectory, a: f64) -> Result<Trajectory> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::Range(format!(
            "scaling factor a = {a} must be finite and nonzero"
        )));
    }
    Ok(traj.map_linear(a, &[a.powi(3), a * a, a]))
}

/// Final-time profile `u(x, 0^-) = sign(-x) C0 |x|^(alpha/beta)`.
pub fn final_time_profile(p: &SimilarityParams, c0: f64, xs: &[f64]) -> Result<Vec<f64>> {
    if !(c0 > 0.0) {
        return Err(Error::Range(format!("C0 = {c0} must be positive")));
    }
    let q = p.alpha_over_beta();
    Ok(xs
        .iter()
        .map(|&x| {
            if x == 0.0 {
                0.0
            } else {
                -x.signum() * c0 * x.abs().powf(q)
            }
        })
        .collect())
}

/// Rarefaction data: the negated final-time profile.
pub fn rarefaction_initial_profile(p: &SimilarityParams, c0: f64, xs: &[f64]) -> Result<Vec<f64>> {
    Ok(final_time_profile(p, c0, xs)?.into_iter().map(|u| -u).collect())
}

/// Roots of `(m - 3)(m^2 + 9m - 20 alpha - 2) = 0` for the power-law
/// perturbations `y^m` of the explicit cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicRoots {
    pub roots: [f64; 3],
}

impl CharacteristicRoots {
    pub fn m_plus(&self) -> f64 {
        self.roots[1]
    }

    pub fn m_minus(&self) -> f64 {
        self.roots[2]
    }
}

pub fn characteristic_roots(p: &SimilarityParams) -> CharacteristicRoots {
    let c = -(20.0 * p.alpha() + 2.0);
    let disc = (89.0 + 80.0 * p.alpha()).sqrt();
    let m_minus = (-9.0 - disc) / 2.0;
    // product of the pair is c; avoids cancellation near alpha = -1/10
    let m_plus = c / m_minus;
    CharacteristicRoots {
        roots: [3.0, m_plus, m_minus],
    }
}

/// Odd global profile `g(y) = f(y)` for `y < 0`, `-f(-y)` for `y > 0`.
/// Inside the series step-off `|y| < delta` the origin series is used.
pub struct OddProfile<'a> {
    traj: &'a Trajectory,
    series: Option<(SimilarityParams, f64)>,
}

impl<'a> OddProfile<'a> {
    pub fn new(traj: &'a Trajectory) -> Self {
        Self { traj, series: None }
    }

    pub fn with_series(traj: &'a Trajectory, p: SimilarityParams, a: f64) -> Self {
        Self {
            traj,
            series: Some((p, a)),
        }
    }

    fn left(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.traj.bounds();
        if y >= lo && y <= hi {
            return Ok(self.traj.dense_eval(y)?[0]);
        }
        match self.series {
            Some((p, a)) if y > hi && y <= 0.0 => Ok(origin_series_at(Side::BlowUp, &p, a, -y).f),
            _ => Err(Error::Range(format!("y = {y} outside the profile span"))),
        }
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        if y > 0.0 {
            Ok(-self.left(-y)?)
        } else {
            self.left(y)
        }
    }
}

/// Zeros of `f(y) - C0 |y|^(alpha/beta)` inside `window`, ordered by
/// increasing `|y|`.
pub fn tail_zero_crossings(traj: &Trajectory, p: &SimilarityParams, c0: f64, window: (f64, f64)) -> Result<Vec<f64>> {
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let (tlo, thi) = traj.bounds();
    if lo < tlo || hi > thi || hi >= 0.0 {
        return Err(Error::Range(format!("window [{lo}, {hi}] outside the profile span")));
    }
    let q = p.alpha_over_beta();
    let mut buf = vec![0.0; traj.dim()];
    let mut g = |y: f64| -> Result<f64> {
        traj.dense_eval_into(y, &mut buf)?;
        Ok(buf[0] - c0 * (-y).powf(q))
    };
    // several samples per integrator step so no pair of zeros is skipped
    let mut ys: Vec<f64> = traj.ys().iter().copied().filter(|y| *y > lo && *y < hi).collect();
    ys.push(lo);
    ys.push(hi);
    ys.sort_by(|a, b| b.total_cmp(a));
    let mut grid = Vec::with_capacity(ys.len() * 8);
    for w in ys.windows(2) {
        for k in 0..8 {
            grid.push(w[0] + (w[1] - w[0]) * k as f64 / 8.0);
        }
    }
    grid.push(*ys.last().unwrap());
    let mut out = Vec::new();
    let mut prev = (grid[0], g(grid[0])?);
    for &y in &grid[1..] {
        let gy = g(y)?;
        if gy == 0.0 {
            out.push(y);
        } else if prev.1 != 0.0 && gy.signum() != prev.1.signum() {
            let (mut a, mut ga, mut b) = (prev.0, prev.1, y);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if m == a || m == b {
                    break;
                }
                let gm = g(m)?;
                if gm.signum() == ga.signum() {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev = (y, gy);
    }
    Ok(out)
}

/// WKBJ phase advance `omega (|y_(k+1)|^gamma - |y_k|^gamma)` between
/// successive crossings; each should be close to `pi`.
pub fn phase_increments(p: &SimilarityParams, c0: f64, crossings: &[f64]) -> Vec<f64> {
    let omega = wkbj_omega(p, c0);
    let g = p.gamma();
    crossings
        .windows(2)
        .map(|w| omega * ((-w[1]).powf(g) - (-w[0]).powf(g)).abs())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_examples() {
        let r = characteristic_roots(&SimilarityParams::new(0.3).unwrap());
        assert!((r.m_plus() - 0.815_07).abs() < 1e-5);
        assert!((r.m_minus() + 9.815_07).abs() < 1e-5);
        let r = characteristic_roots(&SimilarityParams::new(-0.1).unwrap());
        assert_eq!(r.roots[0], 3.0);
        assert!(r.m_plus().abs() < 1e-15);
        assert!((r.m_minus() + 9.0).abs() < 1e-15);
    }

    #[test]
    fn final_time_examples() {
        let p = SimilarityParams::new(0.2).unwrap();
        let u = final_time_profile(&p, 1.0, &[-4.0, 0.0, 4.0]).unwrap();
        assert!((u[0] - 2.0).abs() < 1e-15);
        assert_eq!(u[1], 0.0);
        assert!((u[2] + 2.0).abs() < 1e-15);
        assert!((final_time_profile(&p, 2.0, &[-1.0]).unwrap()[0] - 2.0).abs() < 1e-15);
        assert!((rarefaction_initial_profile(&p, 2.0, &[-1.0]).unwrap()[0] + 2.0).abs() < 1e-15);
    }

    #[test]
    fn collapse_jump_value() {
        let p = SimilarityParams::new(0.2).unwrap();
        assert!((collapse_jump(1.0, &p, -1e-3).unwrap() - 0.502_38).abs() < 1e-5);
        assert!(collapse_jump(1.0, &p, 1.0).is_err());
    }

    #[test]
    fn seed_rules() {
        assert!(OriginSeed::new(1.0).is_err());
        assert!(OriginSeed::new(0.0).is_err());
        let s = OriginSeed::new(-10.0).unwrap();
        assert_eq!(s.delta, 1e-3);
        let s = OriginSeed::new(-0.1).unwrap();
        assert!((s.delta - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn rescale_identity_and_zero() {
        let t = Trajectory::from_samples(vec![-1.0, -2.0], vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let r = rescale_profile(&t, 1.0).unwrap();
        assert_eq!(r.dense_eval(-1.5).unwrap(), t.dense_eval(-1.5).unwrap());
        assert!(rescale_profile(&t, 0.0).is_err());
    }
}
