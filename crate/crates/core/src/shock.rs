//! Jump conditions at the shock `x = 0` for `t > 0`.
//!
//! For `u_t = (u u_x)_xx` the Rankine-Hugoniot speed is
//! `lambda = -[(u u_x)_x] / [u]`, the jump opens as `2 F0 t^alpha`, and the
//! one-sided triples need only match `F0 F2 + F1^2` across the shock.
//! A free-boundary condition `u u_xx = kappa (u_x)^2` selects one member of
//! the otherwise one-parameter family of extensions.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extension::{
    c0_scale_factor, default_f2_bracket, rescale_result, shoot, CauchyTriple, Component, ShootConfig, ShootingResult,
};
use crate::similarity::SimilarityParams;

/// One-sided limits `(F, F', F'')` at the shock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockSide {
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
}

impl ShockSide {
    pub fn new(f0: f64, f1: f64, f2: f64) -> Self {
        Self { f0, f1, f2 }
    }

    /// `(F F')' = F F'' + F'^2`.
    pub fn flux_derivative(&self) -> f64 {
        self.f0 * self.f2 + self.f1 * self.f1
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::new(a.powi(3) * self.f0, a * a * self.f1, a * self.f2)
    }

    /// The other side of an anti-symmetric profile `F(-y) = -F(y)`.
    pub fn mirrored(&self) -> Self {
        Self::new(-self.f0, self.f1, -self.f2)
    }
}

impl From<CauchyTriple> for ShockSide {
    fn from(t: CauchyTriple) -> Self {
        Self::new(t.f0, t.f1, t.f2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhResult {
    pub lambda: f64,
    /// `|[(F F')']|`
    pub residual: f64,
}

pub fn rh_speed(minus: &ShockSide, plus: &ShockSide) -> Result<RhResult> {
    let jump = plus.f0 - minus.f0;
    if jump == 0.0 {
        return Err(Error::Undefined("zero jump, shock speed undefined".into()));
    }
    let flux_jump = plus.flux_derivative() - minus.flux_derivative();
    Ok(RhResult {
        lambda: -flux_jump / jump,
        residual: flux_jump.abs(),
    })
}

/// `-[u]` at `x = 0`: `2 F0 t^alpha`.
pub fn jump_magnitude(f0: f64, p: &SimilarityParams, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Range(format!("t = {t} must be positive")));
    }
    if !(f0 > 0.0) {
        return Err(Error::Range(format!("F0 = {f0} must be positive")));
    }
    Ok(2.0 * f0 * t.powf(p.alpha()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Whether `F0- F2- + (F1-)^2 = F0+ F2+ + (F1+)^2` within `tol`, relative to
/// `max(1, |lhs|, |rhs|)`.
pub fn check_symmetry_breaking(minus: &ShockSide, plus: &ShockSide, tol: f64) -> SymmetryCheck {
    let lhs = minus.flux_derivative();
    let rhs = plus.flux_derivative();
    let residual = (lhs - rhs).abs();
    SymmetryCheck {
        holds: residual <= tol * (1.0f64).max(lhs.abs()).max(rhs.abs()),
        lhs,
        rhs,
        residual,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FbpCondition {
    Finite(f64),
    /// `F1 = 0` with `F0 F2 != 0`: the Neumann limit
    Infinite,
    /// `F1 = 0` and `F0 F2 = 0`
    Indeterminate,
}

/// `kappa = F0 F2 / F1^2`.
pub fn fbp_kappa(side: &ShockSide) -> FbpCondition {
    let num = side.f0 * side.f2;
    if side.f1 != 0.0 {
        FbpCondition::Finite(num / (side.f1 * side.f1))
    } else if num != 0.0 {
        FbpCondition::Infinite
    } else {
        FbpCondition::Indeterminate
    }
}

/// `F0 F2 - kappa F1^2`.
pub fn fbp_defect(t: &CauchyTriple, kappa: f64) -> f64 {
    t.f0 * t.f2 - kappa * t.f1 * t.f1
}

/// Both sides `(u u_xx, u_x^2)` of the free-boundary condition at `x = 0^-`
/// for `u = t^alpha F(x / t^beta)`.
pub fn fbp_sides(t: f64, side: &ShockSide, p: &SimilarityParams) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::Range(format!("t = {t} must be positive")));
    }
    let (a, b) = (p.alpha(), p.beta());
    let u = t.powf(a) * side.f0;
    let ux = t.powf(a - b) * side.f1;
    let uxx = t.powf(a - 2.0 * b) * side.f2;
    Ok((u * uxx, ux * ux))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbpSearch {
    /// `F0` range of the slice `F1 = -F0`
    pub f0_range: (f64, f64),
    pub grid_points: usize,
    /// relative width in `F0` at which the search stops
    pub rel_tol: f64,
}

impl Default for FbpSearch {
    fn default() -> Self {
        Self {
            f0_range: (1e-4, 1e2),
            grid_points: 13,
            rel_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FbpSelection {
    pub kappa: f64,
    /// member normalized to the target `C0`
    pub result: ShootingResult,
    /// `F0 F2 - kappa F1^2` at the normalized member
    pub defect: f64,
    /// slice points `(F0, F0 F2 / F1^2 - kappa)` of the unnormalized slice
    pub scan: Vec<(f64, f64)>,
    /// bracket in `F0` holding the sign change
    pub sign_change: (f64, f64),
}

fn slice_member(p: &SimilarityParams, f0: f64, cfg: &ShootConfig) -> Result<ShootingResult> {
    let base = CauchyTriple::new(f0, -f0, 0.0);
    shoot(p, &base, Component::F2, default_f2_bracket(f0, -f0), cfg)
}

fn kappa_gap(r: &ShootingResult, kappa: f64) -> f64 {
    let t = r.triple;
    fbp_defect(&t, kappa) / (t.f1 * t.f1)
}

/// Searches the slice `F1 = -F0` for the member satisfying
/// `F0 F2 = kappa F1^2`, then normalizes it to `c0_target`.
pub fn select_fbp_profile(
    p: &SimilarityParams,
    kappa: f64,
    c0_target: f64,
    search: &FbpSearch,
    cfg: &ShootConfig,
) -> Result<FbpSelection> {
    if !kappa.is_finite() {
        return Err(Error::Range(format!("kappa = {kappa} must be finite")));
    }
    if !(c0_target > 0.0) {
        return Err(Error::Range(format!("target C0 = {c0_target} must be positive")));
    }
    let (lo, hi) = search.f0_range;
    if !(lo > 0.0 && hi > lo) || search.grid_points < 2 {
        return Err(Error::Range(format!("bad F0 search range [{lo}, {hi}]")));
    }
    let n = search.grid_points;
    let grid: Vec<f64> = (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect();
    let members: Vec<Result<ShootingResult>> = grid.par_iter().map(|&f0| slice_member(p, f0, cfg)).collect();
    let mut scan = Vec::new();
    let mut prev: Option<(f64, f64, ShootingResult)> = None;
    let mut bracket = None;
    for (f0, m) in grid.iter().zip(members) {
        let r = match m {
            Ok(r) => r,
            Err(_) => continue,
        };
        let g = kappa_gap(&r, kappa);
        scan.push((*f0, g));
        if let Some((pf, pg, pr)) = prev.take() {
            if bracket.is_none() && (pg == 0.0 || pg.signum() != g.signum()) {
                bracket = Some(((pf, pg, pr), (*f0, g, r.clone())));
            }
        }
        prev = Some((*f0, g, r));
    }
    let ((mut a, mut ga, mut ra), (mut b, _gb, mut rb)) = bracket.ok_or_else(|| {
        Error::NotFound(format!(
            "F0 F2 - {kappa} F1^2 keeps its sign on F1 = -F0, F0 in [{lo}, {hi}]"
        ))
    })?;
    while (b / a).ln() > search.rel_tol && ga != 0.0 {
        let m = (a * b).sqrt();
        if m <= a || m >= b {
            break;
        }
        let rm = slice_member(p, m, cfg)?;
        let gm = kappa_gap(&rm, kappa);
        if gm == 0.0 || gm.signum() != ga.signum() {
            b = m;
            rb = rm;
        } else {
            a = m;
            ga = gm;
            ra = rm;
        }
    }
    let chosen = if ga.abs() <= kappa_gap(&rb, kappa).abs() {
        ra
    } else {
        rb
    };
    let scale = c0_scale_factor(p, chosen.c0(), c0_target)?;
    let result = rescale_result(&chosen, scale);
    let defect = fbp_defect(&result.triple, kappa);
    Ok(FbpSelection {
        kappa,
        result,
        defect,
        scan,
        sign_change: (a, b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rh_examples() {
        let r = rh_speed(&ShockSide::new(-1.0, -1.0, 1.0), &ShockSide::new(1.0, -1.0, -1.0)).unwrap();
        assert_eq!(r.lambda, 0.0);
        assert_eq!(r.residual, 0.0);
        let r = rh_speed(&ShockSide::new(1.0, 0.0, 0.0), &ShockSide::new(2.0, 0.0, 0.0)).unwrap();
        assert_eq!(r.lambda, 0.0);
        // equal fluxes without symmetry: 2*1 + 1 = 3 = 3*(2/3) + 1
        let r = rh_speed(&ShockSide::new(2.0, -1.0, 1.0), &ShockSide::new(3.0, 1.0, 2.0 / 3.0)).unwrap();
        assert!(r.lambda.abs() < 1e-15);
        assert!(matches!(
            rh_speed(&ShockSide::new(1.0, 0.0, 0.0), &ShockSide::new(1.0, 2.0, 0.0)),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn jump_examples() {
        let p = SimilarityParams::new(0.2).unwrap();
        assert_eq!(jump_magnitude(1.0, &p, 1.0).unwrap(), 2.0);
        assert!((jump_magnitude(1.5, &p, 0.5).unwrap() - 2.611_66).abs() < 1e-5);
        assert!(jump_magnitude(1.0, &p, 1e-12).unwrap() < 1e-2);
        assert!(jump_magnitude(1.0, &p, 0.0).is_err());
    }

    #[test]
    fn symmetry_examples() {
        let m = ShockSide::new(0.7, -1.3, 0.4);
        assert!(check_symmetry_breaking(&m, &m.mirrored(), 0.0).holds);
        let c = check_symmetry_breaking(
            &ShockSide::new(1.0, -1.0, 2.0),
            &ShockSide::new(3.0, -1.0, 2.0 / 3.0),
            1e-14,
        );
        assert!(c.holds);
        assert!((c.lhs - 3.0).abs() < 1e-15);
        let c = check_symmetry_breaking(&ShockSide::new(1.0, -1.0, 2.0), &ShockSide::new(1.0, -1.0, 0.0), 1e-12);
        assert!(!c.holds);
        assert_eq!((c.lhs, c.rhs), (3.0, 1.0));
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(fbp_kappa(&ShockSide::new(1.0, -2.0, 0.0)), FbpCondition::Finite(0.0));
        assert_eq!(fbp_kappa(&ShockSide::new(1.0, 0.0, 1.0)), FbpCondition::Infinite);
        assert_eq!(fbp_kappa(&ShockSide::new(1.0, 0.0, 0.0)), FbpCondition::Indeterminate);
        match fbp_kappa(&ShockSide::new(1.0, -1.0, 1.132_85)) {
            FbpCondition::Finite(k) => assert!((k - 1.132_85).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fbp_sides_scale_together() {
        let p = SimilarityParams::new(0.2).unwrap();
        let s = ShockSide::new(1.0, -0.6, 0.3);
        let (a1, b1) = fbp_sides(1.0, &s, &p).unwrap();
        let (a2, b2) = fbp_sides(2.0, &s, &p).unwrap();
        let f = 2f64.powf(2.0 * p.alpha() - 2.0 * p.beta());
        assert!((a2 / a1 - f).abs() < 1e-14);
        assert!((b2 / b1 - f).abs() < 1e-14);
    }
}
