//! Extension profiles `F(y)` for `t > 0` and the shooting between bundles.
//!
//! From Cauchy data `(F0, F1, F2)` at `y = 0` almost every orbit either
//! vanishes at finite `y` (bundle I) or is captured by the cubic `-y^3/60`
//! (bundle II). Both bundles are open, so for two fixed components the third
//! is pinned by bisection on the I/II split; the separatrix is the matched
//! orbit with the power-law tail `C0 |y|^(alpha/beta)`.
//!
//! `f2` is `F''(0)` of the profile on `y < 0`.

use rayon::prelude::*;

use crate::bundles::{classify_trajectory, integrate_profile, BundleKind, SolveConfig};
use crate::error::{Error, Result};
use crate::odeint::Trajectory;
use crate::similarity::{origin_series_at, Side, SimilarityParams};
use crate::tail::{estimate_tail_c0, TailAsymptotics};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyTriple {
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
}

impl CauchyTriple {
    pub fn new(f0: f64, f1: f64, f2: f64) -> Self {
        Self { f0, f1, f2 }
    }

    pub fn get(&self, c: Component) -> f64 {
        match c {
            Component::F0 => self.f0,
            Component::F1 => self.f1,
            Component::F2 => self.f2,
        }
    }

    pub fn with(&self, c: Component, v: f64) -> Self {
        let mut t = *self;
        match c {
            Component::F0 => t.f0 = v,
            Component::F1 => t.f1 = v,
            Component::F2 => t.f2 = v,
        }
        t
    }

    /// `(a^3 F0, a^2 F1, a F2)`, the data of `a^3 F(y / a)`.
    pub fn scaled(&self, a: f64) -> Self {
        Self::new(a.powi(3) * self.f0, a * a * self.f1, a * self.f2)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.f0, self.f1, self.f2]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    F0,
    F1,
    F2,
}

impl Component {
    pub fn name(self) -> &'static str {
        match self {
            Component::F0 => "f0",
            Component::F1 => "f1",
            Component::F2 => "f2",
        }
    }

    /// Exponent `k` in `value -> a^k value` under the scaling group.
    pub fn scaling_power(self) -> i32 {
        match self {
            Component::F0 => 3,
            Component::F1 => 2,
            Component::F2 => 1,
        }
    }
}

impl std::str::FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f0" => Ok(Component::F0),
            "f1" => Ok(Component::F1),
            "f2" => Ok(Component::F2),
            _ => Err(Error::Range(format!("unknown component {s:?}, expected f0, f1 or f2"))),
        }
    }
}

/// Shortest `|y|`, in units of `C0^(1/(3 - alpha/beta))`, over which the
/// bracket orbits must coincide for a tail fit.
pub const MIN_AGREEMENT_EXTENT: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootConfig {
    pub solve: SolveConfig,
    /// bracket width at which bisection stops, relative to
    /// `max(|value|, F0^(k/3))` for a component scaling like `a^k`
    pub tol: f64,
    pub max_doublings: usize,
    pub max_iterations: usize,
    /// relative gap under which the two bracket orbits count as one
    pub agreement: f64,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            solve: SolveConfig::default(),
            tol: 1e-12,
            max_doublings: 60,
            max_iterations: 200,
            agreement: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShootingResult {
    pub params: SimilarityParams,
    /// the triple with the tuned component at the bracket midpoint
    pub triple: CauchyTriple,
    pub tuned: Component,
    pub tuned_value: f64,
    pub bracket: (f64, f64),
    pub bracket_kinds: (BundleKind, BundleKind),
    pub bracket_width: f64,
    /// classification of the midpoint orbit itself
    pub midpoint_kind: BundleKind,
    pub tail: TailAsymptotics,
    pub iterations: usize,
    pub config: ShootConfig,
    /// orbit of the midpoint, trusted up to `|y| = -tail.window.0`
    pub trajectory: Trajectory,
}

impl ShootingResult {
    pub fn c0(&self) -> f64 {
        self.tail.c0
    }
}

/// Integrates and classifies the extension orbit from `triple`.
pub fn classify_shot(
    p: &SimilarityParams,
    triple: &CauchyTriple,
    cfg: &SolveConfig,
) -> Result<(BundleKind, Trajectory)> {
    let mut cfg = *cfg;
    let mut last = None;
    for _ in 0..3 {
        let traj = integrate_profile(Side::Extension, p, 0.0, triple.as_array(), triple.f0, &cfg)?;
        match classify_trajectory(&traj, Side::Extension, p, cfg.thresholds, triple.f0, false) {
            Ok(c) => return Ok((c.kind, traj)),
            Err(e) => {
                // both triggers inside one step: retry with shorter steps
                last = Some(e);
                cfg.rtol *= 0.01;
                cfg.atol *= 0.01;
            }
        }
    }
    Err(last.unwrap())
}

fn is_split(a: BundleKind, b: BundleKind) -> bool {
    matches!(
        (a, b),
        (BundleKind::Extinction, BundleKind::CubicGrowth) | (BundleKind::CubicGrowth, BundleKind::Extinction)
    )
}

fn expand(c: Component, lo: f64, hi: f64) -> (f64, f64) {
    match c {
        Component::F0 => (0.5 * lo, 2.0 * hi),
        Component::F1 if hi < 0.0 => (2.0 * lo, 0.5 * hi),
        _ => {
            let mid = 0.5 * (lo + hi);
            let w = hi - lo;
            (mid - w, mid + w)
        }
    }
}

/// Largest `|y|` up to which the orbits `a` and `b` agree to `rel`.
pub fn agreement_extent(a: &Trajectory, b: &Trajectory, rel: f64) -> f64 {
    let (blo, bhi) = b.bounds();
    let mut out = vec![0.0; b.dim()];
    let mut extent = 0.0;
    for (y, s) in a.nodes() {
        if y < blo || y > bhi {
            break;
        }
        if b.dense_eval_into(y, &mut out).is_err() {
            break;
        }
        let scale = s[0].abs().max(out[0].abs());
        if (s[0] - out[0]).abs() > rel * scale {
            break;
        }
        extent = -y;
    }
    extent
}

/// Bisection on `tuned` between bundles I and II, all other components fixed.
pub fn shoot(
    p: &SimilarityParams,
    base: &CauchyTriple,
    tuned: Component,
    bracket: (f64, f64),
    cfg: &ShootConfig,
) -> Result<ShootingResult> {
    let (mut lo, mut hi) = (bracket.0.min(bracket.1), bracket.0.max(bracket.1));
    if !(cfg.tol > 0.0) {
        return Err(Error::Range(format!("tol = {} must be positive", cfg.tol)));
    }
    if tuned != Component::F0 && !(base.f0 > 0.0) {
        return Err(Error::Range(format!("F0 = {} must be positive", base.f0)));
    }
    if tuned == Component::F0 && !(lo > 0.0) {
        return Err(Error::Range(format!("F0 bracket [{lo}, {hi}] must be positive")));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Range(format!("degenerate bracket [{lo}, {hi}]")));
    }
    let run = |v: f64| classify_shot(p, &base.with(tuned, v), &cfg.solve);

    let mut klo = run(lo)?.0;
    let mut khi = run(hi)?.0;
    let mut doublings = 0;
    while !is_split(klo, khi) {
        if doublings == cfg.max_doublings {
            return Err(Error::NoBracket(format!(
                "{} in [{lo}, {hi}] classifies ({}, {}) after {doublings} doublings",
                tuned.name(),
                klo.label(),
                khi.label()
            )));
        }
        (lo, hi) = expand(tuned, lo, hi);
        klo = run(lo)?.0;
        khi = run(hi)?.0;
        doublings += 1;
    }
    let kinds = (klo, khi);

    let natural = |v: f64| match tuned {
        Component::F0 => v.abs(),
        c => v.abs().max(base.f0.powf(c.scaling_power() as f64 / 3.0)),
    };
    let mut iterations = 0;
    while hi - lo > cfg.tol * natural(0.5 * (lo + hi)) && iterations < cfg.max_iterations {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (k, _) = run(mid)?;
        // a matched midpoint sits on the separatrix to working accuracy
        if k == khi {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }

    let mid = 0.5 * (lo + hi);
    let triple = base.with(tuned, mid);
    let (kmid, traj) = run(mid)?;
    let (_, tlo) = run(lo)?;
    let (_, thi) = run(hi)?;
    let extent = agreement_extent(&tlo, &thi, cfg.agreement).min(-traj.last_y());
    let tail = estimate_tail_c0(&traj, Side::Extension, p, (-extent, -0.5 * extent))
        .map_err(|e| Error::Fit(format!("bracket orbits agree only to |y| = {}: {e}", extent.abs())))?;
    let length = tail.c0.powf(1.0 / p.c0_scaling_exponent());
    if extent < MIN_AGREEMENT_EXTENT * length {
        return Err(Error::Fit(format!(
            "bracket orbits separate at |y| = {extent} < {MIN_AGREEMENT_EXTENT} x {length}; tighten tol to resolve the tail"
        )));
    }
    Ok(ShootingResult {
        params: *p,
        triple,
        tuned,
        tuned_value: mid,
        bracket: (lo, hi),
        bracket_kinds: kinds,
        bracket_width: hi - lo,
        midpoint_kind: kmid,
        tail,
        iterations,
        config: *cfg,
        trajectory: traj,
    })
}

/// How family members choose `F1` from `F0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum F1Policy {
    /// `F1 = -F0`
    MinusF0,
    /// `F1 = ratio * F0`
    Ratio(f64),
    Constant(f64),
}

impl F1Policy {
    pub fn f1(&self, f0: f64) -> f64 {
        match *self {
            F1Policy::MinusF0 => -f0,
            F1Policy::Ratio(r) => r * f0,
            F1Policy::Constant(c) => c,
        }
    }
}

/// Scale-aware starting bracket for `F2`.
pub fn default_f2_bracket(f0: f64, f1: f64) -> (f64, f64) {
    let w = f0.cbrt().max(f1.abs().sqrt());
    (-w, w)
}

#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub f0: f64,
    pub result: ShootingResult,
}

#[derive(Debug, Clone)]
pub struct Family {
    pub params: SimilarityParams,
    pub members: Vec<FamilyMember>,
    pub failures: Vec<(f64, Error)>,
}

impl Family {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Shoots `F2` for each `F0` with `F1` from `policy`.
pub fn family_sweep(p: &SimilarityParams, f0_list: &[f64], policy: F1Policy, cfg: &ShootConfig) -> Result<Family> {
    if let Some(bad) = f0_list.iter().find(|f| !(**f > 0.0)) {
        return Err(Error::Range(format!("family F0 = {bad} must be positive")));
    }
    let outcomes: Vec<(f64, Result<ShootingResult>)> = f0_list
        .par_iter()
        .map(|&f0| {
            let f1 = policy.f1(f0);
            let base = CauchyTriple::new(f0, f1, 0.0);
            (f0, shoot(p, &base, Component::F2, default_f2_bracket(f0, f1), cfg))
        })
        .collect();
    let mut members = Vec::new();
    let mut failures = Vec::new();
    for (f0, r) in outcomes {
        match r {
            Ok(result) => members.push(FamilyMember { f0, result }),
            Err(e) => failures.push((f0, e)),
        }
    }
    Ok(Family {
        params: *p,
        members,
        failures,
    })
}

/// Scale factor taking the far-field constant `c0` to `target`.
pub fn c0_scale_factor(p: &SimilarityParams, c0: f64, target: f64) -> Result<f64> {
    if !(c0 > 0.0) || !(target > 0.0) {
        return Err(Error::Range(format!(
            "C0 = {c0} and target = {target} must be positive"
        )));
    }
    Ok((target / c0).powf(1.0 / p.c0_scaling_exponent()))
}

/// Rescales a shooting result by `F -> a^3 F(y / a)`.
pub fn rescale_result(r: &ShootingResult, a: f64) -> ShootingResult {
    let k = r.tuned.scaling_power();
    let ak = a.powi(k);
    ShootingResult {
        triple: r.triple.scaled(a),
        tuned_value: ak * r.tuned_value,
        bracket: (ak * r.bracket.0, ak * r.bracket.1),
        bracket_width: ak * r.bracket_width,
        tail: r.tail.rescaled(&r.params, a),
        trajectory: r.trajectory.map_linear(a, &[a.powi(3), a * a, a]),
        ..r.clone()
    }
}

/// Member rescaled so that its far-field constant is `target`.
pub fn normalize_to_c0(member: &FamilyMember, target: f64) -> Result<FamilyMember> {
    let r = &member.result;
    let a = c0_scale_factor(&r.params, r.c0(), target)?;
    let result = rescale_result(r, a);
    Ok(FamilyMember {
        f0: result.triple.f0,
        result,
    })
}

pub fn normalize_family(family: &Family, target: f64) -> Result<Family> {
    Ok(Family {
        members: family
            .members
            .iter()
            .map(|m| normalize_to_c0(m, target))
            .collect::<Result<_>>()?,
        ..family.clone()
    })
}

/// Re-shoots the tuned component of `r` in a narrow bracket around its
/// current value; used to confirm a rescaled result independently.
pub fn reshoot(r: &ShootingResult, cfg: &ShootConfig) -> Result<ShootingResult> {
    let v = r.tuned_value;
    let w = 1e-6 * v.abs().max(1e-3);
    let bracket = if r.tuned == Component::F1 && v + w >= 0.0 {
        (v - w, 0.5 * v)
    } else {
        (v - w, v + w)
    };
    shoot(&r.params, &r.triple, r.tuned, bracket, cfg)
}

#[derive(Debug, Clone)]
pub struct ScanEntry {
    pub a: f64,
    pub outcome: std::result::Result<BundleKind, Error>,
    pub trigger_y: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct NonexistenceReport {
    pub params: SimilarityParams,
    pub entries: Vec<ScanEntry>,
}

impl NonexistenceReport {
    pub fn matched_count(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e.outcome, Ok(BundleKind::Matched)))
            .count()
    }

    /// No matched orbit among the `F0 = 0` starts.
    pub fn holds(&self) -> bool {
        self.matched_count() == 0
    }
}

/// `n` points from `hi` down to `lo` (both negative), equally spaced in `log |A|`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (l0, l1) = (lo.abs().ln(), hi.abs().ln());
    (0..n)
        .map(|i| -(l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Classifies the orbit leaving the origin with `F = 0`, `F' = A`.
pub fn classify_zero_jump(p: &SimilarityParams, a: f64, cfg: &SolveConfig) -> Result<(BundleKind, Option<f64>)> {
    if !(a < 0.0) {
        return Err(Error::Range(format!("slope A = {a} must be negative")));
    }
    let delta = 1e-3 * (1.0f64).max(1.0 / a.abs());
    let s0 = origin_series_at(Side::Extension, p, a, delta);
    let traj = integrate_profile(Side::Extension, p, s0.y, s0.as_array(), 0.0, cfg)?;
    let c = classify_trajectory(&traj, Side::Extension, p, cfg.thresholds, 0.0, true)?;
    Ok((c.kind, c.trigger_y))
}

pub fn nonexistence_scan(p: &SimilarityParams, a_list: &[f64], cfg: &SolveConfig) -> Result<NonexistenceReport> {
    if let Some(bad) = a_list.iter().find(|a| !(**a < 0.0)) {
        return Err(Error::Range(format!("scan slope A = {bad} must be negative")));
    }
    let entries = a_list
        .par_iter()
        .map(|&a| match classify_zero_jump(p, a, cfg) {
            Ok((k, y)) => ScanEntry {
                a,
                outcome: Ok(k),
                trigger_y: y,
            },
            Err(e) => ScanEntry {
                a,
                outcome: Err(e),
                trigger_y: None,
            },
        })
        .collect();
    Ok(NonexistenceReport { params: *p, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_scaling() {
        let t = CauchyTriple::new(1.0, -2.0, 3.0).scaled(2.0);
        assert_eq!(t.as_array(), [8.0, -8.0, 6.0]);
        assert_eq!(t.with(Component::F1, -1.0).f1, -1.0);
        assert_eq!("F2".parse::<Component>().unwrap(), Component::F2);
        assert!("f3".parse::<Component>().is_err());
    }

    #[test]
    fn normalization_factor() {
        let p = SimilarityParams::new(0.2).unwrap();
        let a = c0_scale_factor(&p, 2.0, 1.0).unwrap();
        assert!((a - 0.757_86).abs() < 1e-5);
        assert!((a.powi(3) - 0.435_28).abs() < 1e-5);
        assert_eq!(c0_scale_factor(&p, 1.5, 1.5).unwrap(), 1.0);
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(-10.0, -0.1, 9);
        assert_eq!(g.len(), 9);
        assert!((g[0] + 10.0).abs() < 1e-12);
        assert!((g[4] + 1.0).abs() < 1e-12);
        assert!((g[8] + 0.1).abs() < 1e-12);
    }

    #[test]
    fn bracket_expansion_keeps_sign() {
        assert_eq!(expand(Component::F1, -2.0, -1.0), (-4.0, -0.5));
        assert_eq!(expand(Component::F2, -1.0, 1.0), (-2.0, 2.0));
        assert_eq!(expand(Component::F0, 1.0, 2.0), (0.5, 4.0));
    }

    #[test]
    fn fig7b_shot() {
        let p = SimilarityParams::new(0.1).unwrap();
        let r = shoot(
            &p,
            &CauchyTriple::new(1.0, 0.0, 0.0),
            Component::F1,
            (-2.0, -0.01),
            &ShootConfig::default(),
        )
        .unwrap();
        assert!((r.tuned_value + 0.257_714).abs() < 1e-4, "{}", r.tuned_value);
        assert!(is_split(r.bracket_kinds.0, r.bracket_kinds.1));
        assert!(r.c0() > 0.0);
    }
}
