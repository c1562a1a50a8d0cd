//! Integration of profile orbits and their classification into bundles.
//!
//! Leftward from the origin an orbit ends in one of three ways:
//! it reaches zero at finite `y` (extinction, where the degenerate term
//! `f f'''` makes the ODE singular), it is captured by the explicit cubic
//! `|y|^3 / 60` (cubic growth), or it settles onto the power law
//! `C0 |y|^(alpha/beta)` (matched).

use crate::error::{Error, Result};
use crate::odeint::{integrate, Crossing, EventSpec, OdeProblem, Termination, Trajectory};
use crate::similarity::{profile_rhs, Side, SimilarityParams};
use crate::tail::{estimate_tail_c0, TailAsymptotics};

pub const EXTINCTION_EVENT: usize = 0;
pub const GROWTH_EVENT: usize = 1;

/// Bundle membership thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// extinction when `f < eps_ext_rel * max(1, scale)`
    pub eps_ext_rel: f64,
    /// cubic growth when `|f| >= theta |y|^3 / 60` ...
    pub theta: f64,
    /// ... at `|y| >= y_detect` ...
    pub y_detect: f64,
    /// ... while the local log-slope `d ln f / d ln |y|` is at least this.
    pub slope_gate: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            eps_ext_rel: 1e-9,
            theta: 0.5,
            y_detect: 5.0,
            slope_gate: 2.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub rtol: f64,
    pub atol: f64,
    pub y_end: f64,
    pub thresholds: Thresholds,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            y_end: -200.0,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BundleKind {
    /// bundle I
    Extinction,
    /// bundle II
    CubicGrowth,
    Matched,
}

impl BundleKind {
    pub fn label(self) -> &'static str {
        match self {
            BundleKind::Extinction => "I",
            BundleKind::CubicGrowth => "II",
            BundleKind::Matched => "matched",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShotClassification {
    pub kind: BundleKind,
    pub trigger_y: Option<f64>,
    /// Profile value at extinction, or `|f| / (|y|^3/60)` at a growth trigger.
    pub diagnostic: f64,
    pub tail: Option<TailAsymptotics>,
}

fn growth_test(side: Side, th: Thresholds, y: f64, s: &[f64]) -> f64 {
    let abs_y = -y;
    let f = s[0];
    if f <= 0.0 || abs_y <= 0.0 {
        return -1.0;
    }
    // the cubic attractor has the sign of f only on the extension side
    let cubic = -side.cubic_sign() * abs_y.powi(3) / 60.0;
    let ratio = f / (th.theta * cubic) - 1.0;
    let slope = abs_y * (-s[1]) / f - th.slope_gate;
    (abs_y - th.y_detect).min(ratio).min(slope)
}

fn extinction_level(th: Thresholds, scale: f64) -> f64 {
    th.eps_ext_rel * scale.max(1.0)
}

/// Integrates a profile orbit leftward from `(y0, state0)` to `cfg.y_end`,
/// stopping on extinction or cubic growth. `scale` sets the extinction level.
pub fn integrate_profile(
    side: Side,
    p: &SimilarityParams,
    y0: f64,
    state0: [f64; 3],
    scale: f64,
    cfg: &SolveConfig,
) -> Result<Trajectory> {
    let th = cfg.thresholds;
    let eps = extinction_level(th, scale);
    let problem = OdeProblem::new(3, (y0, cfg.y_end), profile_rhs(side, *p));
    let events = [
        EventSpec::new(EXTINCTION_EVENT, Crossing::Falling, true, move |_y, s| s[0] - eps),
        EventSpec::new(GROWTH_EVENT, Crossing::Rising, true, move |y, s| {
            growth_test(side, th, y, s)
        }),
    ];
    Ok(integrate(&problem, &state0, cfg.rtol, cfg.atol, &events)?)
}

/// Classifies a leftward orbit by scanning its nodes. `scale` is the same
/// extinction scale used to integrate it. With `fit_tail`, an orbit that
/// reaches the end of its span is fitted on the last half of the span and is
/// reported as matched only if that fit succeeds.
pub fn classify_trajectory(
    traj: &Trajectory,
    side: Side,
    p: &SimilarityParams,
    th: Thresholds,
    scale: f64,
    fit_tail: bool,
) -> Result<ShotClassification> {
    let eps = extinction_level(th, scale);
    let mut ext: Option<usize> = None;
    let mut grow: Option<usize> = None;
    for (i, (y, s)) in traj.nodes().enumerate() {
        if ext.is_none() && s[0] < eps {
            ext = Some(i);
        }
        if grow.is_none() && growth_test(side, th, y, s) >= 0.0 {
            grow = Some(i);
        }
        if ext.is_some() || grow.is_some() {
            break;
        }
    }
    let ys = traj.ys();
    match (ext, grow) {
        (Some(_), Some(_)) => {
            return Err(Error::Classification(format!(
                "both bundle triggers inside the step ending at y = {}",
                ys[ext.unwrap()]
            )))
        }
        (Some(i), None) => {
            return Ok(ShotClassification {
                kind: BundleKind::Extinction,
                trigger_y: Some(ys[i]),
                diagnostic: traj.state(i)[0],
                tail: None,
            })
        }
        (None, Some(i)) => {
            let abs_y = -ys[i];
            return Ok(ShotClassification {
                kind: BundleKind::CubicGrowth,
                trigger_y: Some(ys[i]),
                diagnostic: traj.state(i)[0].abs() / (abs_y.powi(3) / 60.0),
                tail: None,
            });
        }
        (None, None) => {}
    }
    if let Termination::StepFailure { y, .. } = traj.termination {
        // the only singularity of the profile ODE is f = 0
        return Ok(ShotClassification {
            kind: BundleKind::Extinction,
            trigger_y: Some(y),
            diagnostic: traj.last_state()[0],
            tail: None,
        });
    }
    let y_last = traj.last_y();
    let f_last = traj.last_state()[0];
    let abs_y = -y_last;
    if abs_y > 0.0 {
        let ratio = -side.cubic_sign() * f_last / (abs_y.powi(3) / 60.0);
        if ratio >= th.theta {
            return Ok(ShotClassification {
                kind: BundleKind::CubicGrowth,
                trigger_y: Some(y_last),
                diagnostic: ratio,
                tail: None,
            });
        }
    }
    let tail = if fit_tail {
        if y_last >= -10.0 {
            return Err(Error::Classification(format!(
                "orbit ends at y = {y_last}, too short for a tail fit"
            )));
        }
        Some(
            estimate_tail_c0(traj, side, p, (y_last, 0.5 * y_last))
                .map_err(|e| Error::Classification(format!("reached y = {y_last} but tail fit failed: {e}")))?,
        )
    } else {
        None
    };
    Ok(ShotClassification {
        kind: BundleKind::Matched,
        trigger_y: None,
        diagnostic: f_last,
        tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> (f64, f64)) -> Trajectory {
        let ys: Vec<f64> = (0..=1990).map(|i| -1.0 - 0.1 * i as f64).collect();
        let states = ys
            .iter()
            .map(|&y| {
                let (v, d) = f(y);
                vec![v, d, 0.0]
            })
            .collect();
        Trajectory::from_samples(ys, states).unwrap()
    }

    #[test]
    fn constructed_cubic_growth() {
        let p = SimilarityParams::new(0.1).unwrap();
        let t = synthetic(|y| (1.01 * (-y).powi(3) / 60.0, -1.01 * 3.0 * y * y / 60.0));
        let c = classify_trajectory(&t, Side::Extension, &p, Thresholds::default(), 1.0, false).unwrap();
        assert_eq!(c.kind, BundleKind::CubicGrowth);
        let ty = c.trigger_y.unwrap();
        assert!(ty <= -5.0 && ty > -5.1 - 1e-12, "{ty}");
    }

    #[test]
    fn constructed_extinction() {
        let p = SimilarityParams::new(0.1).unwrap();
        let t = synthetic(|y| ((1.0 + y / 10.0).max(-1.0) + 1e-13, 0.1));
        let c = classify_trajectory(&t, Side::Extension, &p, Thresholds::default(), 1.0, false).unwrap();
        assert_eq!(c.kind, BundleKind::Extinction);
        assert!((c.trigger_y.unwrap() + 10.0).abs() < 0.11);
    }

    #[test]
    fn constructed_power_law_is_matched() {
        let p = SimilarityParams::new(0.2).unwrap();
        let t = synthetic(|y| (2.0 * (-y).sqrt(), 1.0 / (-y).sqrt().max(1e-3)));
        let c = classify_trajectory(&t, Side::Extension, &p, Thresholds::default(), 1.0, true).unwrap();
        assert_eq!(c.kind, BundleKind::Matched);
        assert!((c.tail.unwrap().c0 - 2.0).abs() < 1e-3);
    }
}
