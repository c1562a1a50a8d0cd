//! Embedded Dormand-Prince 5(4) integrator with dense output and event location.
//!
//! Every ODE in this crate goes through [`integrate`]. The scheme is the
//! classical seven-stage FSAL pair with a PI step-size controller and the
//! quartic continuous extension, so a [`Trajectory`] can be evaluated
//! anywhere inside its span. Integration may run leftward (`end < start`).
//!
//! A step size that collapses below `1e-14 * max(1, |y|)` is not an error:
//! it is reported as [`Termination::StepFailure`], which callers read as the
//! approach to a singularity of the right-hand side.

use std::fmt;

use thiserror::Error;

/// Failure reported by a right-hand side that cannot be evaluated at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsError(pub String);

impl fmt::Display for RhsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for RhsError {}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("invalid integrator input: {0}")]
    InvalidInput(String),
    #[error("y = {y} lies outside the trajectory span [{lo}, {hi}]")]
    OutOfRange { y: f64, lo: f64, hi: f64 },
}

/// An initial value problem `state' = rhs(y, state)` on `span.0 -> span.1`.
pub struct OdeProblem<F> {
    pub dim: usize,
    pub rhs: F,
    pub span: (f64, f64),
}

impl<F> OdeProblem<F>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), RhsError>,
{
    pub fn new(dim: usize, span: (f64, f64), rhs: F) -> Self {
        Self { dim, rhs, span }
    }
}

/// Which sign changes of an event test count, measured along the direction
/// of integration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Any,
    /// test goes from negative to positive
    Rising,
    /// test goes from positive to negative
    Falling,
}

/// Event function `g(y, state)`; the event fires on a sign change.
pub type EventFn<'a> = Box<dyn Fn(f64, &[f64]) -> f64 + Send + Sync + 'a>;

pub struct EventSpec<'a> {
    pub id: usize,
    pub test: EventFn<'a>,
    pub direction: Crossing,
    pub terminal: bool,
}

impl<'a> EventSpec<'a> {
    pub fn new(
        id: usize,
        direction: Crossing,
        terminal: bool,
        test: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'a,
    ) -> Self {
        Self {
            id,
            test: Box::new(test),
            direction,
            terminal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    ReachedEnd,
    EventFired { id: usize, y: f64 },
    StepFailure { y: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub id: usize,
    pub y: f64,
    pub state: Vec<f64>,
}

/// Per-step continuous extension: `y0 + theta * h` with five coefficient
/// vectors (Hairer's `rcont` layout).
#[derive(Debug, Clone)]
struct DenseStep {
    y0: f64,
    h: f64,
    coeffs: Vec<f64>,
}

const NCOEF: usize = 5;

/// A sampled solution curve with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    ys: Vec<f64>,
    states: Vec<f64>,
    steps: Vec<DenseStep>,
    pub termination: Termination,
    pub events: Vec<EventRecord>,
    pub rtol: f64,
    pub atol: f64,
}

impl Trajectory {
    /// Builds a trajectory from samples, with piecewise linear dense output.
    /// Mostly useful for feeding synthetic curves to the classifiers.
    pub fn from_samples(ys: Vec<f64>, states: Vec<Vec<f64>>) -> Result<Self, OdeError> {
        if ys.len() < 2 || ys.len() != states.len() {
            return Err(OdeError::InvalidInput(
                "need at least two samples with matching states".into(),
            ));
        }
        let dim = states[0].len();
        if dim == 0 || states.iter().any(|s| s.len() != dim) {
            return Err(OdeError::InvalidInput("ragged state samples".into()));
        }
        let sign = (ys[1] - ys[0]).signum();
        if ys.windows(2).any(|w| (w[1] - w[0]) * sign <= 0.0) {
            return Err(OdeError::InvalidInput(
                "sample abscissae must be strictly monotone".into(),
            ));
        }
        let mut steps = Vec::with_capacity(ys.len() - 1);
        for i in 0..ys.len() - 1 {
            let mut coeffs = vec![0.0; NCOEF * dim];
            for k in 0..dim {
                coeffs[k] = states[i][k];
                coeffs[dim + k] = states[i + 1][k] - states[i][k];
            }
            steps.push(DenseStep {
                y0: ys[i],
                h: ys[i + 1] - ys[i],
                coeffs,
            });
        }
        Ok(Self {
            dim,
            ys,
            states: states.into_iter().flatten().collect(),
            steps,
            termination: Termination::ReachedEnd,
            events: Vec::new(),
            rtol: 0.0,
            atol: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.ys.iter().copied().zip(self.states.chunks_exact(self.dim))
    }

    pub fn first_y(&self) -> f64 {
        self.ys[0]
    }

    pub fn last_y(&self) -> f64 {
        *self.ys.last().unwrap()
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    /// `(min, max)` of the covered abscissae.
    pub fn bounds(&self) -> (f64, f64) {
        let (a, b) = (self.first_y(), self.last_y());
        (a.min(b), a.max(b))
    }

    fn forward(&self) -> bool {
        self.last_y() >= self.first_y()
    }

    /// Evaluates the continuous extension at `y`.
    pub fn dense_eval(&self, y: f64) -> Result<Vec<f64>, OdeError> {
        let mut out = vec![0.0; self.dim];
        self.dense_eval_into(y, &mut out)?;
        Ok(out)
    }

    pub fn dense_eval_into(&self, y: f64, out: &mut [f64]) -> Result<(), OdeError> {
        let (lo, hi) = self.bounds();
        if !(lo..=hi).contains(&y) {
            return Err(OdeError::OutOfRange { y, lo, hi });
        }
        // exact node hits return the stored node
        let idx = if self.forward() {
            self.ys.partition_point(|&v| v < y)
        } else {
            self.ys.partition_point(|&v| v > y)
        };
        if idx < self.ys.len() && self.ys[idx] == y {
            out.copy_from_slice(self.state(idx));
            return Ok(());
        }
        let step = &self.steps[idx.saturating_sub(1).min(self.steps.len() - 1)];
        eval_dense(step, self.dim, y, out);
        Ok(())
    }

    /// Uniform samples of one component over `[a, b]` (either order).
    pub fn sample_component(&self, k: usize, a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
        let mut buf = vec![0.0; self.dim];
        (0..n)
            .filter_map(|i| {
                let y = if n == 1 {
                    a
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                };
                self.dense_eval_into(y, &mut buf).ok().map(|_| (y, buf[k]))
            })
            .collect()
    }

    /// Applies `y -> scale_y * y` and a diagonal linear map to the states.
    /// The dense coefficients transform exactly.
    pub fn map_linear(&self, scale_y: f64, state_scale: &[f64]) -> Trajectory {
        assert_eq!(state_scale.len(), self.dim);
        let dim = self.dim;
        let scale_vec = |v: &[f64]| -> Vec<f64> {
            v.chunks_exact(dim)
                .flat_map(|c| c.iter().zip(state_scale).map(|(x, s)| x * s))
                .collect()
        };
        let steps = self
            .steps
            .iter()
            .map(|s| DenseStep {
                y0: s.y0 * scale_y,
                h: s.h * scale_y,
                coeffs: scale_vec(&s.coeffs),
            })
            .collect();
        Trajectory {
            dim,
            ys: self.ys.iter().map(|y| y * scale_y).collect(),
            states: scale_vec(&self.states),
            steps,
            termination: match &self.termination {
                Termination::EventFired { id, y } => Termination::EventFired {
                    id: *id,
                    y: y * scale_y,
                },
                Termination::StepFailure { y, reason } => Termination::StepFailure {
                    y: y * scale_y,
                    reason: reason.clone(),
                },
                Termination::ReachedEnd => Termination::ReachedEnd,
            },
            events: self
                .events
                .iter()
                .map(|e| EventRecord {
                    id: e.id,
                    y: e.y * scale_y,
                    state: e.state.iter().zip(state_scale).map(|(x, s)| x * s).collect(),
                })
                .collect(),
            rtol: self.rtol,
            atol: self.atol,
        }
    }
}

fn eval_dense(step: &DenseStep, dim: usize, y: f64, out: &mut [f64]) {
    let theta = (y - step.y0) / step.h;
    let theta1 = 1.0 - theta;
    let c = &step.coeffs;
    for k in 0..dim {
        out[k] = c[k]
            + theta * (c[dim + k] + theta1 * (c[2 * dim + k] + theta * (c[3 * dim + k] + theta1 * c[4 * dim + k])));
    }
}

// Dormand-Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const PI_BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const STEP_FLOOR: f64 = 1e-14;
const MAX_STEPS: usize = 2_000_000;

/// Integrates `problem` from `initial`, stopping at the span end, at the first
/// terminal event, or when the step size collapses.
pub fn integrate<F>(
    problem: &OdeProblem<F>,
    initial: &[f64],
    rtol: f64,
    atol: f64,
    events: &[EventSpec<'_>],
) -> Result<Trajectory, OdeError>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), RhsError>,
{
    let dim = problem.dim;
    if dim == 0 {
        return Err(OdeError::InvalidInput("dimension must be at least 1".into()));
    }
    if initial.len() != dim {
        return Err(OdeError::InvalidInput(format!(
            "initial state has length {} but dimension is {}",
            initial.len(),
            dim
        )));
    }
    if !(rtol > 0.0 && atol > 0.0) {
        return Err(OdeError::InvalidInput("rtol and atol must be positive".into()));
    }
    let (y_start, y_end) = problem.span;
    if !(y_start.is_finite() && y_end.is_finite()) || y_start == y_end {
        return Err(OdeError::InvalidInput("span must be finite and non-empty".into()));
    }
    if initial.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::InvalidInput("initial state is not finite".into()));
    }
    let dir = (y_end - y_start).signum();
    let span_len = (y_end - y_start).abs();

    let mut traj = Trajectory {
        dim,
        ys: vec![y_start],
        states: initial.to_vec(),
        steps: Vec::new(),
        termination: Termination::ReachedEnd,
        events: Vec::new(),
        rtol,
        atol,
    };

    let rhs = &problem.rhs;
    let mut y = y_start;
    let mut x = initial.to_vec();
    let mut k1 = vec![0.0; dim];
    if let Err(e) = rhs(y, &x, &mut k1) {
        traj.termination = Termination::StepFailure {
            y,
            reason: format!("rhs failure: {e}"),
        };
        return Ok(traj);
    }
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
        vec![0.0; dim],
    );
    let mut tmp = vec![0.0; dim];
    let mut x_new = vec![0.0; dim];
    let mut err_vec = vec![0.0; dim];

    let mut event_vals: Vec<f64> = events.iter().map(|e| (e.test)(y, &x)).collect();

    let mut h = dir * 1e-4 * span_len;
    let mut fac_old: f64 = 1e-4;
    let mut last_rejected = false;

    for _ in 0..MAX_STEPS {
        let remaining = (y_end - y) * dir;
        if remaining <= 0.0 {
            break;
        }
        if h.abs() > remaining {
            h = dir * remaining;
        }
        if h.abs() < STEP_FLOOR * y.abs().max(1.0) {
            traj.termination = Termination::StepFailure {
                y,
                reason: format!("step size {:.3e} below floor", h.abs()),
            };
            return Ok(traj);
        }

        // stages
        let stage = |coef: &[(f64, &Vec<f64>)], out: &mut Vec<f64>| {
            for i in 0..dim {
                let mut acc = 0.0;
                for (c, k) in coef {
                    acc += c * k[i];
                }
                out[i] = x[i] + h * acc;
            }
        };
        let mut failure: Option<String> = None;
        macro_rules! eval {
            ($yy:expr, $k:expr) => {
                if failure.is_none() {
                    if let Err(e) = rhs($yy, &tmp, &mut $k) {
                        failure = Some(e.0);
                    }
                }
            };
        }
        stage(&[(A21, &k1)], &mut tmp);
        eval!(y + C2 * h, k2);
        stage(&[(A31, &k1), (A32, &k2)], &mut tmp);
        eval!(y + C3 * h, k3);
        stage(&[(A41, &k1), (A42, &k2), (A43, &k3)], &mut tmp);
        eval!(y + C4 * h, k4);
        stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], &mut tmp);
        eval!(y + C5 * h, k5);
        stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], &mut tmp);
        eval!(y + h, k6);
        for i in 0..dim {
            x_new[i] = x[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        tmp.copy_from_slice(&x_new);
        eval!(y + h, k7);
        if let Some(reason) = failure {
            traj.termination = Termination::StepFailure {
                y,
                reason: format!("rhs failure: {reason}"),
            };
            return Ok(traj);
        }

        let mut err = 0.0;
        let mut finite = true;
        for i in 0..dim {
            err_vec[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = atol + rtol * x[i].abs().max(x_new[i].abs());
            err += (err_vec[i] / sc).powi(2);
            finite &= x_new[i].is_finite() && k7[i].is_finite();
        }
        err = (err / dim as f64).sqrt();
        if !finite || !err.is_finite() {
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(0.2 - PI_BETA * 0.75);
        if err <= 1.0 {
            // accepted
            let mut fac = fac11 / fac_old.powf(PI_BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if last_rejected && h_new.abs() > h.abs() {
                h_new = h;
            }
            fac_old = err.max(1e-4);
            last_rejected = false;

            let mut coeffs = vec![0.0; NCOEF * dim];
            for i in 0..dim {
                let ydiff = x_new[i] - x[i];
                let bspl = h * k1[i] - ydiff;
                coeffs[i] = x[i];
                coeffs[dim + i] = ydiff;
                coeffs[2 * dim + i] = bspl;
                coeffs[3 * dim + i] = ydiff - h * k7[i] - bspl;
                coeffs[4 * dim + i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            let step = DenseStep { y0: y, h, coeffs };
            let y_next = if (y + h - y_end) * dir >= 0.0 { y_end } else { y + h };

            // events
            let mut fired: Option<(usize, f64)> = None;
            let mut buf = vec![0.0; dim];
            let mut pending: Vec<EventRecord> = Vec::new();
            for (j, ev) in events.iter().enumerate() {
                let g_new = (ev.test)(y_next, &x_new);
                let g_old = event_vals[j];
                event_vals[j] = g_new;
                if !crossed(g_old, g_new, ev.direction) {
                    continue;
                }
                let loc = locate_event(ev, &step, dim, y, y_next, g_old, rtol, &mut buf);
                eval_dense(&step, dim, loc, &mut buf);
                pending.push(EventRecord {
                    id: ev.id,
                    y: loc,
                    state: buf.clone(),
                });
                if ev.terminal && fired.is_none_or(|(_, yf)| (loc - yf) * dir < 0.0) {
                    fired = Some((ev.id, loc));
                }
            }
            pending.sort_by(|a, b| ((a.y - b.y) * dir).total_cmp(&0.0));
            traj.steps.push(step);
            if let Some((id, loc)) = fired {
                pending.retain(|e| (e.y - loc) * dir <= 0.0);
                traj.events.extend(pending);
                eval_dense(traj.steps.last().unwrap(), dim, loc, &mut buf);
                if loc != y {
                    traj.ys.push(loc);
                    traj.states.extend_from_slice(&buf);
                } else {
                    traj.steps.pop();
                }
                traj.termination = Termination::EventFired { id, y: loc };
                return Ok(traj);
            }
            traj.events.extend(pending);

            y = y_next;
            x.copy_from_slice(&x_new);
            k1.copy_from_slice(&k7);
            traj.ys.push(y);
            traj.states.extend_from_slice(&x);
            h = h_new;
        } else {
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
    if (y_end - y) * dir > 0.0 {
        traj.termination = Termination::StepFailure {
            y,
            reason: "maximum number of steps exceeded".into(),
        };
    }
    Ok(traj)
}

fn crossed(g_old: f64, g_new: f64, dir: Crossing) -> bool {
    if !(g_old.is_finite() && g_new.is_finite()) {
        return false;
    }
    let rising = g_old < 0.0 && g_new >= 0.0;
    let falling = g_old > 0.0 && g_new <= 0.0;
    match dir {
        Crossing::Any => rising || falling,
        Crossing::Rising => rising,
        Crossing::Falling => falling,
    }
}

#[allow(clippy::too_many_arguments)]
fn locate_event(
    ev: &EventSpec<'_>,
    step: &DenseStep,
    dim: usize,
    y0: f64,
    y1: f64,
    g0: f64,
    rtol: f64,
    buf: &mut [f64],
) -> f64 {
    let (mut a, mut b) = (y0, y1);
    let mut ga = g0;
    for _ in 0..200 {
        let width = (b - a).abs();
        let scale = a.abs().max(b.abs()).max(1.0);
        if width <= (rtol * scale).min(1e-9 * scale).max(4.0 * f64::EPSILON * scale) {
            break;
        }
        let m = 0.5 * (a + b);
        eval_dense(step, dim, m, buf);
        let gm = (ev.test)(m, buf);
        if gm.is_finite() && (ga < 0.0) == (gm < 0.0) && gm != 0.0 {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[allow(clippy::type_complexity)]
    fn decay() -> OdeProblem<impl Fn(f64, &[f64], &mut [f64]) -> Result<(), RhsError>> {
        OdeProblem::new(1, (0.0, 1.0), |_y, s: &[f64], d: &mut [f64]| {
            d[0] = -s[0];
            Ok(())
        })
    }

    #[test]
    fn exponential_decay_endpoint() {
        let t = integrate(&decay(), &[1.0], 1e-9, 1e-9, &[]).unwrap();
        assert_eq!(t.termination, Termination::ReachedEnd);
        assert_eq!(t.last_y(), 1.0);
        assert!((t.last_state()[0] - 0.367_879_4).abs() < 1e-7);
    }

    #[test]
    fn oscillator_energy_drift() {
        let p = OdeProblem::new(2, (0.0, 2.0 * std::f64::consts::PI), |_y, s: &[f64], d: &mut [f64]| {
            d[0] = s[1];
            d[1] = -s[0];
            Ok(())
        });
        let t = integrate(&p, &[1.0, 0.0], 1e-9, 1e-9, &[]).unwrap();
        let s = t.last_state();
        assert!((s[0] * s[0] + s[1] * s[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn dense_output_at_nodes_and_midpoints() {
        let t = integrate(&decay(), &[1.0], 1e-9, 1e-12, &[]).unwrap();
        for (y, s) in t.nodes() {
            assert_eq!(t.dense_eval(y).unwrap(), s.to_vec());
        }
        for w in t.ys().windows(2) {
            let m = 0.5 * (w[0] + w[1]);
            let v = t.dense_eval(m).unwrap()[0];
            let tol = 1e-9 * v.abs() + 1e-12;
            assert!((v - (-m).exp()).abs() < 10.0 * tol, "y={m}");
        }
    }

    #[test]
    fn dense_output_reproduces_lines() {
        let p = OdeProblem::new(1, (0.0, 3.0), |_y, _s: &[f64], d: &mut [f64]| {
            d[0] = 1.0;
            Ok(())
        });
        let t = integrate(&p, &[0.5], 1e-8, 1e-8, &[]).unwrap();
        for w in t.ys().windows(2) {
            let m = 0.5 * (w[0] + w[1]);
            assert!((t.dense_eval(m).unwrap()[0] - (0.5 + m)).abs() < 1e-14);
        }
    }

    #[test]
    fn out_of_span_is_range_error() {
        let t = integrate(&decay(), &[1.0], 1e-9, 1e-9, &[]).unwrap();
        assert!(matches!(t.dense_eval(1.5), Err(OdeError::OutOfRange { .. })));
        assert!(matches!(t.dense_eval(-0.1), Err(OdeError::OutOfRange { .. })));
    }

    #[test]
    fn order_of_the_pair() {
        let err = |tol: f64| {
            let t = integrate(&decay(), &[1.0], tol, tol, &[]).unwrap();
            (t.last_state()[0] - (-1.0f64).exp()).abs()
        };
        let coarse = err(1e-5);
        let fine = err(1e-9);
        assert!(coarse / fine >= 1e3, "ratio {}", coarse / fine);
    }

    #[test]
    fn leftward_and_back() {
        let rhs = |y: f64, s: &[f64], d: &mut [f64]| {
            d[0] = s[1];
            d[1] = -s[0] * (1.0 + 0.1 * y.sin());
            Ok(())
        };
        let fwd = integrate(&OdeProblem::new(2, (0.0, 3.0), rhs), &[1.0, 0.5], 1e-10, 1e-10, &[]).unwrap();
        let back = integrate(
            &OdeProblem::new(2, (3.0, 0.0), rhs),
            fwd.last_state(),
            1e-10,
            1e-10,
            &[],
        )
        .unwrap();
        let s = back.last_state();
        assert!((s[0] - 1.0).abs() < 10.0 * 2e-10 * 10.0);
        assert!((s[1] - 0.5).abs() < 10.0 * 2e-10 * 10.0);
    }

    #[test]
    fn event_located_on_linear_problem() {
        // x' = -1 from 2: crosses zero at y = 2
        let p = OdeProblem::new(1, (0.0, 5.0), |_y, _s: &[f64], d: &mut [f64]| {
            d[0] = -1.0;
            Ok(())
        });
        let ev = [EventSpec::new(7, Crossing::Falling, true, |_y, s| s[0])];
        let t = integrate(&p, &[2.0], 1e-10, 1e-10, &ev).unwrap();
        match t.termination {
            Termination::EventFired { id, y } => {
                assert_eq!(id, 7);
                assert!((y - 2.0).abs() <= 1e-10 * 2.0);
            }
            ref other => panic!("unexpected {other:?}"),
        }
        assert_eq!(t.last_y(), t.events[0].y);
    }

    #[test]
    fn event_direction_filter() {
        let p = OdeProblem::new(1, (0.0, 5.0), |_y, _s: &[f64], d: &mut [f64]| {
            d[0] = -1.0;
            Ok(())
        });
        let ev = [EventSpec::new(1, Crossing::Rising, true, |_y, s| s[0])];
        let t = integrate(&p, &[2.0], 1e-10, 1e-10, &ev).unwrap();
        assert_eq!(t.termination, Termination::ReachedEnd);
    }

    #[test]
    fn singular_rhs_collapses_step() {
        // x' = -1/x reaches x = 0 at y = 0.5 with x ~ sqrt(1 - 2y)
        let p = OdeProblem::new(1, (0.0, 1.0), |_y, s: &[f64], d: &mut [f64]| {
            if s[0] <= 0.0 {
                return Err(RhsError("x <= 0".into()));
            }
            d[0] = -1.0 / s[0];
            Ok(())
        });
        let t = integrate(&p, &[1.0], 1e-10, 1e-12, &[]).unwrap();
        match t.termination {
            Termination::StepFailure { y, .. } => assert!((y - 0.5).abs() < 1e-3),
            ref other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(integrate(&decay(), &[1.0, 2.0], 1e-9, 1e-9, &[]).is_err());
        assert!(integrate(&decay(), &[1.0], 0.0, 1e-9, &[]).is_err());
    }

    #[test]
    fn linear_map_of_dense_output() {
        let t = integrate(&decay(), &[1.0], 1e-9, 1e-12, &[]).unwrap();
        let m = t.map_linear(-2.0, &[3.0]);
        for y in [0.1, 0.37, 0.8] {
            let a = t.dense_eval(y).unwrap()[0];
            let b = m.dense_eval(-2.0 * y).unwrap()[0];
            assert!((3.0 * a - b).abs() < 1e-15);
        }
    }
}
