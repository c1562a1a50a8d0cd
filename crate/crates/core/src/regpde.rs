//! Method of lines for the regularized problem
//! `v_tau = (v v_y)_yy - v_yyyy` on `(-L, 0)`.
//!
//! The solution is odd about `y = 0`: `v(0) = 0` and ghost values beyond the
//! origin are `v(dy k) = -v(-dy k)`. At `y = -L` the value and slope are held
//! at fixed data. Time stepping is classical RK4 with
//! `dt = cfl dy^4 / (1 + max |v|)`.
//!
//! Solutions map to the physical problem with `eps > 0` by
//! `u(x, t) = eps^(1/3) v(x / eps^(2/3), t / eps^(5/3))`.

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 64;
/// `max |v|` above which a run is aborted.
pub const BLOWUP_GUARD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub l: f64,
    pub n: usize,
    pub dy: f64,
}

impl Grid {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Range(format!("L = {l} must be positive")));
        }
        if n < MIN_NODES {
            return Err(Error::Range(format!("n = {n} below the stencil minimum {MIN_NODES}")));
        }
        Ok(Self { l, n, dy: l / n as f64 })
    }

    /// `y_i = -L + i dy`; `y_n = 0` exactly.
    pub fn y(&self, i: usize) -> f64 {
        if i == self.n {
            0.0
        } else {
            -self.l + i as f64 * self.dy
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.y(i)).collect()
    }
}

/// Held data at `y = -L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeftClamp {
    pub v: f64,
    pub vy: f64,
}

impl LeftClamp {
    /// Values of `sqrt(|y|)` at `y = -L`.
    pub fn blowup_data(l: f64) -> Self {
        Self {
            v: l.sqrt(),
            vy: -0.5 / l.sqrt(),
        }
    }

    pub fn homogeneous() -> Self {
        Self { v: 0.0, vy: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub tau: f64,
    /// `v_0 .. v_n`
    pub values: Vec<f64>,
}

impl Field {
    /// Samples `v` at the nodes. The value at `y = 0` must vanish.
    pub fn from_fn(grid: &Grid, v: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(v).collect())
    }

    pub fn new(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n + 1 {
            return Err(Error::Range(format!(
                "{} values for {} nodes",
                values.len(),
                grid.n + 1
            )));
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if values[grid.n].abs() > 1e-14 * scale.max(1.0) {
            return Err(Error::Range(format!(
                "v(0) = {} is not zero; data is not odd about the origin",
                values[grid.n]
            )));
        }
        let mut values = values;
        values[grid.n] = 0.0;
        Ok(Self { tau: 0.0, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Discrete L2 norm over `(-L, 0)`.
    pub fn l2(&self, grid: &Grid) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * grid.dy).sqrt()
    }

    /// Odd extension onto `[-L, L]`.
    pub fn odd_extension(&self, grid: &Grid) -> Vec<(f64, f64)> {
        let n = grid.n;
        let mut out: Vec<(f64, f64)> = (0..=n).map(|i| (grid.y(i), self.values[i])).collect();
        out.extend((1..=n).map(|k| (-grid.y(n - k), -self.values[n - k])));
        out
    }

    /// Linear interpolation in `y`.
    pub fn at(&self, grid: &Grid, y: f64) -> Option<f64> {
        if !(y >= -grid.l && y <= 0.0) {
            return None;
        }
        let s = (y + grid.l) / grid.dy;
        let i = (s.floor() as usize).min(grid.n - 1);
        let w = s - i as f64;
        Some((1.0 - w) * self.values[i] + w * self.values[i + 1])
    }
}

/// `-sign(y) sqrt(|y|)`, equal to `sqrt(|y|)` on the grid.
pub fn blowup_initial_field(grid: &Grid) -> Result<Field> {
    Field::from_fn(grid, |y| -y.signum() * y.abs().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Operator {
    pub clamp: LeftClamp,
    /// switch for the `(v v_y)_yy` term
    pub nonlinear: bool,
}

impl Operator {
    pub fn new(clamp: LeftClamp) -> Self {
        Self { clamp, nonlinear: true }
    }

    pub fn linear(clamp: LeftClamp) -> Self {
        Self {
            clamp,
            nonlinear: false,
        }
    }
}

struct Workspace {
    ext: Vec<f64>,
    flux: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            ext: vec![0.0; n + 5],
            flux: vec![0.0; n + 1],
        }
    }
}

/// `ext[i + 2] = v_i` for `i = -2 ..= n + 2`.
fn fill_ghosts(v: &[f64], grid: &Grid, clamp: &LeftClamp, ext: &mut [f64]) {
    let n = grid.n;
    ext[2..n + 3].copy_from_slice(v);
    ext[1] = v[1] - 2.0 * grid.dy * clamp.vy;
    ext[0] = ext[1];
    for k in 1..=2 {
        ext[n + 2 + k] = -v[n - k];
    }
}

fn rhs_into(v: &[f64], grid: &Grid, op: &Operator, ws: &mut Workspace, out: &mut [f64]) {
    let n = grid.n;
    let h = grid.dy;
    fill_ghosts(v, grid, &op.clamp, &mut ws.ext);
    let e = &ws.ext;
    let at = |i: usize| e[i + 2];
    if op.nonlinear {
        for j in 0..=n {
            ws.flux[j] = at(j) * (e[j + 3] - e[j + 1]) / (2.0 * h);
        }
    }
    let (h2, h4) = (h * h, h * h * h * h);
    out[0] = 0.0;
    out[n] = 0.0;
    for i in 1..n {
        let d4 = (e[i] - 4.0 * e[i + 1] + 6.0 * at(i) - 4.0 * e[i + 3] + e[i + 4]) / h4;
        let nl = if op.nonlinear {
            (ws.flux[i + 1] - 2.0 * ws.flux[i] + ws.flux[i - 1]) / h2
        } else {
            0.0
        };
        out[i] = nl - d4;
    }
}

/// Semidiscrete right-hand side at every node; zero at the held nodes.
pub fn rhs_semidiscrete(field: &Field, grid: &Grid, op: &Operator) -> Vec<f64> {
    let mut ws = Workspace::new(grid.n);
    let mut out = vec![0.0; grid.n + 1];
    rhs_into(&field.values, grid, op, &mut ws, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Completed,
    Aborted { tau: f64, reason: String },
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub snapshots: Vec<Field>,
    pub status: RunStatus,
    pub steps: u64,
    /// L2 norm after every step, when requested
    pub l2_history: Vec<f64>,
}

impl Evolution {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub cfl: f64,
    pub record_l2: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            cfl: 0.25,
            record_l2: false,
        }
    }
}

/// RK4 from `field0` through the increasing snapshot times `taus`.
pub fn evolve(field0: &Field, grid: &Grid, op: &Operator, taus: &[f64], opts: &EvolveOptions) -> Result<Evolution> {
    if !(opts.cfl > 0.0 && opts.cfl <= 0.5) {
        return Err(Error::Range(format!("cfl = {} outside (0, 0.5]", opts.cfl)));
    }
    if taus.is_empty() || !(taus[0] > field0.tau) || taus.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Range("snapshot times must increase past the start".into()));
    }
    let n = grid.n;
    let dy4 = grid.dy.powi(4);
    let mut ws = Workspace::new(n);
    let mut v = field0.values.clone();
    let mut tau = field0.tau;
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![0.0; n + 1],
        vec![0.0; n + 1],
        vec![0.0; n + 1],
        vec![0.0; n + 1],
        vec![0.0; n + 1],
    );
    let mut snapshots = Vec::with_capacity(taus.len());
    let mut l2_history = Vec::new();
    let mut steps = 0u64;
    for &target in taus {
        while tau < target {
            let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let mut dt = opts.cfl * dy4 / (1.0 + vmax);
            let last = tau + dt >= target;
            if last {
                dt = target - tau;
            }
            rhs_into(&v, grid, op, &mut ws, &mut k1);
            for i in 0..=n {
                tmp[i] = v[i] + 0.5 * dt * k1[i];
            }
            rhs_into(&tmp, grid, op, &mut ws, &mut k2);
            for i in 0..=n {
                tmp[i] = v[i] + 0.5 * dt * k2[i];
            }
            rhs_into(&tmp, grid, op, &mut ws, &mut k3);
            for i in 0..=n {
                tmp[i] = v[i] + dt * k3[i];
            }
            rhs_into(&tmp, grid, op, &mut ws, &mut k4);
            let mut vmax = 0.0f64;
            let mut finite = true;
            for i in 0..=n {
                v[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                finite &= v[i].is_finite();
                vmax = vmax.max(v[i].abs());
            }
            tau = if last { target } else { tau + dt };
            steps += 1;
            if opts.record_l2 {
                l2_history.push((v.iter().map(|x| x * x).sum::<f64>() * grid.dy).sqrt());
            }
            if !finite || vmax > BLOWUP_GUARD {
                let reason = if finite {
                    format!("max |v| = {vmax:e} exceeds {BLOWUP_GUARD:e}")
                } else {
                    "non-finite values".to_string()
                };
                return Ok(Evolution {
                    snapshots,
                    status: RunStatus::Aborted { tau, reason },
                    steps,
                    l2_history,
                });
            }
        }
        snapshots.push(Field { tau, values: v.clone() });
    }
    Ok(Evolution {
        snapshots,
        status: RunStatus::Completed,
        steps,
        l2_history,
    })
}

/// Largest `|v(y) + v(-y)|` over the odd extension of a snapshot.
pub fn odd_symmetry_defect(field: &Field, grid: &Grid) -> f64 {
    let ext = field.odd_extension(grid);
    let m = grid.n;
    (0..=m)
        .map(|k| (ext[m - k].1 + if k == 0 { ext[m].1 } else { ext[m + k].1 }).abs())
        .fold(0.0, f64::max)
}

/// Maximum error of the discrete operator on `v = y^3` against `60 y^3`,
/// over `y >= -L/2`.
pub fn manufactured_cubic_error(l: f64, n: usize) -> Result<f64> {
    let grid = Grid::new(l, n)?;
    let field = Field::from_fn(&grid, |y| y.powi(3))?;
    let op = Operator::new(LeftClamp {
        v: -l.powi(3),
        vy: 3.0 * l * l,
    });
    let r = rhs_semidiscrete(&field, &grid, &op);
    Ok((0..n)
        .filter(|&i| grid.y(i) >= -0.5 * l)
        .map(|i| (r[i] - 60.0 * grid.y(i).powi(3)).abs())
        .fold(0.0, f64::max))
}

/// A sample mapped to physical variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalSample {
    pub x: f64,
    pub t: f64,
    pub u: f64,
}

pub fn rescale_to_physical(y: f64, tau: f64, v: f64, eps: f64) -> Result<PhysicalSample> {
    if !(eps > 0.0) {
        return Err(Error::Range(format!("eps = {eps} must be positive")));
    }
    Ok(PhysicalSample {
        x: eps.powf(2.0 / 3.0) * y,
        t: eps.powf(5.0 / 3.0) * tau,
        u: eps.cbrt() * v,
    })
}

/// Rescaled variables `(y, tau)` that sample `u_eps(x, t)`.
pub fn rescaled_point(x: f64, t: f64, eps: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0) {
        return Err(Error::Range(format!("eps = {eps} must be positive")));
    }
    Ok((x / eps.powf(2.0 / 3.0), t / eps.powf(5.0 / 3.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub eps: f64,
    pub x: f64,
    pub t: f64,
    pub y: f64,
    pub tau: f64,
    /// `u_eps(x, t)`, absent when `(y, tau)` is not covered by the samples
    pub u: Option<f64>,
}

/// Tabulates `u_eps_k(x_k, t)` for paired sequences; `v(y, tau)` looks up
/// the rescaled solution.
pub fn limit_probe(eps: &[f64], xs: &[f64], t: f64, v: impl Fn(f64, f64) -> Option<f64>) -> Result<Vec<ProbeRow>> {
    if eps.len() != xs.len() {
        return Err(Error::Range("eps and x sequences differ in length".into()));
    }
    eps.iter()
        .zip(xs)
        .map(|(&e, &x)| {
            let (y, tau) = rescaled_point(x, t, e)?;
            Ok(ProbeRow {
                eps: e,
                x,
                t,
                y,
                tau,
                u: v(y, tau).map(|val| e.cbrt() * val),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = Grid::new(10.0, 1000).unwrap();
        assert!((g.dy - 0.01).abs() < 1e-15);
        assert_eq!(g.y(1000), 0.0);
        assert_eq!(g.y(0), -10.0);
        assert!(Grid::new(10.0, 63).is_err());
    }

    #[test]
    fn linear_field_has_zero_rhs() {
        let g = Grid::new(4.0, 128).unwrap();
        let f = Field::from_fn(&g, |y| y).unwrap();
        let op = Operator::new(LeftClamp { v: -4.0, vy: 1.0 });
        let r = rhs_semidiscrete(&f, &g, &op);
        assert!(r.iter().all(|x| x.abs() < 1e-6), "{:?}", &r[..4]);
    }

    #[test]
    fn even_data_rejected() {
        let g = Grid::new(4.0, 128).unwrap();
        assert!(Field::from_fn(&g, |y| 1.0 + y * y).is_err());
        assert!(Field::from_fn(&g, |y| y.powi(3)).is_ok());
    }

    #[test]
    fn cubic_is_second_order() {
        let e1 = manufactured_cubic_error(2.0, 128).unwrap();
        let e2 = manufactured_cubic_error(2.0, 256).unwrap();
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn ghosts_are_odd() {
        let g = Grid::new(1.0, 64).unwrap();
        let f = Field::from_fn(&g, |y| y + y.powi(3)).unwrap();
        assert_eq!(odd_symmetry_defect(&f, &g), 0.0);
        let mut ext = vec![0.0; g.n + 5];
        fill_ghosts(&f.values, &g, &LeftClamp::homogeneous(), &mut ext);
        assert_eq!(ext[g.n + 3], -f.values[g.n - 1]);
        assert_eq!(ext[g.n + 4], -f.values[g.n - 2]);
    }

    #[test]
    fn physical_scaling() {
        let s = rescale_to_physical(-1.5, 0.3, 2.0, 1.0).unwrap();
        assert_eq!((s.x, s.t, s.u), (-1.5, 0.3, 2.0));
        let s = rescale_to_physical(1.0, 1.0, 1.0, 1e-3).unwrap();
        assert!((s.x - 1e-2).abs() < 1e-15);
        assert!((s.t - 1e-5).abs() < 1e-17);
        assert!((s.u - 1e-1).abs() < 1e-15);
    }

    #[test]
    fn short_linear_run_dissipates() {
        let g = Grid::new(1.0, 64).unwrap();
        let pi = std::f64::consts::PI;
        let f = Field::from_fn(&g, |y| (pi * y).sin() * (1.0 + (pi * y).cos()) / 2.0).unwrap();
        let op = Operator::linear(LeftClamp::homogeneous());
        let opts = EvolveOptions {
            cfl: 0.25,
            record_l2: true,
        };
        let ev = evolve(&f, &g, &op, &[1e-6], &opts).unwrap();
        assert!(ev.completed());
        let mut prev = f.l2(&g);
        for &n in &ev.l2_history {
            assert!(n <= prev);
            prev = n;
        }
    }
}
