//! Far-field asymptotics of matched profiles.
//!
//! A matched profile behaves like `C0 s^p` with `s = -y` and `p = alpha/beta`.
//! The algebraic corrections are forced by the nonlinear term and are fixed
//! by `C0` alone:
//!
//! ```text
//! f ~ C0 s^p + sigma K1 C0^2 s^(2p-3) + K2 C0^3 s^(3p-6) + sigma K3 C0^4 s^(4p-9)
//! ```
//!
//! On top of that sits the WKBJ perturbation `s^delta exp(a s^gamma)`: an
//! oscillating pair `a = +-i omega` on the blow-up side and a single decaying
//! root `a_- = -omega` on the extension side, with `omega = sqrt(beta/C0)/gamma`
//! and `delta = -(5p + 3)/4` on both sides.

use crate::error::{Error, Result};
use crate::odeint::Trajectory;
use crate::similarity::{Side, SimilarityParams};

/// Minimum number of samples a tail fit accepts.
pub const MIN_FIT_SAMPLES: usize = 50;
/// Samples taken by the trajectory-level fits.
pub const DEFAULT_FIT_SAMPLES: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct TailAsymptotics {
    pub side: Side,
    pub c0: f64,
    pub gamma: f64,
    /// Oscillation rate on the blow-up side, decay rate `|a_-|` on the
    /// extension side.
    pub omega: f64,
    pub c1: f64,
    pub c2: f64,
    /// Envelope exponent of the WKBJ term. Diagnostic only.
    pub delta_exp: f64,
    /// RMS of `(f - model) s^-p` over the window, in the units of `C0`.
    pub residual: f64,
    /// Fit window in `y` as `(y_lo, y_hi)`.
    pub window: (f64, f64),
    pub samples: usize,
}

impl TailAsymptotics {
    /// Algebraic part `C0 s^p + sigma K C0^2 s^(2p-3)` at `y < 0`.
    pub fn asymptote(&self, p: &SimilarityParams, y: f64) -> f64 {
        algebraic_asymptote(self.side, p, self.c0, -y)
    }

    /// Full model including the WKBJ term.
    pub fn model(&self, p: &SimilarityParams, y: f64) -> f64 {
        let s = -y;
        let base = self.asymptote(p, y);
        let env = s.powf(self.delta_exp);
        match self.side {
            Side::BlowUp => {
                let phase = self.omega * s.powf(self.gamma);
                base + env * (self.c1 * phase.sin() + self.c2 * phase.cos())
            }
            Side::Extension => base + env * self.c2 * (-self.omega * s.powf(self.gamma)).exp(),
        }
    }

    /// Transform under `f -> a^3 f(y / a)` with `a > 0`.
    pub fn rescaled(&self, p: &SimilarityParams, a: f64) -> TailAsymptotics {
        let c0 = a.powf(p.c0_scaling_exponent()) * self.c0;
        let amp = a.powf(3.0 - self.delta_exp);
        TailAsymptotics {
            c0,
            omega: wkbj_omega(p, c0),
            c1: self.c1 * amp,
            c2: self.c2 * amp,
            residual: self.residual * a.powf(p.c0_scaling_exponent()),
            window: (self.window.0 * a, self.window.1 * a),
            ..self.clone()
        }
    }
}

/// Coefficients `(K1, K2, K3)` of the algebraic corrections.
fn correction_k(p: &SimilarityParams) -> [f64; 3] {
    let q = p.alpha_over_beta();
    let b = p.beta();
    let k1 = 2.0 * q * (q - 1.0) * (2.0 * q - 1.0) / (b * (3.0 - q));
    let k2 =
        3.0 * q * (q - 1.0).powi(2) * (2.0 * q - 1.0) * (3.0 * q - 5.0) * (3.0 * q - 4.0) / (b * b * (q - 3.0).powi(2));
    let k3 = -8.0
        * q
        * (q - 2.0)
        * (q - 1.0).powi(2)
        * (2.0 * q - 3.0)
        * (2.0 * q - 1.0)
        * (4.0 * q - 7.0)
        * (31.0 * q * q - 83.0 * q + 60.0)
        / (3.0 * b.powi(3) * (q - 3.0).powi(3));
    [k1, k2, k3]
}

/// WKBJ envelope exponent `-(5p + 3)/4`.
pub fn wkbj_envelope_exponent(p: &SimilarityParams) -> f64 {
    -(5.0 * p.alpha_over_beta() + 3.0) / 4.0
}

fn asymptote_and_slope(side: Side, p: &SimilarityParams, c0: f64, s: f64) -> (f64, f64) {
    let q = p.alpha_over_beta();
    let [k1, k2, k3] = correction_k(p);
    let sg = side.sigma();
    let t1 = s.powf(q);
    let t2 = sg * k1 * s.powf(2.0 * q - 3.0);
    let t3 = k2 * s.powf(3.0 * q - 6.0);
    let t4 = sg * k3 * s.powf(4.0 * q - 9.0);
    let c = c0;
    (
        c * t1 + c * c * t2 + c.powi(3) * t3 + c.powi(4) * t4,
        t1 + 2.0 * c * t2 + 3.0 * c * c * t3 + 4.0 * c.powi(3) * t4,
    )
}

pub fn algebraic_asymptote(side: Side, p: &SimilarityParams, c0: f64, s: f64) -> f64 {
    asymptote_and_slope(side, p, c0, s).0
}

/// Local estimate of `C0` from a single sample, inverting the algebraic
/// asymptote. Falls back to `f s^-p` when the corrections are not small.
pub fn local_c0(side: Side, p: &SimilarityParams, s: f64, f: f64, corrected: bool) -> f64 {
    let bare = f / s.powf(p.alpha_over_beta());
    if !corrected {
        return bare;
    }
    let mut c = bare;
    for _ in 0..50 {
        let (g, dg) = asymptote_and_slope(side, p, c, s);
        if !(dg > 0.0) {
            return bare;
        }
        let step = (g - f) / dg;
        c -= step;
        if step.abs() <= 1e-15 * c.abs() {
            break;
        }
    }
    if c.is_finite() && (c - bare).abs() < 0.5 * bare.abs() {
        c
    } else {
        bare
    }
}

/// `(gamma, omega)` of the blow-up tail for a given `C0`.
pub fn wkbj_params(p: &SimilarityParams, c0: f64) -> Result<(f64, f64)> {
    if !(c0 > 0.0) {
        return Err(Error::Range(format!("C0 = {c0} must be positive")));
    }
    Ok((p.gamma(), wkbj_omega(p, c0)))
}

/// `(gamma, a_-)` of the extension tail; `a_- < 0` is the only admissible root.
pub fn extension_tail_params(p: &SimilarityParams, c0: f64) -> Result<(f64, f64)> {
    let (g, w) = wkbj_params(p, c0)?;
    Ok((g, -w))
}

pub fn wkbj_omega(p: &SimilarityParams, c0: f64) -> f64 {
    (p.beta() / c0).sqrt() / p.gamma()
}

/// Which algebraic model the `C0` estimator inverts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    /// pure power law `C0 s^p`
    None,
    /// power law plus the forced `s^(2p-3)` term
    SecondOrder,
}

/// Fits the tail model to `(y, f)` samples with `y < 0`.
pub fn fit_tail_samples(
    side: Side,
    p: &SimilarityParams,
    samples: &[(f64, f64)],
    correction: Correction,
) -> Result<TailAsymptotics> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(y, f)| *y < 0.0 && f.is_finite())
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "{} usable samples, need at least {MIN_FIT_SAMPLES}",
            pts.len()
        )));
    }
    let corrected = correction == Correction::SecondOrder;
    let mut locals: Vec<f64> = pts.iter().map(|&(y, f)| local_c0(side, p, -y, f, corrected)).collect();
    locals.sort_by(f64::total_cmp);
    let n = locals.len();
    let c0 = if n % 2 == 1 {
        locals[n / 2]
    } else {
        0.5 * (locals[n / 2 - 1] + locals[n / 2])
    };
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::Fit(format!("non-positive far-field constant {c0}")));
    }

    let gamma = p.gamma();
    let (ylo, yhi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(y, _)| {
        (a.min(y), b.max(y))
    });
    let fit = match side {
        Side::BlowUp => fit_oscillatory(p, &pts, c0, corrected),
        Side::Extension => fit_decaying(p, &pts, c0, corrected)?,
    };
    if !(fit.c0 > 0.0) || !fit.c0.is_finite() {
        return Err(Error::Fit(format!("non-positive far-field constant {}", fit.c0)));
    }
    Ok(TailAsymptotics {
        side,
        c0: fit.c0,
        gamma,
        omega: wkbj_omega(p, fit.c0),
        c1: fit.c1,
        c2: fit.c2,
        delta_exp: fit.delta,
        residual: fit.residual,
        window: (ylo, yhi),
        samples: pts.len(),
    })
}

struct Fit {
    c0: f64,
    c1: f64,
    c2: f64,
    delta: f64,
    residual: f64,
}

fn base_model(side: Side, p: &SimilarityParams, c0: f64, s: f64, corrected: bool) -> f64 {
    if corrected {
        algebraic_asymptote(side, p, c0, s)
    } else {
        c0 * s.powf(p.alpha_over_beta())
    }
}

/// Median `C0`, then `(C1, C2)` by least squares with the envelope exponent
/// scanned on a grid.
fn fit_oscillatory(p: &SimilarityParams, pts: &[(f64, f64)], c0: f64, corrected: bool) -> Fit {
    let q = p.alpha_over_beta();
    let gamma = p.gamma();
    let omega = wkbj_omega(p, c0);
    let resid: Vec<(f64, f64)> = pts
        .iter()
        .map(|&(y, f)| (-y, f - base_model(Side::BlowUp, p, c0, -y, corrected)))
        .collect();
    let weight = |s: f64| s.powf(-q);
    let basis = |s: f64, d: f64| -> (f64, f64) {
        let env = s.powf(d);
        let ph = omega * s.powf(gamma);
        (env * ph.sin(), env * ph.cos())
    };
    let solve = |d: f64| -> (f64, f64, f64) {
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(s, r) in &resid {
            let w = weight(s);
            let (u, v) = basis(s, d);
            let (u, v, r) = (u * w, v * w, r * w);
            a11 += u * u;
            a12 += u * v;
            a22 += v * v;
            b1 += u * r;
            b2 += v * r;
        }
        let det = a11 * a22 - a12 * a12;
        let (c1, c2) = if det.abs() > 1e-300 {
            ((b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det)
        } else {
            (0.0, 0.0)
        };
        let sse: f64 = resid
            .iter()
            .map(|&(s, r)| {
                let (u, v) = basis(s, d);
                ((r - c1 * u - c2 * v) * weight(s)).powi(2)
            })
            .sum();
        (c1, c2, sse)
    };
    let (mut best_d, mut best) = (-3.0, solve(-3.0));
    for i in 1..=400 {
        let d = -3.0 + 0.01 * i as f64;
        let cand = solve(d);
        if cand.2 < best.2 {
            best = cand;
            best_d = d;
        }
    }
    Fit {
        c0,
        c1: best.0,
        c2: best.1,
        delta: best_d,
        residual: (best.2 / resid.len() as f64).sqrt(),
    }
}

/// Joint Gauss-Newton fit of `C0` and the decaying amplitude `C2`, with the
/// decay rate tied to `C0` and the envelope exponent fixed.
fn fit_decaying(p: &SimilarityParams, pts: &[(f64, f64)], c0_start: f64, corrected: bool) -> Result<Fit> {
    let q = p.alpha_over_beta();
    let gamma = p.gamma();
    let delta = wkbj_envelope_exponent(p);
    let side = Side::Extension;
    let decay = |c0: f64, s: f64| s.powf(delta) * (-wkbj_omega(p, c0) * s.powf(gamma)).exp();
    let model = |c0: f64, c2: f64, s: f64| base_model(side, p, c0, s, corrected) + c2 * decay(c0, s);
    let sse = |c0: f64, c2: f64| -> f64 {
        pts.iter()
            .map(|&(y, f)| ((f - model(c0, c2, -y)) * (-y).powf(-q)).powi(2))
            .sum()
    };
    let (mut c0, mut c2) = (c0_start, 0.0);
    let mut cur = sse(c0, c2);
    for _ in 0..100 {
        let h = 1e-7 * c0.abs().max(1e-12);
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(y, f) in pts {
            let s = -y;
            let w = s.powf(-q);
            let r = (f - model(c0, c2, s)) * w;
            let j1 = (model(c0 + h, c2, s) - model(c0 - h, c2, s)) / (2.0 * h) * w;
            let j2 = decay(c0, s) * w;
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            b1 += j1 * r;
            b2 += j2 * r;
        }
        let det = a11 * a22 - a12 * a12;
        if !(det.abs() > 0.0) || !det.is_finite() {
            break;
        }
        let d0 = (b1 * a22 - b2 * a12) / det;
        let d2 = (a11 * b2 - a12 * b1) / det;
        let mut lam = 1.0;
        let mut accepted = false;
        while lam > 1e-6 {
            let (n0, n2) = (c0 + lam * d0, c2 + lam * d2);
            if n0 > 0.0 {
                let next = sse(n0, n2);
                if next <= cur {
                    c0 = n0;
                    c2 = n2;
                    cur = next;
                    accepted = true;
                    break;
                }
            }
            lam *= 0.5;
        }
        if !accepted || (lam * d0).abs() <= 1e-14 * c0 {
            break;
        }
    }
    if !c0.is_finite() {
        return Err(Error::Fit("extension tail fit diverged".into()));
    }
    Ok(Fit {
        c0,
        c1: 0.0,
        c2,
        delta,
        residual: (cur / pts.len() as f64).sqrt(),
    })
}

/// Tail fit of the first component of `traj` on `window = (y_lo, y_hi)`.
pub fn estimate_tail_c0(
    traj: &Trajectory,
    side: Side,
    p: &SimilarityParams,
    window: (f64, f64),
) -> Result<TailAsymptotics> {
    let (lo, hi) = (window.0.min(window.1), window.0.max(window.1));
    let (tlo, thi) = traj.bounds();
    if lo < tlo || hi > thi || hi >= 0.0 {
        return Err(Error::Fit(format!(
            "window [{lo}, {hi}] not inside the negative trajectory span [{tlo}, {thi}]"
        )));
    }
    let samples = traj.sample_component(0, lo, hi, DEFAULT_FIT_SAMPLES);
    fit_tail_samples(side, p, &samples, Correction::SecondOrder)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn wkbj_examples() {
        let p = SimilarityParams::new(0.2).unwrap();
        let (g, w) = wkbj_params(&p, 1.0).unwrap();
        assert!((g - 1.25).abs() < 1e-15);
        assert!((w - 0.505_96).abs() < 1e-5);
        let p = SimilarityParams::new(0.1).unwrap();
        let (g, w) = wkbj_params(&p, 1.0).unwrap();
        assert!((g - 1.363_64).abs() < 1e-5);
        assert!((w - 0.444_06).abs() < 1e-5);
        let p = SimilarityParams::new(0.5).unwrap();
        assert!((p.gamma() - 1.0).abs() < 1e-15);
        assert!(wkbj_params(&p, 0.0).is_err());
    }

    #[test]
    fn extension_root_is_negative_twin() {
        let p = SimilarityParams::new(0.2).unwrap();
        let (g, a) = extension_tail_params(&p, 1.0).unwrap();
        assert!((a + 0.505_96).abs() < 1e-5);
        assert_eq!(g, wkbj_params(&p, 1.0).unwrap().0);
    }

    #[test]
    fn pure_power_law() {
        let p = SimilarityParams::new(0.3).unwrap();
        let q = p.alpha_over_beta();
        let samples: Vec<_> = grid(-200.0, -100.0, 300)
            .into_iter()
            .map(|y| (y, 3.0 * (-y).powf(q)))
            .collect();
        let t = fit_tail_samples(Side::BlowUp, &p, &samples, Correction::None).unwrap();
        assert!((t.c0 - 3.0).abs() < 1e-12);
        assert!(t.c1.abs() < 1e-9 && t.c2.abs() < 1e-9);
    }

    #[test]
    fn power_law_with_wkbj_oscillation() {
        let p = SimilarityParams::new(0.2).unwrap();
        let q = p.alpha_over_beta();
        let c0 = 2.0;
        let (g, w) = wkbj_params(&p, c0).unwrap();
        let samples: Vec<_> = grid(-200.0, -100.0, 400)
            .into_iter()
            .map(|y| {
                let s: f64 = -y;
                (y, c0 * s.powf(q) + s.powf(-0.3) * (w * s.powf(g)).sin())
            })
            .collect();
        let t = fit_tail_samples(Side::BlowUp, &p, &samples, Correction::None).unwrap();
        assert!((t.c0 - c0).abs() < 0.01 * c0, "{}", t.c0);
    }

    #[test]
    fn too_few_samples() {
        let p = SimilarityParams::new(0.2).unwrap();
        let samples: Vec<_> = grid(-20.0, -10.0, 20).into_iter().map(|y| (y, 1.0)).collect();
        assert!(matches!(
            fit_tail_samples(Side::BlowUp, &p, &samples, Correction::None),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn negative_constant_rejected() {
        let p = SimilarityParams::new(0.2).unwrap();
        let samples: Vec<_> = grid(-20.0, -10.0, 100).into_iter().map(|y| (y, -1.0)).collect();
        assert!(fit_tail_samples(Side::Extension, &p, &samples, Correction::None).is_err());
    }

    #[test]
    fn corrected_estimate_inverts_two_term_asymptote() {
        let p = SimilarityParams::new(0.1).unwrap();
        for side in [Side::BlowUp, Side::Extension] {
            for s in [8.0, 20.0, 150.0] {
                let f = algebraic_asymptote(side, &p, 1.7, s);
                assert!((local_c0(side, &p, s, f, true) - 1.7).abs() < 1e-12);
            }
        }
    }
}
