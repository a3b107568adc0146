//! Dormand–Prince 5(4) integrator for small fixed-size systems.
//!
//! The right-hand side may refuse a stage by returning `None` (for instance
//! when a denominator drops below a floor); the step is then retried with half
//! the step size.

use std::ops::ControlFlow;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; `0` picks `1e-2·|t1 - t0|`.
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 0.0,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeError {
    /// A stage was refused even at the minimum step.
    StageRejected {
        t: f64,
    },
    /// Error control drove the step below `h_min`.
    StepSizeUnderflow {
        t: f64,
    },
    TooManySteps {
        t: f64,
    },
}

impl std::fmt::Display for OdeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::StageRejected { t } => {
                write!(f, "right-hand side rejected every stage near t = {t}")
            }
            Self::StepSizeUnderflow { t } => write!(f, "step size underflow at t = {t}"),
            Self::TooManySteps { t } => write!(f, "step budget exhausted at t = {t}"),
        }
    }
}

impl std::error::Error for OdeError {}

/// One accepted step, handed to step observers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub y0: [f64; N],
    pub t1: f64,
    pub y1: [f64; N],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    /// Set when an observer stopped the integration; holds the final step.
    pub stopped_at: Option<Step<N>>,
    pub accepted: usize,
    pub rejected: usize,
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (c, k) in terms {
            s += c * k[i];
        }
        out[i] += h * s;
    }
    out
}

/// A single Dormand–Prince step from `(t, y)` with slope `k1 = f(t, y)`.
///
/// Returns the fifth-order solution, the error estimate and the slope at the
/// new point, or `None` if the right-hand side refused a stage.
pub fn dopri_step<F, const N: usize>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    h: f64,
) -> Option<([f64; N], [f64; N], [f64; N])>
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
{
    let k2 = f(t + C2 * h, &combo(y, h, &[(A21, k1)]))?;
    let k3 = f(t + C3 * h, &combo(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(
        t + C4 * h,
        &combo(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    )?;
    let k5 = f(
        t + C5 * h,
        &combo(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = f(
        t + h,
        &combo(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    )?;
    let y5 = combo(
        y,
        h,
        &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = f(t + h, &y5)?;
    let zero = [0.0; N];
    let err = combo(
        &zero,
        h,
        &[
            (E1, k1),
            (E3, &k3),
            (E4, &k4),
            (E5, &k5),
            (E6, &k6),
            (E7, &k7),
        ],
    );
    if y5.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((y5, err, k7))
}

fn error_norm<const N: usize>(
    err: &[f64; N],
    y0: &[f64; N],
    y1: &[f64; N],
    opts: &OdeOptions,
) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        s += (err[i] / sc).powi(2);
    }
    (s / N as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`, calling `observe` after every
/// accepted step. `observe` may stop the integration early.
pub fn integrate_observed<F, O, const N: usize>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<Outcome<N>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
    O: FnMut(&Step<N>) -> ControlFlow<()>,
{
    let span = t1 - t0;
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut out = Outcome {
        t,
        y,
        stopped_at: None,
        accepted: 0,
        rejected: 0,
    };
    if span == 0.0 {
        return Ok(out);
    }
    let mut h = if opts.h_init > 0.0 {
        opts.h_init
    } else {
        1e-2 * span.abs()
    }
    .min(opts.h_max);
    let mut k1 = f(t, &y).ok_or(OdeError::StageRejected { t })?;
    let mut steps = 0usize;
    loop {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        let last = h >= remaining;
        let h_try = if last { remaining } else { h };
        steps += 1;
        if steps > opts.max_steps {
            return Err(OdeError::TooManySteps { t });
        }
        match dopri_step(&mut f, t, &y, &k1, dir * h_try) {
            None => {
                out.rejected += 1;
                h = 0.5 * h_try;
                if h < opts.h_min {
                    return Err(OdeError::StageRejected { t });
                }
            }
            Some((y_new, err, k7)) => {
                let e = error_norm(&err, &y, &y_new, opts);
                if e <= 1.0 {
                    let t_new = if last { t1 } else { t + dir * h_try };
                    let step = Step {
                        t0: t,
                        y0: y,
                        t1: t_new,
                        y1: y_new,
                    };
                    t = t_new;
                    y = y_new;
                    k1 = k7;
                    out.accepted += 1;
                    if observe(&step).is_break() {
                        out.stopped_at = Some(step);
                        break;
                    }
                    let fac = if e == 0.0 {
                        5.0
                    } else {
                        (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
                    };
                    h = (h_try * fac).min(opts.h_max);
                } else {
                    out.rejected += 1;
                    h = h_try * (0.9 * e.powf(-0.2)).clamp(0.1, 0.9);
                    if h < opts.h_min {
                        return Err(OdeError::StepSizeUnderflow { t });
                    }
                }
            }
        }
    }
    out.t = t;
    out.y = y;
    Ok(out)
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`.
pub fn integrate<F, const N: usize>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions,
) -> Result<Outcome<N>, OdeError>
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
{
    integrate_observed(f, t0, y0, t1, opts, |_| ControlFlow::Continue(()))
}

/// Locates a sign change of `g` inside an accepted step by bisecting on the
/// length of a single re-step from the step's start.
///
/// Expects `g(step.y0)` and `g(step.y1)` to have opposite signs and returns the
/// time and state where `|Δt| <= t_tol`.
pub fn locate_crossing<F, G, const N: usize>(
    f: &mut F,
    step: &Step<N>,
    mut g: G,
    t_tol: f64,
) -> Option<(f64, [f64; N])>
where
    F: FnMut(f64, &[f64; N]) -> Option<[f64; N]>,
    G: FnMut(&[f64; N]) -> f64,
{
    let k1 = f(step.t0, &step.y0)?;
    let g0 = g(&step.y0);
    let (mut lo, mut hi) = (0.0, step.t1 - step.t0);
    let mut best = (step.t1, step.y1);
    for _ in 0..200 {
        if (hi - lo).abs() <= t_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (ym, _, _) = dopri_step(f, step.t0, &step.y0, &k1, mid)?;
        let gm = g(&ym);
        if gm == 0.0 {
            return Some((step.t0 + mid, ym));
        }
        if (gm > 0.0) == (g0 > 0.0) {
            lo = mid;
        } else {
            hi = mid;
            best = (step.t0 + mid, ym);
        }
    }
    if hi != step.t1 - step.t0 {
        Some(best)
    } else {
        // never bisected below the full step; re-step to the bracket end
        let (yh, _, _) = dopri_step(f, step.t0, &step.y0, &k1, hi)?;
        Some((step.t0 + hi, yh))
    }
}
