//! Expected number of zeros of the Kostlan Melnikov function.
//!
//! The two-point correlation `𝒦(r, t) = E 𝒜(r)𝒜(t)` depends only on `s = rt`:
//! `𝒦(s) = 2π ∫_0^{2π} (1 + s cos u)^d s cos u du`. With `L = ln 𝒦` the
//! Kac-Rice density at radius `τ` is `Δ = L'(s) + s L''(s)` evaluated at
//! `s = τ²`, and the expected count on `(0, ρ)` is `(1/π)∫_0^ρ √Δ dτ`.
//!
//! Near `s = 0` both terms of `Δ` behave like `±2/s` and cancel, so there the
//! density is taken from the power series of `𝒦/s²` instead.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_adaptive, CompensatedSum};
use crate::special::{binomial, circle_moment, ln_binomial};

/// Kernel and its first two `s`-derivatives, all divided by `(1+s)^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub s: f64,
    pub d: usize,
    pub k_scaled: f64,
    pub dk_scaled: f64,
    pub d2k_scaled: f64,
    /// `d·ln(1+s)`; unscaled values are `exp(log_scale)·scaled`.
    pub log_scale: f64,
}

impl KernelEval {
    pub fn k(&self) -> f64 {
        self.k_scaled * self.log_scale.exp()
    }

    pub fn dk_ds(&self) -> f64 {
        self.dk_scaled * self.log_scale.exp()
    }

    pub fn d2k_ds2(&self) -> f64 {
        self.d2k_scaled * self.log_scale.exp()
    }

    /// `L' + sL''` with `L = ln 𝒦`.
    pub fn density(&self) -> f64 {
        let l1 = self.dk_scaled / self.k_scaled;
        let l2 = self.d2k_scaled / self.k_scaled - l1 * l1;
        l1 + self.s * l2
    }
}

/// Smallest node count for which the trapezoid rule integrates the kernel and
/// both derivatives exactly.
pub fn min_quad_n(d: usize) -> usize {
    4 * (d + 2)
}

/// `ratio^n` for `ratio <= 1`, by logarithms when positive.
fn pow(ratio: f64, n: usize) -> f64 {
    if n == 0 {
        1.0
    } else if ratio > 0.0 {
        (n as f64 * ratio.ln()).exp()
    } else if n <= i32::MAX as usize {
        ratio.powi(n as i32)
    } else {
        ratio.powf(n as f64)
    }
}

/// `𝒦(s)`, `𝒦'(s)` and `𝒦''(s)` by the uniform trapezoid rule on `quad_n` nodes,
/// differentiating under the integral sign.
pub fn kernel_k(s: f64, d: usize, quad_n: usize) -> Result<KernelEval> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(invalid(format!(
            "s must be finite and non-negative, got {s}"
        )));
    }
    if quad_n < min_quad_n(d) {
        return Err(invalid(format!(
            "quad_n = {quad_n} is below the exactness threshold {}",
            min_quad_n(d)
        )));
    }
    let scale = 1.0 + s;
    let (mut k, mut k1, mut k2) = (
        CompensatedSum::new(),
        CompensatedSum::new(),
        CompensatedSum::new(),
    );
    let h = std::f64::consts::TAU / quad_n as f64;
    let df = d as f64;
    for i in 0..quad_n {
        let c = (i as f64 * h).cos();
        let ratio = (1.0 + s * c) / scale;
        // b^n/(1+s)^d = ratio^n (1+s)^(n-d)
        let p0 = pow(ratio, d);
        let p1 = if d >= 1 {
            pow(ratio, d - 1) / scale
        } else {
            0.0
        };
        let p2 = if d >= 2 {
            pow(ratio, d - 2) / (scale * scale)
        } else {
            0.0
        };
        k.add(p0 * s * c);
        k1.add(df * p1 * s * c * c + p0 * c);
        k2.add(df * (df - 1.0) * p2 * s * c * c * c + 2.0 * df * p1 * c * c);
    }
    let w = 2.0 * PI * h;
    Ok(KernelEval {
        s,
        d,
        k_scaled: w * k.value(),
        dk_scaled: w * k1.value(),
        d2k_scaled: w * k2.value(),
        log_scale: df * scale.ln(),
    })
}

/// `𝒦(s)/s² = Σ_{n even} c_n s^n` with `c_n = 2π C(d, n+1) ∫cos^{n+2}`.
/// Returns `(n, ln c_n)` for `n <= max_n`.
fn series_terms(d: usize, max_n: usize) -> Vec<(usize, f64)> {
    (0..=max_n)
        .step_by(2)
        .take_while(|&n| n < d)
        .map(|n| {
            let lnc = (2.0 * PI).ln() + ln_binomial(d, n + 1) + circle_moment(n + 2, 0).ln();
            (n, lnc)
        })
        .collect()
}

/// `Δ(s) = Var_w(n)/s` where `w_n ∝ c_n s^n` over the series terms.
fn series_density(terms: &[(usize, f64)], s: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let ln_s = s.ln();
    let logs: Vec<f64> = terms
        .iter()
        .map(|&(n, lnc)| lnc + n as f64 * ln_s)
        .collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    let mean = terms
        .iter()
        .zip(&w)
        .map(|(&(n, _), w)| n as f64 * w)
        .sum::<f64>()
        / total;
    let var = terms
        .iter()
        .zip(&w)
        .map(|(&(n, _), w)| (n as f64 - mean).powi(2) * w)
        .sum::<f64>()
        / total;
    var / s
}

/// Order of the small-`s` expansion of `𝒦/s²`.
pub const SERIES_ORDER: usize = 6;

/// Below this `τ` the density comes from the truncated power series.
///
/// The first omitted series term is relatively of order `(dτ²)^6` while the
/// cancellation in the quadrature path grows like `1/(dτ⁴)`; `0.15/√d` keeps
/// both below `1e-8` relative.
pub fn series_switch(d: usize) -> f64 {
    (0.15 / (d as f64).sqrt()).max(1e-4)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadControls {
    /// Trapezoid nodes for the kernel; `None` uses [`min_quad_n`].
    pub quad_n: Option<usize>,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadControls {
    fn default() -> Self {
        Self {
            quad_n: None,
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_intervals: 2000,
        }
    }
}

/// Kac-Rice density `Δ` at `τ`, from the series below [`series_switch`] and
/// from the trapezoid kernel above it.
pub fn density(tau: f64, d: usize, quad_n: usize) -> Result<f64> {
    if d < 3 {
        return Ok(0.0);
    }
    let s = tau * tau;
    let delta = if tau < series_switch(d) {
        series_density(&series_terms(d, SERIES_ORDER), s)
    } else {
        kernel_k(s, d, quad_n)?.density()
    };
    if !delta.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "non-finite density at tau = {tau}, d = {d}"
        )));
    }
    Ok(delta)
}

/// Relative floor below which a negative density is treated as round-off.
const NEGATIVE_FLOOR: f64 = 1e-9;

/// `E N_d(ρ) = (1/π) ∫_0^ρ √Δ(τ) dτ`.
///
/// `d = 1, 2` give `𝒦 ∝ s²`, hence `Δ = 0` and no zeros.
pub fn expected_zeros(d: usize, rho: f64, controls: &QuadControls) -> Result<f64> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(invalid(format!(
            "rho must be finite and non-negative, got {rho}"
        )));
    }
    if d < 3 || rho == 0.0 {
        return Ok(0.0);
    }
    let quad_n = controls.quad_n.unwrap_or_else(|| min_quad_n(d));
    if quad_n < min_quad_n(d) {
        return Err(invalid(format!(
            "quad_n = {quad_n} is below the exactness threshold {}",
            min_quad_n(d)
        )));
    }
    let mut failure = None;
    let mut integrand = |tau: f64| match density(tau, d, quad_n) {
        Ok(delta) => {
            if delta < 0.0 {
                if delta < -NEGATIVE_FLOOR * d as f64 && failure.is_none() {
                    failure = Some(Error::NumericalFailure(format!(
                        "negative density {delta:e} at tau = {tau}, d = {d}"
                    )));
                }
                0.0
            } else {
                delta.sqrt()
            }
        }
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let split = series_switch(d).min(rho);
    let mut total = integrate_adaptive(
        &mut integrand,
        0.0,
        split,
        controls.abs_tol,
        controls.rel_tol,
        controls.max_intervals,
    )?;
    if rho > split {
        total += integrate_adaptive(
            &mut integrand,
            split,
            rho,
            controls.abs_tol,
            controls.rel_tol,
            controls.max_intervals,
        )?;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(total / PI)
}

/// Large-degree limit `√d·arctan(ρ)/π`.
pub fn asymptotic_expected_zeros(d: usize, rho: f64) -> f64 {
    (d as f64).sqrt() * rho.atan() / PI
}

/// Limit of `Δ/d`, namely `1/(1+τ²)²`.
pub fn asymptotic_density(tau: f64) -> f64 {
    1.0 / (1.0 + tau * tau).powi(2)
}

/// `2π(1+s)^d √(2πs(s+1)/d)` divided by `(1+s)^d`.
pub fn laplace_kernel_scaled(s: f64, d: usize) -> f64 {
    2.0 * PI * (2.0 * PI * s * (s + 1.0) / d as f64).sqrt()
}

/// `𝒦 / Laplace − 1` at `s`.
pub fn laplace_relative_error(s: f64, d: usize, quad_n: usize) -> Result<f64> {
    let k = kernel_k(s, d, quad_n)?;
    Ok(k.k_scaled / laplace_kernel_scaled(s, d) - 1.0)
}

/// `𝒦(s)` from its finite expansion `2π Σ_{k odd} C(d,k) ∫cos^{k+1} s^{k+1}`.
pub fn kernel_exact_sum(s: f64, d: usize) -> f64 {
    let mut acc = CompensatedSum::new();
    for k in (1..=d).step_by(2) {
        acc.add(binomial(d, k) * circle_moment(k + 1, 0) * s.powi(k as i32 + 1));
    }
    2.0 * PI * acc.value()
}
