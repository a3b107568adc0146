//! Sampled transversality certificates for elliptical annuli.
//!
//! The boundary test samples `⟨F, n̂⟩` on each boundary ellipse, with `n̂` the
//! unit normal pointing into the annulus, and asks for one strict sign shared
//! by both components. On every arc between neighbouring samples the smaller
//! endpoint value must exceed `L h / 2`, where `h` is the arc length and `L`
//! is three times the largest difference quotient over that arc and its two
//! neighbours.
//!
//! Fields of high degree should be passed through
//! [`ProjectiveWeight`](crate::polynomials::ProjectiveWeight) first: the
//! positive weight changes neither orbits nor zeros, but removes the growth
//! that would otherwise swamp the padding.
//!
//! The interior test samples a grid of interpolating ellipses. Every sample
//! needs `|F| > 3 L h`, with `h` the covering radius of the grid and `L` the
//! largest sampled `‖J‖` among the sample and its grid neighbours, and
//! Newton started at every sample must not converge to a zero inside the
//! annulus.
//!
//! Neither test is a proof: a `true` answer holds at the sampled resolution.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::polynomials::VectorField;

use super::annulus::{Ellipse, EllipticalAnnulus};
use super::newton_step;

/// Smallest accepted sample count for either test.
pub const MIN_SAMPLES: usize = 64;

const NEWTON_ITERATIONS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Inner,
    Outer,
}

/// Outcome of [`annulus_certificate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum Certificate {
    /// Transverse at the sampled resolution; `inward` gives the common direction.
    Certified { inward: bool },
    /// `⟨F, n̂⟩` is not of one strict sign on this component.
    NotTransverse { boundary: Boundary },
    /// One component is crossed inwards, the other outwards.
    OrientationMismatch,
    /// Of one sign, but not by more than the Lipschitz padding.
    InsufficientMargin {
        boundary: Boundary,
        margin: f64,
        padding: f64,
    },
    /// `|F|` at an interior sample is below the padded floor.
    SmallField { at: [f64; 2], norm: f64, floor: f64 },
    /// Newton converged to a zero inside the annulus.
    Equilibrium { at: [f64; 2] },
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        matches!(self, Self::Certified { .. })
    }
}

/// `Ok(inward)` when `⟨F, n̂_in⟩` keeps a strict sign with margin.
fn check_boundary<F: VectorField + ?Sized>(
    field: &F,
    ellipse: &Ellipse,
    into_annulus: f64,
    n: usize,
    which: Boundary,
) -> std::result::Result<bool, Certificate> {
    let dt = TAU / n as f64;
    let value = |t: f64| {
        let p = ellipse.point(t);
        let nv = ellipse.outward_normal(t);
        let f = field.eval(p[0], p[1]);
        into_annulus * (f[0] * nv[0] + f[1] * nv[1])
    };
    let mut vals = Vec::with_capacity(n);
    let positive = value(0.0) > 0.0;
    for i in 0..n {
        let v = value(i as f64 * dt);
        if v == 0.0 || (v > 0.0) != positive || !v.is_finite() {
            return Err(Certificate::NotTransverse { boundary: which });
        }
        vals.push(v);
    }
    // slope of segment i runs from sample i to sample i + 1 (cyclically)
    let arc: Vec<f64> = (0..n)
        .map(|i| ellipse.speed((i as f64 + 0.5) * dt) * dt)
        .collect();
    let slope: Vec<f64> = (0..n)
        .map(|i| (vals[(i + 1) % n] - vals[i]).abs() / arc[i])
        .collect();
    for i in 0..n {
        let local = slope[(i + n - 1) % n].max(slope[i]).max(slope[(i + 1) % n]);
        let padding = 3.0 * local * arc[i] / 2.0;
        let margin = vals[i].abs().min(vals[(i + 1) % n].abs());
        if margin <= padding {
            return Err(Certificate::InsufficientMargin {
                boundary: which,
                margin,
                padding,
            });
        }
    }
    Ok(positive)
}

fn spectral_norm(j: &[[f64; 2]; 2]) -> f64 {
    let half = 0.5 * (j[0][0].powi(2) + j[0][1].powi(2) + j[1][0].powi(2) + j[1][1].powi(2));
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    (half + (half * half - det * det).max(0.0).sqrt()).sqrt()
}

/// Plain Newton from `start`; reports the limit if it converges inside the annulus.
fn newton_lands_inside<F: VectorField + ?Sized>(
    field: &F,
    annulus: &EllipticalAnnulus,
    start: [f64; 2],
    first: ([f64; 2], [[f64; 2]; 2]),
) -> Option<[f64; 2]> {
    let outer = annulus.outer();
    let tol = 1e-13 * annulus.outer_semi_axes[0].max(annulus.center[0].hypot(annulus.center[1]));
    let (mut f, mut j) = first;
    let mut z = start;
    for _ in 0..NEWTON_ITERATIONS {
        let step = newton_step(f, j)?;
        z = [z[0] + step[0], z[1] + step[1]];
        if !(outer.level(z) < 4.0) {
            return None;
        }
        if step[0].hypot(step[1]) <= tol {
            return annulus.contains(z).then_some(z);
        }
        (f, j) = field.eval_with_jacobian(z[0], z[1]);
    }
    None
}

fn check_interior<F: VectorField + ?Sized>(
    field: &F,
    annulus: &EllipticalAnnulus,
    interior_n: usize,
) -> std::result::Result<(), Certificate> {
    let aspect = {
        let outer = annulus.outer_semi_axes[0].max(annulus.outer_semi_axes[1]);
        let width = (annulus.outer_semi_axes[0] - annulus.inner_semi_axes[0])
            .min(annulus.outer_semi_axes[1] - annulus.inner_semi_axes[1]);
        (TAU * outer / width).max(1.0)
    };
    let n_lambda = ((interior_n as f64 / aspect).sqrt().round() as usize).clamp(2, interior_n / 2);
    let n_t = interior_n / n_lambda;
    let dt = TAU / n_t as f64;
    let dl = 1.0 / (n_lambda - 1) as f64;
    let outer = annulus.outer();
    // covering radius of the sample grid
    let max_speed = (0..n_t)
        .map(|i| outer.speed((i as f64 + 0.5) * dt))
        .fold(0.0, f64::max);
    let radial = (annulus.outer_semi_axes[0] - annulus.inner_semi_axes[0])
        .max(annulus.outer_semi_axes[1] - annulus.inner_semi_axes[1]);
    let h = 0.5 * (max_speed * dt).hypot(radial * dl);
    let mut samples = Vec::with_capacity(n_t * n_lambda);
    let mut jac = Vec::with_capacity(n_t * n_lambda);
    for i in 0..n_t {
        for k in 0..n_lambda {
            let z = annulus.interpolate(i as f64 * dt, k as f64 * dl);
            let fj = field.eval_with_jacobian(z[0], z[1]);
            jac.push(spectral_norm(&fj.1));
            samples.push((z, fj));
        }
    }
    // Lipschitz bound for each sample from its grid neighbourhood
    for i in 0..n_t {
        for k in 0..n_lambda {
            let mut local: f64 = 0.0;
            for di in [n_t - 1, 0, 1] {
                let ii = (i + di) % n_t;
                for kk in k.saturating_sub(1)..=(k + 1).min(n_lambda - 1) {
                    local = local.max(jac[ii * n_lambda + kk]);
                }
            }
            let (z, (f, _)) = samples[i * n_lambda + k];
            let norm = f[0].hypot(f[1]);
            let floor = 3.0 * local * h;
            if !(norm > floor) {
                return Err(Certificate::SmallField { at: z, norm, floor });
            }
        }
    }
    for &(z, fj) in &samples {
        if let Some(at) = newton_lands_inside(field, annulus, z, fj) {
            return Err(Certificate::Equilibrium { at });
        }
    }
    Ok(())
}

/// Runs both tests; the boundary test first since it is cheaper and usually
/// decides.
pub fn annulus_certificate<F: VectorField + ?Sized>(
    field: &F,
    annulus: &EllipticalAnnulus,
    boundary_n: usize,
    interior_n: usize,
) -> Result<Certificate> {
    if boundary_n < MIN_SAMPLES || interior_n < MIN_SAMPLES {
        return Err(invalid(format!(
            "sample counts must be at least {MIN_SAMPLES}, got boundary {boundary_n}, interior {interior_n}"
        )));
    }
    let inner = match check_boundary(
        field,
        &annulus.inner(),
        1.0,
        2 * boundary_n,
        Boundary::Inner,
    ) {
        Ok(s) => s,
        Err(c) => return Ok(c),
    };
    let outer = match check_boundary(
        field,
        &annulus.outer(),
        -1.0,
        2 * boundary_n,
        Boundary::Outer,
    ) {
        Ok(s) => s,
        Err(c) => return Ok(c),
    };
    if inner != outer {
        return Ok(Certificate::OrientationMismatch);
    }
    if let Err(c) = check_interior(field, annulus, interior_n) {
        return Ok(c);
    }
    Ok(Certificate::Certified { inward: inner })
}

/// Whether [`annulus_certificate`] certifies the annulus.
pub fn certify_transverse_annulus<F: VectorField + ?Sized>(
    field: &F,
    annulus: &EllipticalAnnulus,
    boundary_n: usize,
    interior_n: usize,
) -> Result<bool> {
    Ok(annulus_certificate(field, annulus, boundary_n, interior_n)?.is_certified())
}
