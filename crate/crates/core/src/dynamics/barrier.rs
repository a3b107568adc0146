//! The cubic barrier field `B = (ξ b₁, η b₂)` adapted to the annulus
//! `d^{-1/2} < |v| < 2 d^{-1/2}`.
//!
//! With `a = √(1 + r²)`,
//!
//! `b₁ = (-√d a y + √d/V_d · x (3 - d x² - d y²)) / (1 + a)`
//! `b₂ = ( √d x   + √d/V_d · a y (3 - d x² - d y²)) / (1 + a)`
//!
//! The first part rotates, the second points inward on both boundary circles.

use crate::error::{invalid, Result};
use crate::polynomials::{BivariatePolynomial, HomogeneousPolynomial, PlanarField};

/// `V_d = 3 + (√2 + √6) / √((1 - 1/d)(1 - 2/d))`, which tends to `3 + √2 + √6`.
pub fn barrier_v(d: usize) -> Result<f64> {
    if d < 3 {
        return Err(invalid(format!("the barrier field needs d >= 3, got {d}")));
    }
    let d = d as f64;
    let k = ((1.0 - 1.0 / d) * (1.0 - 2.0 / d)).sqrt();
    Ok(3.0 + (2f64.sqrt() + 6f64.sqrt()) / k)
}

/// `(b₁, b₂)` as cubic polynomials.
pub fn barrier_components(d: usize, r: f64) -> Result<(BivariatePolynomial, BivariatePolynomial)> {
    let v = barrier_v(d)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid(format!("r must lie in [0, 1], got {r}")));
    }
    let a = (1.0 + r * r).sqrt();
    let sd = (d as f64).sqrt();
    let df = d as f64;
    let w = 1.0 / (1.0 + a);
    let n = sd / v;
    let b1 = BivariatePolynomial::from_terms(
        3,
        &[
            (0, 1, -w * sd * a),
            (1, 0, 3.0 * w * n),
            (3, 0, -w * n * df),
            (1, 2, -w * n * df),
        ],
    )?;
    let b2 = BivariatePolynomial::from_terms(
        3,
        &[
            (1, 0, w * sd),
            (0, 1, 3.0 * w * n * a),
            (2, 1, -w * n * a * df),
            (0, 3, -w * n * a * df),
        ],
    )?;
    Ok((b1, b2))
}

/// Degree-`d` homogenizations of `(b₁, b₂)`.
pub fn barrier_homogenized(
    d: usize,
    r: f64,
) -> Result<(HomogeneousPolynomial, HomogeneousPolynomial)> {
    let (b1, b2) = barrier_components(d, r)?;
    Ok((b1.homogenize_to(d)?, b2.homogenize_to(d)?))
}

/// `(ξ b₁, η b₂)`.
pub fn build_barrier_field(d: usize, r: f64, xi: f64, eta: f64) -> Result<PlanarField> {
    let (b1, b2) = barrier_components(d, r)?;
    Ok(PlanarField::new(b1.scale(xi), b2.scale(eta)))
}
