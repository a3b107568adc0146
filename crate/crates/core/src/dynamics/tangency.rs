//! Tangencies of a field with the circle `|v| = r`.
//!
//! They are the zeros of `g(φ) = ⟨F(v), v⟩` with `v = r(cos φ, sin φ)`.
//! Sign changes are collected on a uniform grid; a cell whose endpoint values
//! share a sign but whose derivative changes sign with `|g|` small enough to
//! hide a pair of zeros is split recursively.

use std::f64::consts::TAU;

use crate::error::{invalid, Error, Result};
use crate::polynomials::VectorField;

const MAX_DEPTH: u32 = 24;

#[derive(Debug, Clone, Copy)]
struct Sample {
    phi: f64,
    g: f64,
    dg: f64,
}

fn sample<F: VectorField + ?Sized>(field: &F, r: f64, phi: f64) -> (Sample, f64) {
    let (s, c) = phi.sin_cos();
    let v = [r * c, r * s];
    let dv = [-r * s, r * c];
    let (f, j) = field.eval_with_jacobian(v[0], v[1]);
    let jdv = [
        j[0][0] * dv[0] + j[0][1] * dv[1],
        j[1][0] * dv[0] + j[1][1] * dv[1],
    ];
    let g = f[0] * v[0] + f[1] * v[1];
    let dg = jdv[0] * v[0] + jdv[1] * v[1] + f[0] * dv[0] + f[1] * dv[1];
    (Sample { phi, g, dg }, f[0].hypot(f[1]))
}

fn positive(g: f64) -> bool {
    g >= 0.0
}

/// Whether the cell may hide two zeros: the endpoint values share a sign, the
/// derivative turns, and the values are small against the slope times width.
fn suspicious(a: &Sample, b: &Sample) -> bool {
    positive(a.g) == positive(b.g)
        && (a.dg >= 0.0) != (b.dg >= 0.0)
        && a.g.abs().min(b.g.abs()) <= a.dg.abs().max(b.dg.abs()) * (b.phi - a.phi)
}

fn bisect<F: VectorField + ?Sized>(field: &F, r: f64, a: Sample, b: Sample, tol: f64) -> f64 {
    let (mut lo, mut hi) = (a.phi, b.phi);
    let lo_pos = positive(a.g);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (s, _) = sample(field, r, mid);
        if positive(s.g) == lo_pos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn scan_cell<F: VectorField + ?Sized>(
    field: &F,
    r: f64,
    a: Sample,
    b: Sample,
    depth: u32,
    out: &mut Vec<f64>,
) {
    if positive(a.g) != positive(b.g) {
        out.push(bisect(field, r, a, b, 1e-12));
        return;
    }
    if depth < MAX_DEPTH && suspicious(&a, &b) {
        let (m, _) = sample(field, r, 0.5 * (a.phi + b.phi));
        scan_cell(field, r, a, m, depth + 1, out);
        scan_cell(field, r, m, b, depth + 1, out);
    }
}

/// Angles in `[0, 2π)` where `F` is tangent to the circle of radius `r`.
pub fn tangency_angles<F: VectorField + ?Sized>(
    field: &F,
    r: f64,
    grid_n: usize,
) -> Result<Vec<f64>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid(format!(
            "radius must be positive and finite, got {r}"
        )));
    }
    if grid_n < 4 {
        return Err(invalid(format!("grid_n must be at least 4, got {grid_n}")));
    }
    let mut samples = Vec::with_capacity(grid_n + 1);
    let mut max_g: f64 = 0.0;
    let mut max_f: f64 = 0.0;
    for i in 0..grid_n {
        let (s, fnorm) = sample(field, r, TAU * i as f64 / grid_n as f64);
        max_g = max_g.max(s.g.abs());
        max_f = max_f.max(fnorm);
        samples.push(s);
    }
    if !(max_g.is_finite() && max_f.is_finite()) {
        return Err(Error::NumericalFailure(format!(
            "field is not finite on the circle r = {r}"
        )));
    }
    if max_g <= 1e-12 * r * max_f || max_g == 0.0 {
        return Err(Error::DegenerateTangency { radius: r });
    }
    samples.push(Sample {
        phi: TAU,
        ..samples[0]
    });
    let mut out = Vec::new();
    for w in samples.windows(2) {
        scan_cell(field, r, w[0], w[1], 0, &mut out);
    }
    Ok(out
        .into_iter()
        .map(|phi| if phi >= TAU { phi - TAU } else { phi })
        .collect())
}

/// Number of tangencies of `F` with the circle of radius `r`.
pub fn count_tangencies<F: VectorField + ?Sized>(
    field: &F,
    r: f64,
    grid_n: usize,
) -> Result<usize> {
    Ok(tangency_angles(field, r, grid_n)?.len())
}
