//! Zeros of a planar field by damped Newton from quasi-random starts.

use crate::polynomials::VectorField;

use super::newton_step;

const MAX_ITERATIONS: usize = 100;

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut x = 0.0;
    while i > 0 {
        f /= base as f64;
        x += f * (i % base) as f64;
        i /= base;
    }
    x
}

/// `n` points of the (2, 3) Halton sequence pushed into the disk of radius
/// `radius` with uniform area density.
pub(crate) fn disk_points(n: usize, radius: f64) -> impl Iterator<Item = [f64; 2]> {
    (1..=n as u64).map(move |i| {
        let rad = radius * halton(i, 2).sqrt();
        let (s, c) = (std::f64::consts::TAU * halton(i, 3)).sin_cos();
        [rad * c, rad * s]
    })
}

fn norm2(f: [f64; 2]) -> f64 {
    f[0] * f[0] + f[1] * f[1]
}

/// Damped Newton for `F = 0` from `start`. Each Newton step is halved until
/// `|F|` decreases; converged once the Newton step is shorter than `tol`.
pub fn newton_solve<F: VectorField + ?Sized>(
    field: &F,
    start: [f64; 2],
    tol: f64,
) -> Option<[f64; 2]> {
    let mut z = start;
    let mut fz = field.eval(z[0], z[1]);
    for _ in 0..MAX_ITERATIONS {
        if fz == [0.0, 0.0] {
            return Some(z);
        }
        let step = newton_step(fz, field.jacobian(z[0], z[1]))?;
        let len = step[0].hypot(step[1]);
        if !len.is_finite() {
            return None;
        }
        if len <= tol {
            return Some([z[0] + step[0], z[1] + step[1]]);
        }
        let mut lambda = 1.0;
        loop {
            let trial = [z[0] + lambda * step[0], z[1] + lambda * step[1]];
            let ft = field.eval(trial[0], trial[1]);
            if norm2(ft) < norm2(fz) || lambda < 1e-6 {
                z = trial;
                fz = ft;
                break;
            }
            lambda *= 0.5;
        }
    }
    None
}

/// Distinct equilibria found in the closed disk of radius `radius`.
///
/// Newton runs from `multistart_n` Halton points in the disk; roots closer than
/// `10·newton_tol` are merged and roots outside the disk are dropped. The
/// search is best effort: a root whose basin misses every start is not found.
pub fn find_equilibria<F: VectorField + ?Sized>(
    field: &F,
    radius: f64,
    multistart_n: usize,
    newton_tol: f64,
) -> Vec<[f64; 2]> {
    let mut roots: Vec<[f64; 2]> = Vec::new();
    for start in disk_points(multistart_n, radius) {
        let Some(z) = newton_solve(field, start, newton_tol) else {
            continue;
        };
        if z[0].hypot(z[1]) > radius {
            continue;
        }
        if roots
            .iter()
            .all(|w| (w[0] - z[0]).hypot(w[1] - z[1]) > 10.0 * newton_tol)
        {
            roots.push(z);
        }
    }
    roots
}
