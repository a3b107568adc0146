//! Orbits and invariant regions of planar fields.
//!
//! - [`return_map`]: the first-return map of the perturbed linear center on the
//!   positive `x` axis, and its isolated fixed points.
//! - [`tangency`]: points where a field is tangent to a circle about the origin.
//! - [`equilibria`]: multistart Newton for zeros of a field in a disk.
//! - [`annulus`]: projective images of circular annuli.
//! - [`barrier`]: the deterministic two-parameter barrier field.
//! - [`certification`]: sampled checks that an annulus is transverse.

pub mod annulus;
pub mod barrier;
pub mod certification;
pub mod equilibria;
pub mod return_map;
pub mod tangency;

pub use annulus::{map_annulus, Ellipse, EllipticalAnnulus};
pub use barrier::{barrier_components, barrier_homogenized, barrier_v, build_barrier_field};
pub use certification::{annulus_certificate, certify_transverse_annulus, Certificate};
pub use equilibria::{find_equilibria, newton_solve};
pub use return_map::{
    cartesian_return, count_return_fixed_points, default_grid_n, poincare_return, FixedPointScan,
    ReturnMapResult, ReturnStatus, R_MIN,
};
pub use tangency::{count_tangencies, tangency_angles};

/// Solves `J δ = -F` for a 2×2 system; `None` if `J` is numerically singular.
pub(crate) fn newton_step(f: [f64; 2], j: [[f64; 2]; 2]) -> Option<[f64; 2]> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = (j[0][0].abs() + j[0][1].abs()) * (j[1][0].abs() + j[1][1].abs());
    if !det.is_finite() || det.abs() <= 1e-300 || det.abs() <= 1e-14 * scale {
        return None;
    }
    Some([
        (-f[0] * j[1][1] + f[1] * j[0][1]) / det,
        (-f[1] * j[0][0] + f[0] * j[1][0]) / det,
    ])
}
