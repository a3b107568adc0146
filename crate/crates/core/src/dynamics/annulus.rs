//! Projective images of the circular annulus `d^{-1/2} < |v| < 2 d^{-1/2}`.
//!
//! The plane is identified with the upper hemisphere by central projection.
//! A rotation of the sphere that keeps the line at angle `θ` in place and
//! carries the origin to `r(cos θ, sin θ)` acts on the plane by
//!
//! `v ↦ R_θ M_r R_{-θ} v`, `M_r(x, y) = ((x cos β + sin β), y) / (cos β - x sin β)`
//!
//! with `tan β = r`. The image of a circle of radius `ρ` is an ellipse with
//! semi-axes `ρ(1 + r²)/(1 - ρ²r²)` along `θ` and `ρ√(1 + r²)/√(1 - ρ²r²)`
//! across it, centred at distance `r(1 + ρ²)/(1 - ρ²r²)` from the origin.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

fn rotate(v: [f64; 2], angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// `R_θ M_r R_{-θ} v`, or `None` when `v` is sent to infinity or beyond.
pub fn projective_rotation(r: f64, theta: f64, v: [f64; 2]) -> Option<[f64; 2]> {
    let beta = r.atan();
    let (sb, cb) = beta.sin_cos();
    let u = rotate(v, -theta);
    let den = cb - u[0] * sb;
    if den <= 0.0 {
        return None;
    }
    Some(rotate([(u[0] * cb + sb) / den, u[1] / den], theta))
}

/// An ellipse `c + R_angle (a cos t, b sin t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub angle: f64,
    /// Semi-axis along `angle`, then across it.
    pub semi_axes: [f64; 2],
}

impl Ellipse {
    pub fn point(&self, t: f64) -> [f64; 2] {
        let (s, c) = t.sin_cos();
        let w = rotate([self.semi_axes[0] * c, self.semi_axes[1] * s], self.angle);
        [self.center[0] + w[0], self.center[1] + w[1]]
    }

    /// Unit outward normal at parameter `t`.
    pub fn outward_normal(&self, t: f64) -> [f64; 2] {
        let (s, c) = t.sin_cos();
        let n = [self.semi_axes[1] * c, self.semi_axes[0] * s];
        let len = n[0].hypot(n[1]);
        rotate([n[0] / len, n[1] / len], self.angle)
    }

    /// `|d s/d t|`, the arc-length density at parameter `t`.
    pub fn speed(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        (self.semi_axes[0] * s).hypot(self.semi_axes[1] * c)
    }

    /// `(x'/a)² + (y'/b)²` in the ellipse frame; `< 1` inside.
    pub fn level(&self, p: [f64; 2]) -> f64 {
        let u = rotate([p[0] - self.center[0], p[1] - self.center[1]], -self.angle);
        (u[0] / self.semi_axes[0]).powi(2) + (u[1] / self.semi_axes[1]).powi(2)
    }
}

/// Region between two concentric, equally oriented ellipses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticalAnnulus {
    pub center: [f64; 2],
    pub angle: f64,
    /// `(major, minor)`: along `angle`, then across it.
    pub inner_semi_axes: [f64; 2],
    pub outer_semi_axes: [f64; 2],
    /// Distance from `center` to the exact center of either mapped boundary.
    pub margin: f64,
}

impl EllipticalAnnulus {
    pub fn new(
        center: [f64; 2],
        angle: f64,
        inner_semi_axes: [f64; 2],
        outer_semi_axes: [f64; 2],
    ) -> Result<Self> {
        let ok = inner_semi_axes.iter().all(|&a| a > 0.0 && a.is_finite())
            && outer_semi_axes.iter().all(|&a| a.is_finite())
            && outer_semi_axes[0] > inner_semi_axes[0]
            && outer_semi_axes[1] > inner_semi_axes[1];
        if !ok {
            return Err(invalid(format!(
                "outer semi-axes {outer_semi_axes:?} must strictly dominate positive inner semi-axes {inner_semi_axes:?}"
            )));
        }
        Ok(Self {
            center,
            angle,
            inner_semi_axes,
            outer_semi_axes,
            margin: 0.0,
        })
    }

    pub fn circular(center: [f64; 2], inner: f64, outer: f64) -> Result<Self> {
        Self::new(center, 0.0, [inner, inner], [outer, outer])
    }

    pub fn inner(&self) -> Ellipse {
        Ellipse {
            center: self.center,
            angle: self.angle,
            semi_axes: self.inner_semi_axes,
        }
    }

    pub fn outer(&self) -> Ellipse {
        Ellipse {
            center: self.center,
            angle: self.angle,
            semi_axes: self.outer_semi_axes,
        }
    }

    /// Point at parameter `t` on the ellipse interpolating the two boundaries
    /// with weight `lambda ∈ [0, 1]`.
    pub fn interpolate(&self, t: f64, lambda: f64) -> [f64; 2] {
        let axes = [
            self.inner_semi_axes[0] + lambda * (self.outer_semi_axes[0] - self.inner_semi_axes[0]),
            self.inner_semi_axes[1] + lambda * (self.outer_semi_axes[1] - self.inner_semi_axes[1]),
        ];
        Ellipse {
            center: self.center,
            angle: self.angle,
            semi_axes: axes,
        }
        .point(t)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.inner().level(p) > 1.0 && self.outer().level(p) < 1.0
    }
}

/// Exact image of a circle of radius `rho` about the origin, as
/// `(center distance along θ, [semi-axis along θ, semi-axis across])`.
pub fn mapped_circle(rho: f64, r: f64) -> Result<(f64, [f64; 2])> {
    let k = 1.0 - rho * rho * r * r;
    if !(k > 0.0) {
        return Err(invalid(format!(
            "the circle of radius {rho} is not mapped to a bounded ellipse for r = {r}"
        )));
    }
    let a2 = 1.0 + r * r;
    Ok((
        r * (1.0 + rho * rho) / k,
        [rho * a2 / k, rho * a2.sqrt() / k.sqrt()],
    ))
}

/// Concentric elliptical annulus fitted to the image of
/// `{d^{-1/2} < |v| < 2 d^{-1/2}}` under the projective rotation `(r, θ)`.
///
/// Both boundary ellipses are exact; their centers differ by `O(d^{-1})` and
/// the shared center is their midpoint, with half the offset kept as `margin`.
pub fn map_annulus(d: usize, r: f64, theta: f64) -> Result<EllipticalAnnulus> {
    if d == 0 {
        return Err(invalid("degree must be at least 1"));
    }
    if !(r >= 0.0 && r.is_finite() && theta.is_finite()) {
        return Err(invalid(format!(
            "need finite r >= 0 and finite theta, got r = {r}, theta = {theta}"
        )));
    }
    let rho = 1.0 / (d as f64).sqrt();
    let (c_in, inner) = mapped_circle(rho, r)?;
    let (c_out, outer) = mapped_circle(2.0 * rho, r)?;
    let c = 0.5 * (c_in + c_out);
    let (s, co) = theta.sin_cos();
    let mut annulus = EllipticalAnnulus::new([c * co, c * s], theta, inner, outer)?;
    annulus.margin = 0.5 * (c_out - c_in);
    Ok(annulus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn untilted_annulus_is_circular() {
        for d in [1, 4, 100] {
            let a = map_annulus(d, 0.0, 0.3).unwrap();
            let rho = 1.0 / (d as f64).sqrt();
            assert_eq!(a.center, [0.0, 0.0]);
            assert!(
                (a.inner_semi_axes[0] - rho).abs() < 1e-15
                    && (a.inner_semi_axes[1] - rho).abs() < 1e-15
            );
            assert!((a.outer_semi_axes[0] - 2.0 * rho).abs() < 1e-15);
            assert!((a.outer_semi_axes[1] - 2.0 * rho).abs() < 1e-15);
            assert_eq!(a.margin, 0.0);
        }
    }

    #[test]
    fn mapped_circle_points_lie_on_the_exact_ellipse() {
        for (rho, r, theta) in [(0.1, 1.0, 0.0f64), (0.2, 0.5, 1.1), (0.01, 0.9, -2.0)] {
            let (c, axes) = mapped_circle(rho, r).unwrap();
            let e = Ellipse {
                center: [c * theta.cos(), c * theta.sin()],
                angle: theta,
                semi_axes: axes,
            };
            for i in 0..64 {
                let t = 2.0 * PI * i as f64 / 64.0;
                let v = projective_rotation(r, theta, [rho * t.cos(), rho * t.sin()]).unwrap();
                assert!(
                    (e.level(v) - 1.0).abs() < 1e-12,
                    "rho {rho} r {r}: {}",
                    e.level(v)
                );
            }
        }
    }

    #[test]
    fn origin_goes_to_the_marked_point() {
        let v = projective_rotation(0.7, 2.0, [0.0, 0.0]).unwrap();
        assert!((v[0] - 0.7 * 2f64.cos()).abs() < 1e-15 && (v[1] - 0.7 * 2f64.sin()).abs() < 1e-15);
        // the line at angle θ is preserved
        let w = projective_rotation(0.7, 2.0, [0.3 * 2f64.cos(), 0.3 * 2f64.sin()]).unwrap();
        assert!((w[1] * 2f64.cos() - w[0] * 2f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn unit_offset_axes() {
        // across θ the axes scale by a = √(1 + r²), along θ by a²
        let d = 10_000;
        let a = map_annulus(d, 1.0, 0.0).unwrap();
        let rho = 0.01;
        assert!((a.inner_semi_axes[1] / (SQRT_2 * rho) - 1.0).abs() < 1e-3);
        assert!((a.outer_semi_axes[1] / (2.0 * SQRT_2 * rho) - 1.0).abs() < 1e-3);
        assert!((a.inner_semi_axes[0] / (2.0 * rho) - 1.0).abs() < 1e-3);
        assert!((a.outer_semi_axes[0] / (4.0 * rho) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn center_error_is_first_order() {
        let (r, theta) = (0.5, 0.8);
        let err = |d: usize| {
            let a = map_annulus(d, r, theta).unwrap();
            (a.center[0] - r * theta.cos()).hypot(a.center[1] - r * theta.sin())
        };
        for d in [100, 200, 400, 800] {
            let ratio = err(d) / err(2 * d);
            assert!((ratio - 2.0).abs() < 0.05, "d {d}: {ratio}");
            assert!(err(d) * d as f64 <= 2.0);
        }
        let a = map_annulus(400, r, theta).unwrap();
        assert!(a.margin > 0.0 && a.margin < 1.0 / 400.0 * 2.0);
    }

    #[test]
    fn annulus_membership() {
        let a = map_annulus(100, 0.5, 0.0).unwrap();
        assert!(!a.contains(a.center));
        let mid = a.interpolate(0.4, 0.5);
        assert!(a.contains(mid));
        assert!(!a.contains([a.center[0] + 1.0, a.center[1]]));
    }

    #[test]
    fn unbounded_images_are_rejected() {
        assert!(map_annulus(1, 1.0, 0.0).is_err());
        assert!(EllipticalAnnulus::circular([0.0, 0.0], 1.0, 1.0).is_err());
    }
}
