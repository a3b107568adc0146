//! The limiting cycle count `X(ρ)` of the uniform-cube model as the degree
//! grows, sampled through coupled truncations.

use std::f64::consts::PI;

use super::series::{melnikov_series, MelnikovSeries};
use super::zeros::count_zeros;
use crate::ensembles::{sample_uniform_cube, SeededRng, LANE_P, LANE_Q};
use crate::error::{invalid, Result};

/// Inner radius excluded from cycle counts; the equilibrium at the origin is a
/// zero of `𝒜`.
pub const R_MIN: f64 = 1e-3;

/// `R^{2D}/(1-R)²` at `R = (1+ρ)/2`, the sup-distance between the degree-`D`
/// truncation and its limit on the disk of radius `R`.
pub fn truncation_tail(rho: f64, d: usize) -> f64 {
    let r = 0.5 * (1.0 + rho);
    r.powi(2 * d as i32) / (1.0 - r).powi(2)
}

/// Melnikov series of the degree-`d` uniform-cube sample of trial `seed`.
///
/// Lower degrees are truncations of higher ones for the same seed.
pub fn uniform_cube_series(d: usize, seed: &SeededRng) -> Result<MelnikovSeries> {
    let p = sample_uniform_cube(d, &mut seed.lane(LANE_P))?;
    let q = sample_uniform_cube(d, &mut seed.lane(LANE_Q))?;
    Ok(melnikov_series(&p, &q))
}

/// One draw of the zero count of `𝒜` on `(R_MIN, ρ)` at truncation degree `d`.
pub fn sample_x_rho(rho: f64, d: usize, seed: &SeededRng) -> Result<usize> {
    if !(rho > R_MIN && rho < 1.0) {
        return Err(invalid(format!("rho must lie in ({R_MIN}, 1), got {rho}")));
    }
    let series = uniform_cube_series(d, seed)?;
    Ok(count_zeros(&series.coeffs, R_MIN * R_MIN, rho * rho)?.count)
}

/// `(1/π)√(-ln(1-√ρ))`, the conjectured growth of `E X(ρ)` as `ρ → 1`.
pub fn x_rho_conjecture(rho: f64) -> f64 {
    (-(1.0 - rho.sqrt()).ln()).sqrt() / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncations_are_prefixes() {
        let seed = SeededRng::new(4, 17);
        let small = uniform_cube_series(21, &seed).unwrap();
        let big = uniform_cube_series(60, &seed).unwrap();
        assert_eq!(small.coeffs.as_slice(), &big.coeffs[..small.coeffs.len()]);
    }

    #[test]
    fn tail_is_tiny_at_default_truncation() {
        assert!(truncation_tail(0.5, 200) < 1e-40);
        assert!(truncation_tail(0.5, 10) > 1e-3);
    }

    #[test]
    fn rho_range_checked() {
        let seed = SeededRng::new(0, 0);
        assert!(sample_x_rho(1.0, 20, &seed).is_err());
        assert!(sample_x_rho(0.5, 20, &seed).is_ok());
    }

    #[test]
    fn conjecture_values() {
        assert!(
            (x_rho_conjecture(0.99) - (-(1.0 - 0.99f64.sqrt()).ln()).sqrt() / PI).abs() < 1e-15
        );
        assert!(x_rho_conjecture(0.9) < x_rho_conjecture(0.99));
    }
}
