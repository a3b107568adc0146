//! Univariate reduction of the Melnikov function for power-law coefficient
//! variances.
//!
//! With `Var a_{j,k} = Var b_{j,k} = c_m²` on degree `m`, the coefficient of
//! `s^m` in `f` is `c_{2m+1} ζ_m`, where `ζ_m` is a fixed linear combination
//! of the degree-`2m+1` coefficients with variance `σ_m²`. For Gaussian
//! coefficients this is exactly `c_{2m+1} σ_m ξ_m` with independent standard
//! normal `ξ_m`, so degrees far beyond the dense bivariate limit are cheap.

use std::f64::consts::PI;

use rand_distr::{Distribution, StandardNormal};

use super::series::{sigma_m_squared, zeta_weights, MelnikovSeries};
use super::zeros::count_zeros;
use crate::ensembles::{power_law_weight, CoefficientDistribution, SeededRng, LANE_P, LANE_Q};
use crate::error::{invalid, Result};

/// Lower end used for counts on `(0, ∞)`; `f(0) = ζ₀` is almost surely non-zero.
pub const S_MIN: f64 = f64::MIN_POSITIVE;

/// `c_{2m+1} σ_m` for `m = 0..=⌊(d-1)/2⌋`.
pub fn power_law_scales(d: usize, gamma: f64) -> Vec<f64> {
    if d == 0 {
        return Vec::new();
    }
    (0..=(d - 1) / 2)
        .map(|m| power_law_weight(2 * m + 1, gamma) * sigma_m_squared(m, 1.0).sqrt())
        .collect()
}

/// Draws power-law series for one `(d, γ, distribution)`.
///
/// The Gaussian scales cost `O(d²)` to build, so repeated draws should share
/// one sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerLawSampler {
    d: usize,
    gamma: f64,
    dist: CoefficientDistribution,
    /// Gaussian only: `c_{2m+1} σ_m`.
    scales: Vec<f64>,
}

impl PowerLawSampler {
    pub fn new(d: usize, gamma: f64, dist: CoefficientDistribution) -> Result<Self> {
        if d == 0 {
            return Err(invalid("power-law ensemble needs degree >= 1"));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(invalid(format!(
                "gamma must be finite and non-negative, got {gamma}"
            )));
        }
        let scales = match dist {
            CoefficientDistribution::Gaussian => power_law_scales(d, gamma),
            CoefficientDistribution::UniformPm1 => Vec::new(),
        };
        Ok(Self {
            d,
            gamma,
            dist,
            scales,
        })
    }

    /// Gaussian coefficients use the exact one-normal-per-`m` reduction; `±1`
    /// coefficients build every `ζ_m` from its `2m+2` summands.
    pub fn sample(&self, seed: &SeededRng) -> MelnikovSeries {
        let coeffs = match self.dist {
            CoefficientDistribution::Gaussian => {
                let mut rng = seed.lane(LANE_P);
                self.scales
                    .iter()
                    .map(|c| {
                        let xi: f64 = StandardNormal.sample(&mut rng);
                        c * xi
                    })
                    .collect()
            }
            CoefficientDistribution::UniformPm1 => {
                let mut ra = seed.lane(LANE_P);
                let mut rb = seed.lane(LANE_Q);
                (0..=(self.d - 1) / 2)
                    .map(|m| {
                        let (wa, wb) = zeta_weights(m);
                        let za: f64 = wa.iter().map(|w| w * self.dist.sample(&mut ra)).sum();
                        let zb: f64 = wb.iter().map(|w| w * self.dist.sample(&mut rb)).sum();
                        power_law_weight(2 * m + 1, self.gamma) * (za + zb)
                    })
                    .collect()
            }
        };
        MelnikovSeries::new(coeffs)
    }

    /// Zeros of a fresh series on `(0, ∞)`.
    pub fn zero_count(&self, seed: &SeededRng) -> Result<usize> {
        Ok(count_zeros(&self.sample(seed).coeffs, S_MIN, f64::INFINITY)?.count)
    }
}

/// Draws the series `f` of a degree-`d` power-law field.
pub fn sample_power_law_series(
    d: usize,
    gamma: f64,
    dist: CoefficientDistribution,
    seed: &SeededRng,
) -> Result<MelnikovSeries> {
    Ok(PowerLawSampler::new(d, gamma, dist)?.sample(seed))
}

/// Zeros of the power-law Melnikov series on `(0, ∞)`.
pub fn power_law_zero_count(
    d: usize,
    gamma: f64,
    dist: CoefficientDistribution,
    seed: &SeededRng,
) -> Result<usize> {
    PowerLawSampler::new(d, gamma, dist)?.zero_count(seed)
}

/// Asymptotic slope `(1 + √γ)/(2π)` of the mean zero count against `ln d`.
pub fn power_law_slope(gamma: f64) -> f64 {
    (1.0 + gamma.sqrt()) / (2.0 * PI)
}
