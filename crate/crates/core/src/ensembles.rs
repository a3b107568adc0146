//! Seeded samplers for the random polynomial models.
//!
//! Every trial is identified by `(master_seed, stream_index)`. Independent
//! draws inside a trial (the two field components, auxiliary randomness) use
//! separate lanes, each a ChaCha8 stream keyed by the master seed and lane and
//! positioned by the stream index, so no generator state is shared between
//! trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::polynomials::{coeff_count, BivariatePolynomial, VectorField};
use crate::special::ln_multinomial;

/// Lane for the first field component.
pub const LANE_P: u64 = 0;
/// Lane for the second field component.
pub const LANE_Q: u64 = 1;
/// First lane free for auxiliary draws.
pub const LANE_AUX: u64 = 2;

/// Default Bargmann–Fock truncation order.
pub const DEFAULT_BF_TRUNCATION: usize = 40;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededRng {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeededRng {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Generator for one lane of this trial.
    pub fn lane(&self, lane: u64) -> ChaCha8Rng {
        let key =
            splitmix64(self.master_seed ^ splitmix64(lane.wrapping_add(0x5851_f42d_4c95_7f2d)));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(self.stream_index);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientDistribution {
    #[default]
    Gaussian,
    /// Random signs `±1` with equal probability.
    UniformPm1,
}

impl CoefficientDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Gaussian => StandardNormal.sample(rng),
            Self::UniformPm1 => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// Which random model to draw from. The degree is supplied separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleSpec {
    Kostlan {},
    UniformCube {},
    PowerLaw {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma: Option<f64>,
        #[serde(default)]
        coefficient_distribution: CoefficientDistribution,
    },
    BargmannFock {
        #[serde(default = "default_truncation")]
        truncation: usize,
    },
}

fn default_truncation() -> usize {
    DEFAULT_BF_TRUNCATION
}

impl EnsembleSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Kostlan {} => "kostlan",
            Self::UniformCube {} => "uniform_cube",
            Self::PowerLaw { .. } => "power_law",
            Self::BargmannFock { .. } => "bargmann_fock",
        }
    }

    /// Draws one polynomial of degree `d` from `rng`.
    ///
    /// Power-law specs without an explicit `gamma` need [`sample_power_law`].
    pub fn sample_polynomial<R: Rng + ?Sized>(
        &self,
        d: usize,
        rng: &mut R,
    ) -> Result<BivariatePolynomial> {
        match self {
            Self::Kostlan {} => sample_kostlan(d, rng),
            Self::UniformCube {} => sample_uniform_cube(d, rng),
            Self::PowerLaw {
                gamma: Some(g),
                coefficient_distribution,
            } => sample_power_law(d, *g, *coefficient_distribution, rng),
            Self::PowerLaw { gamma: None, .. } => Err(invalid("power_law ensemble needs gamma")),
            Self::BargmannFock { .. } => Err(invalid(
                "bargmann_fock samples are entire functions, not polynomials",
            )),
        }
    }

    /// Draws the pair `(p, q)` for trial `seed` from lanes [`LANE_P`] and [`LANE_Q`].
    pub fn sample_pair(
        &self,
        d: usize,
        seed: &SeededRng,
    ) -> Result<(BivariatePolynomial, BivariatePolynomial)> {
        let p = self.sample_polynomial(d, &mut seed.lane(LANE_P))?;
        let q = self.sample_polynomial(d, &mut seed.lane(LANE_Q))?;
        Ok((p, q))
    }
}

/// Kostlan weight `√(d! / ((d-j-k)! j! k!))`.
pub fn kostlan_weight(d: usize, j: usize, k: usize) -> f64 {
    (0.5 * ln_multinomial(&[d - j - k, j, k])).exp()
}

/// Coefficient of `x^j y^k` is `N(0,1)·√(d!/((d-j-k)! j! k!))`.
pub fn sample_kostlan<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<BivariatePolynomial> {
    let mut coeffs = Vec::with_capacity(coeff_count(d));
    for m in 0..=d {
        for j in 0..=m {
            let g: f64 = StandardNormal.sample(rng);
            coeffs.push(g * kostlan_weight(d, j, m - j));
        }
    }
    BivariatePolynomial::from_coeffs(d, coeffs)
}

/// I.i.d. `Uniform[-1, 1]` coefficients for `1 <= j + k <= d`, zero constant term.
///
/// Draws follow storage order, so for a fixed generator the degree `d₁` sample
/// is the truncation of the degree `d₂ > d₁` sample.
pub fn sample_uniform_cube<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<BivariatePolynomial> {
    if d == 0 {
        return Err(invalid("uniform cube ensemble needs degree >= 1"));
    }
    let mut coeffs = vec![0.0];
    coeffs.reserve(coeff_count(d) - 1);
    for _ in 1..coeff_count(d) {
        coeffs.push(rng.random_range(-1.0..=1.0));
    }
    BivariatePolynomial::from_coeffs(d, coeffs)
}

/// Degree-`m` weight `c_m = m^{γ/2}`.
pub fn power_law_weight(m: usize, gamma: f64) -> f64 {
    (m as f64).powf(0.5 * gamma)
}

/// Coefficient of `x^j y^k` is `c_{j+k} ξ` with `ξ` drawn from `dist`; no constant term.
pub fn sample_power_law<R: Rng + ?Sized>(
    d: usize,
    gamma: f64,
    dist: CoefficientDistribution,
    rng: &mut R,
) -> Result<BivariatePolynomial> {
    if d == 0 {
        return Err(invalid("power-law ensemble needs degree >= 1"));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(invalid(format!(
            "gamma must be finite and non-negative, got {gamma}"
        )));
    }
    let mut coeffs = vec![0.0];
    coeffs.reserve(coeff_count(d) - 1);
    for m in 1..=d {
        let c = power_law_weight(m, gamma);
        for _ in 0..=m {
            coeffs.push(c * dist.sample(rng));
        }
    }
    BivariatePolynomial::from_coeffs(d, coeffs)
}

/// Truncated Bargmann–Fock function
/// `exp(-(x²+y²)/2) Σ_{j,k<=M} a_{j,k} x^j y^k / √(j! k!)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BargmannFockComponent {
    truncation: usize,
    /// `a_{j,k}` in row-major `(j, k)` order over the `(M+1)²` box.
    coeffs: Vec<f64>,
}

impl BargmannFockComponent {
    pub fn from_coeffs(truncation: usize, coeffs: Vec<f64>) -> Result<Self> {
        let n = truncation + 1;
        if coeffs.len() != n * n {
            return Err(invalid(format!(
                "truncation {truncation} needs {} coefficients",
                n * n
            )));
        }
        Ok(Self { truncation, coeffs })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn coeff(&self, j: usize, k: usize) -> f64 {
        self.coeffs[j * (self.truncation + 1) + k]
    }

    fn scaled_powers(&self, x: f64) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.truncation + 1);
        let mut v = 1.0;
        u.push(v);
        for j in 1..=self.truncation {
            v *= x / (j as f64).sqrt();
            u.push(v);
        }
        u
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_with_gradient(x, y).0
    }

    pub fn eval_with_gradient(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let n = self.truncation + 1;
        let ux = self.scaled_powers(x);
        let uy = self.scaled_powers(y);
        let (mut s, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for j in 0..n {
            let row = &self.coeffs[j * n..(j + 1) * n];
            let (mut r, mut ry) = (0.0, 0.0);
            for k in 0..n {
                r += row[k] * uy[k];
                if k > 0 {
                    ry += row[k] * (k as f64).sqrt() * uy[k - 1];
                }
            }
            s += ux[j] * r;
            sy += ux[j] * ry;
            if j > 0 {
                sx += (j as f64).sqrt() * ux[j - 1] * r;
            }
        }
        let e = (-0.5 * (x * x + y * y)).exp();
        (e * s, e * (sx - x * s), e * (sy - y * s))
    }

    /// `Σ_{j>M or k>M} r^{j+k}/√(j! k!)`, a bound on the neglected terms per unit
    /// coefficient on `|v| <= r`.
    pub fn tail_bound(&self, r: f64) -> f64 {
        truncation_tail_bound(self.truncation, r)
    }

    /// Errors if the tail bound at radius `r` exceeds `tolerance`.
    pub fn check_radius(&self, r: f64, tolerance: f64) -> Result<()> {
        let bound = self.tail_bound(r);
        if bound > tolerance {
            return Err(Error::Truncation {
                bound,
                tolerance,
                radius: r,
            });
        }
        Ok(())
    }
}

/// Tail bound of the order-`m` truncation at radius `r`.
pub fn truncation_tail_bound(m: usize, r: f64) -> f64 {
    // Σ_{j<=m} r^j/√j! and its complement
    let mut head = 0.0;
    let mut tail = 0.0;
    let mut term = 1.0;
    let mut j = 0usize;
    loop {
        if j <= m {
            head += term;
        } else {
            tail += term;
            if term < 1e-18 * tail && (j as f64) > r * r {
                break;
            }
        }
        j += 1;
        term *= r / (j as f64).sqrt();
        if j > 100_000 {
            break;
        }
    }
    2.0 * head * tail + tail * tail
}

pub fn sample_bargmann_fock<R: Rng + ?Sized>(
    truncation: usize,
    rng: &mut R,
) -> BargmannFockComponent {
    let n = truncation + 1;
    let coeffs = (0..n * n).map(|_| StandardNormal.sample(rng)).collect();
    BargmannFockComponent { truncation, coeffs }
}

/// A pair of independent Bargmann–Fock components viewed as a vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct BargmannFockField {
    pub f: BargmannFockComponent,
    pub g: BargmannFockComponent,
}

impl BargmannFockField {
    pub fn sample(truncation: usize, seed: &SeededRng) -> Self {
        Self {
            f: sample_bargmann_fock(truncation, &mut seed.lane(LANE_P)),
            g: sample_bargmann_fock(truncation, &mut seed.lane(LANE_Q)),
        }
    }
}

impl VectorField for BargmannFockField {
    fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        [self.f.eval(x, y), self.g.eval(x, y)]
    }

    fn jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let (_, fx, fy) = self.f.eval_with_gradient(x, y);
        let (_, gx, gy) = self.g.eval_with_gradient(x, y);
        [[fx, fy], [gx, gy]]
    }

    fn eval_with_jacobian(&self, x: f64, y: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let (f, fx, fy) = self.f.eval_with_gradient(x, y);
        let (g, gx, gy) = self.g.eval_with_gradient(x, y);
        ([f, g], [[fx, fy], [gx, gy]])
    }
}
