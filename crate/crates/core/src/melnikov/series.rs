use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::polynomials::BivariatePolynomial;
use crate::quadrature::periodic_trapezoid;
use crate::special::{circle_moment, ln_double_factorial};

/// `f(s) = Σ_m ζ_m s^m`, so that the Melnikov function is `𝒜(r) = r² f(r²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelnikovSeries {
    /// Entry `m` multiplies `s^m`.
    pub coeffs: Vec<f64>,
}

impl MelnikovSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// Largest stored power of `s` (0 for an empty series).
    pub fn max_m(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval_f(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    /// `𝒜(r) = r² f(r²)`.
    pub fn eval_a(&self, r: f64) -> f64 {
        let s = r * r;
        s * self.eval_f(s)
    }

    /// Series of the truncation keeping `s^m` for `m <= max_m`.
    pub fn truncate(&self, max_m: usize) -> Self {
        Self {
            coeffs: self.coeffs.iter().take(max_m + 1).copied().collect(),
        }
    }
}

/// `∫_0^{2π} [p(r cos θ, r sin θ) r cos θ + q(r cos θ, r sin θ) r sin θ] dθ` by the
/// uniform trapezoid rule with `quad_n` nodes.
pub fn melnikov_quadrature(
    p: &BivariatePolynomial,
    q: &BivariatePolynomial,
    r: f64,
    quad_n: usize,
) -> Result<f64> {
    let d = p.degree().max(q.degree());
    if quad_n < 2 * (d + 2) {
        return Err(invalid(format!(
            "quad_n = {quad_n} is below the exactness threshold {}",
            2 * (d + 2)
        )));
    }
    Ok(periodic_trapezoid(quad_n, |t| {
        let (s, c) = t.sin_cos();
        let (x, y) = (r * c, r * s);
        p.eval(x, y) * x + q.eval(x, y) * y
    }))
}

/// Exact series coefficients from the odd-degree parts of `p` and `q`:
/// `ζ_m = Σ_{j+k=2m+1} a_{j,k} W(j+1, k) + b_{j,k} W(j, k+1)` with `W` the
/// circle moments.
pub fn melnikov_series(p: &BivariatePolynomial, q: &BivariatePolynomial) -> MelnikovSeries {
    let d = p.degree().max(q.degree());
    if d == 0 {
        return MelnikovSeries::new(vec![0.0]);
    }
    let max_m = (d - 1) / 2;
    let mut coeffs = Vec::with_capacity(max_m + 1);
    for m in 0..=max_m {
        let n = 2 * m + 1;
        let mut z = 0.0;
        // only (odd j, even k) survives for p and (even j, odd k) for q
        for k in (0..=n).step_by(2) {
            let j = n - k;
            z += p.coeff(j, k) * circle_moment(j + 1, k);
        }
        for j in (0..=n).step_by(2) {
            let k = n - j;
            z += q.coeff(j, k) * circle_moment(j, k + 1);
        }
        coeffs.push(z);
    }
    MelnikovSeries::new(coeffs)
}

/// Weights `(w_a, w_b)` with `ζ_m = Σ_ℓ w_a[ℓ] a_{2m+1-2ℓ, 2ℓ} + w_b[ℓ] b_{2m-2ℓ, 2ℓ+1}`.
pub fn zeta_weights(m: usize) -> (Vec<f64>, Vec<f64>) {
    let den = ln_double_factorial(2 * m as i64 + 2);
    let w =
        |a: i64, b: i64| 2.0 * PI * (ln_double_factorial(a) + ln_double_factorial(b) - den).exp();
    let wa = (0..=m as i64)
        .map(|l| w(2 * m as i64 - 2 * l + 1, 2 * l - 1))
        .collect();
    let wb = (0..=m as i64)
        .map(|l| w(2 * m as i64 - 2 * l - 1, 2 * l + 1))
        .collect();
    (wa, wb)
}

/// `E ζ_m²` when every coefficient of degree `2m+1` is independent, centred,
/// with variance `coeff_variance`.
pub fn sigma_m_squared(m: usize, coeff_variance: f64) -> f64 {
    let (wa, wb) = zeta_weights(m);
    coeff_variance * wa.iter().chain(&wb).map(|w| w * w).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_kostlan, SeededRng};

    fn hopf() -> (BivariatePolynomial, BivariatePolynomial) {
        let p =
            BivariatePolynomial::from_terms(3, &[(1, 0, 1.0), (3, 0, -1.0), (1, 2, -1.0)]).unwrap();
        let q =
            BivariatePolynomial::from_terms(3, &[(0, 1, 1.0), (2, 1, -1.0), (0, 3, -1.0)]).unwrap();
        (p, q)
    }

    #[test]
    fn hopf_melnikov() {
        let (p, q) = hopf();
        for r in [0.3, 1.0, 1.7] {
            let a = melnikov_quadrature(&p, &q, r, 16).unwrap();
            let want = 2.0 * PI * r * r * (1.0 - r * r);
            assert!((a - want).abs() < 1e-13, "r={r}");
        }
        let s = melnikov_series(&p, &q);
        assert!((s.coeffs[0] - 2.0 * PI).abs() < 1e-14);
        assert!((s.coeffs[1] + 2.0 * PI).abs() < 1e-14);
        assert!(s.eval_a(1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_and_threshold() {
        let z = BivariatePolynomial::zeros(4).unwrap();
        assert_eq!(melnikov_quadrature(&z, &z, 0.5, 12).unwrap(), 0.0);
        assert!(melnikov_quadrature(&z, &z, 0.5, 11).is_err());
    }

    #[test]
    fn cubic_basis_coefficients() {
        let z = BivariatePolynomial::zeros(3).unwrap();
        let mono = |j, k| BivariatePolynomial::from_terms(3, &[(j, k, 1.0)]).unwrap();
        let cases = [
            (mono(3, 0), z.clone(), 0.75 * PI),
            (mono(1, 2), z.clone(), 0.25 * PI),
            (z.clone(), mono(2, 1), 0.25 * PI),
            (z.clone(), mono(0, 3), 0.75 * PI),
        ];
        for (p, q, want) in cases {
            let s = melnikov_series(&p, &q);
            assert!((s.coeffs[1] - want).abs() < 1e-14);
            let direct = melnikov_quadrature(&p, &q, 1.0, 64).unwrap();
            assert!((direct - want).abs() < 1e-14);
        }
    }

    #[test]
    fn even_degrees_do_not_contribute() {
        let p = BivariatePolynomial::from_terms(
            4,
            &[(2, 0, 3.0), (1, 1, -2.0), (0, 0, 1.0), (2, 2, 5.0)],
        )
        .unwrap();
        let q = BivariatePolynomial::from_terms(4, &[(0, 2, 1.0), (4, 0, 7.0)]).unwrap();
        assert!(melnikov_series(&p, &q).coeffs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn series_matches_quadrature_on_random_samples() {
        for trial in 0..20 {
            let seed = SeededRng::new(11, trial);
            let p = sample_kostlan(10, &mut seed.lane(0)).unwrap();
            let q = sample_kostlan(10, &mut seed.lane(1)).unwrap();
            let s = melnikov_series(&p, &q);
            for r in [0.3, 0.7, 1.1] {
                let a = melnikov_quadrature(&p, &q, r, 64).unwrap();
                let b = s.eval_a(r);
                let scale = s
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(m, c)| c.abs() * r.powi(2 * m as i32 + 2))
                    .sum::<f64>();
                assert!(
                    (a - b).abs() <= 1e-10 * scale,
                    "trial {trial} r {r}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn sigma_squared_closed_forms() {
        assert!((sigma_m_squared(0, 1.0) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((sigma_m_squared(1, 1.0) - 1.25 * PI * PI).abs() < 1e-12);
        assert!((sigma_m_squared(1, 3.0) - 3.75 * PI * PI).abs() < 1e-12);
        let m = 10_000;
        let lim = m as f64 * sigma_m_squared(m, 1.0) / (8.0 * PI);
        assert!((lim - 1.0).abs() < 0.01, "{lim}");
    }

    #[test]
    fn weights_agree_with_circle_moments() {
        for m in 0..6 {
            let (wa, wb) = zeta_weights(m);
            for l in 0..=m {
                let n = 2 * m + 1;
                assert!((wa[l] - circle_moment(n - 2 * l + 1, 2 * l)).abs() < 1e-14);
                assert!((wb[l] - circle_moment(n - 2 * l - 1, 2 * l + 2)).abs() < 1e-14);
            }
        }
    }
}
