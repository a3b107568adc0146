//! Factorial-type quantities that appear in Kostlan weights and circle moments.
//!
//! Everything is evaluated in log space past the range where factorials fit in
//! an `f64` (170!).

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

/// Largest `n` for which `n!` is finite in `f64`.
const MAX_DIRECT_FACTORIAL: usize = 170;

/// Below this argument double factorials are accumulated as exact-ish products.
const DIRECT_DOUBLE_FACTORIAL: i64 = 64;

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else if n <= DIRECT_DOUBLE_FACTORIAL as usize {
        (2..=n).map(|i| (i as f64).ln()).sum()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `ln(n!!)` with the conventions `0!! = (-1)!! = 1`.
pub fn ln_double_factorial(n: i64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    if n <= DIRECT_DOUBLE_FACTORIAL {
        let mut acc = 0.0;
        let mut i = n;
        while i > 1 {
            acc += (i as f64).ln();
            i -= 2;
        }
        return acc;
    }
    if n % 2 == 0 {
        // (2k)!! = 2^k k!
        let k = (n / 2) as f64;
        k * std::f64::consts::LN_2 + ln_gamma(k + 1.0)
    } else {
        // (2k-1)!! = (2k)! / (2^k k!)
        let k = ((n + 1) / 2) as f64;
        ln_gamma(2.0 * k + 1.0) - k * std::f64::consts::LN_2 - ln_gamma(k + 1.0)
    }
}

/// `ln` of the multinomial coefficient `d! / (alpha_1! ... alpha_n!)`, where
/// `d` is the sum of `alpha`.
pub fn ln_multinomial(alpha: &[usize]) -> f64 {
    let d: usize = alpha.iter().sum();
    ln_factorial(d) - alpha.iter().map(|&a| ln_factorial(a)).sum::<f64>()
}

/// Multinomial coefficient `d! / (alpha_1! ... alpha_n!)`.
///
/// Exact factorial ratios are used while `d <= 170`; beyond that the value is
/// exponentiated from log space.
pub fn multinomial(alpha: &[usize]) -> f64 {
    let d: usize = alpha.iter().sum();
    if d <= MAX_DIRECT_FACTORIAL {
        // Successive binomials keep intermediate values bounded by the result.
        let mut remaining = d;
        let mut acc = 1.0;
        for &a in alpha {
            acc *= binomial(remaining, a);
            remaining -= a;
        }
        acc
    } else {
        ln_multinomial(alpha).exp()
    }
}

/// Binomial coefficient `C(n, k)` by the multiplicative formula.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 1..=k {
        acc = acc * (n - k + i) as f64 / i as f64;
    }
    acc.round_if_integral()
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `∫_0^{2π} cos^a(θ) sin^b(θ) dθ`.
///
/// Zero unless both exponents are even, in which case it equals
/// `2π (a-1)!! (b-1)!! / (a+b)!!`.
pub fn circle_moment(a: usize, b: usize) -> f64 {
    if a % 2 == 1 || b % 2 == 1 {
        return 0.0;
    }
    let ln = ln_double_factorial(a as i64 - 1) + ln_double_factorial(b as i64 - 1)
        - ln_double_factorial((a + b) as i64);
    2.0 * PI * ln.exp()
}

trait RoundIfIntegral {
    fn round_if_integral(self) -> Self;
}

impl RoundIfIntegral for f64 {
    // Binomials below 2^53 are integers; snap away accumulated rounding.
    fn round_if_integral(self) -> Self {
        if self < 9.0e15 {
            self.round()
        } else {
            self
        }
    }
}
