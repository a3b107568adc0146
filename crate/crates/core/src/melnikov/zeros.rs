//! Counting real zeros of univariate polynomials on an interval.
//!
//! Up to [`STURM_MAX_DEGREE`] the count comes from a Sturm sequence built in
//! exact integer arithmetic: every `f64` coefficient is a dyadic rational, so
//! after a common power-of-two shift the polynomial has integer coefficients
//! and the primitive pseudo-remainder sequence can be formed without rounding.
//! Above that degree the count comes from sign changes on a dense grid.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Float, One, Signed, Zero};

use super::series::MelnikovSeries;
use crate::error::{invalid, Error, Result};

/// Highest degree handled by the exact Sturm sequence.
pub const STURM_MAX_DEGREE: usize = 32;

/// Grid points per family used by the fallback counter.
///
/// Zeros of these series accumulate at `s = 1` on the scale of `-ln|1-s|`,
/// which one of the two grid families resolves uniformly whatever the degree.
pub const DEFAULT_GRID_POINTS: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMethod {
    Sturm,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZeroCount {
    pub count: usize,
    pub method: CountMethod,
    /// The polynomial shares a factor with its derivative. Only the Sturm path
    /// can detect this.
    pub multiple_root: bool,
}

/// Distinct real zeros of `f(s)` in `(s_lo, s_hi)`; `s_hi` may be `+∞`.
pub fn count_real_zeros(series: &MelnikovSeries, s_lo: f64, s_hi: f64) -> Result<usize> {
    Ok(count_zeros(&series.coeffs, s_lo, s_hi)?.count)
}

/// As [`count_real_zeros`] for coefficients in ascending powers, reporting how
/// the count was obtained.
pub fn count_zeros(coeffs: &[f64], s_lo: f64, s_hi: f64) -> Result<ZeroCount> {
    let c = trimmed(coeffs)?;
    if c.len() - 1 <= STURM_MAX_DEGREE {
        sturm_count(c, s_lo, s_hi)
    } else {
        let count = grid_count(c, s_lo, s_hi, DEFAULT_GRID_POINTS)?;
        Ok(ZeroCount {
            count,
            method: CountMethod::Grid,
            multiple_root: false,
        })
    }
}

fn trimmed(coeffs: &[f64]) -> Result<&[f64]> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(invalid("non-finite polynomial coefficient"));
    }
    let n = coeffs.iter().rposition(|&c| c != 0.0).ok_or_else(|| {
        Error::DegeneratePolynomial("the zero polynomial has no isolated zeros".into())
    })?;
    Ok(&coeffs[..=n])
}

fn check_interval(s_lo: f64, s_hi: f64) -> Result<()> {
    if !(s_lo > 0.0 && s_lo.is_finite() && s_hi > s_lo) {
        return Err(invalid(format!(
            "need 0 < s_lo < s_hi, got ({s_lo}, {s_hi})"
        )));
    }
    Ok(())
}

/// Exact dyadic representation `m·2^e` of a finite `f64`.
fn dyadic(x: f64) -> (BigInt, i64) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let (mant, exp, sign) = Float::integer_decode(x);
    let m = BigInt::from(mant);
    (if sign < 0 { -m } else { m }, exp as i64)
}

/// Integer polynomial with the same roots as `coeffs`.
fn integer_poly(coeffs: &[f64]) -> Vec<BigInt> {
    let parts: Vec<_> = coeffs.iter().map(|&c| dyadic(c)).collect();
    let min_e = parts
        .iter()
        .filter(|(m, _)| !m.is_zero())
        .map(|&(_, e)| e)
        .min()
        .unwrap_or(0);
    let p: Vec<BigInt> = parts
        .into_iter()
        .map(|(m, e)| m << ((e - min_e) as usize))
        .collect();
    primitive(p)
}

fn degree(p: &[BigInt]) -> usize {
    p.len() - 1
}

fn primitive(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    let mut g = BigInt::zero();
    for c in &p {
        g = g.gcd(c);
        if g.is_one() {
            return p;
        }
    }
    if !g.is_zero() && !g.is_one() {
        for c in &mut p {
            *c /= &g;
        }
    }
    p
}

fn derivative(p: &[BigInt]) -> Vec<BigInt> {
    if p.len() <= 1 {
        return vec![BigInt::zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect()
}

/// Pseudo-remainder: `lc(b)^(deg a - deg b + 1)·a mod b`.
fn prem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let db = degree(b);
    let lb = b[db].clone();
    let mut r = a.to_vec();
    let mut e = (degree(a) + 1).saturating_sub(db) as u32;
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[shift + i] -= &lr * bc;
        }
        r.pop();
        while r.len() > 1 && r.last().is_some_and(Zero::is_zero) {
            r.pop();
        }
        if r.is_empty() {
            r.push(BigInt::zero());
        }
        e = e.saturating_sub(1);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
    }
    if e > 0 {
        let f = num_traits::pow(lb, e as usize);
        for c in r.iter_mut() {
            *c *= &f;
        }
    }
    r
}

fn is_zero_poly(p: &[BigInt]) -> bool {
    p.iter().all(Zero::is_zero)
}

/// Sturm chain of `p` with primitive remainders.
fn sturm_chain(p: Vec<BigInt>) -> Vec<Vec<BigInt>> {
    let dp = primitive(derivative(&p));
    let mut chain = vec![p];
    if is_zero_poly(&dp) {
        return chain;
    }
    chain.push(dp);
    loop {
        let n = chain.len();
        let (a, b) = (&chain[n - 2], &chain[n - 1]);
        let mut r = prem(a, b);
        if is_zero_poly(&r) {
            break;
        }
        // prem carries lc(b)^(δ+1); restore the sign of the true remainder, then negate
        let delta = degree(a) - degree(b);
        let lc_negative = b[degree(b)].is_negative();
        let flip = !(lc_negative && (delta + 1) % 2 == 1);
        if flip {
            for c in r.iter_mut() {
                *c = -std::mem::take(c);
            }
        }
        chain.push(primitive(r));
    }
    chain
}

/// Sign of `p(m·2^e)`.
fn sign_at(p: &[BigInt], m: &BigInt, e: i64) -> Sign {
    if e >= 0 {
        let x: BigInt = m << (e as usize);
        let mut acc = BigInt::zero();
        for c in p.iter().rev() {
            acc = acc * &x + c;
        }
        acc.sign()
    } else {
        // 2^(-e·n) p(m/2^(-e)) = Σ c_i m^i 2^(-e(n-i))
        let sh = (-e) as usize;
        let n = degree(p);
        let mut acc = p[n].clone();
        for i in (0..n).rev() {
            acc = acc * m + (&p[i] << (sh * (n - i)));
        }
        acc.sign()
    }
}

fn variations(signs: impl Iterator<Item = Sign>) -> usize {
    let mut last = Sign::NoSign;
    let mut v = 0;
    for s in signs {
        if s == Sign::NoSign {
            continue;
        }
        if last != Sign::NoSign && s != last {
            v += 1;
        }
        last = s;
    }
    v
}

fn variations_at(chain: &[Vec<BigInt>], x: f64) -> usize {
    if x == f64::INFINITY {
        return variations(chain.iter().map(|p| p[degree(p)].sign()));
    }
    let (m, e) = dyadic(x);
    variations(chain.iter().map(|p| sign_at(p, &m, e)))
}

/// Exact Sturm count of distinct zeros in `(s_lo, s_hi]`.
pub fn sturm_count(coeffs: &[f64], s_lo: f64, s_hi: f64) -> Result<ZeroCount> {
    check_interval(s_lo, s_hi)?;
    let c = trimmed(coeffs)?;
    let p = integer_poly(c);
    if degree(&p) == 0 {
        return Ok(ZeroCount {
            count: 0,
            method: CountMethod::Sturm,
            multiple_root: false,
        });
    }
    let chain = sturm_chain(p);
    let last = chain.last().expect("non-empty chain");
    let multiple_root = degree(last) > 0;
    let count = variations_at(&chain, s_lo).saturating_sub(variations_at(&chain, s_hi));
    Ok(ZeroCount {
        count,
        method: CountMethod::Sturm,
        multiple_root,
    })
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * s + a)
}

const LANES: usize = 8;

/// `horner` at many points, interleaved so independent chains overlap.
fn horner_many(c: &[f64], xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut chunks = xs.chunks_exact(LANES);
    for chunk in &mut chunks {
        let mut acc = [0.0; LANES];
        for &a in c.iter().rev() {
            for l in 0..LANES {
                acc[l] = acc[l] * chunk[l] + a;
            }
        }
        out.extend_from_slice(&acc);
    }
    out.extend(chunks.remainder().iter().map(|&x| horner(c, x)));
    out
}

/// Largest `u = -ln(1-s)` sampled; `1 - e^{-40}` is 1 in double precision.
const U_CAP: f64 = 40.0;

/// Grid over `[a, b] ⊂ [0, 1]`: uniform in `√s` and uniform in `-ln(1-s)`.
fn unit_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(2 * points + 2);
    let (ra, rb) = (a.sqrt(), b.sqrt());
    for i in 0..=points {
        let t = ra + (rb - ra) * i as f64 / points as f64;
        g.push(t * t);
    }
    let ua = -(-a).ln_1p();
    let ub = (-(-b).ln_1p()).min(ua + U_CAP);
    for i in 0..=points {
        let u = ua + (ub - ua) * i as f64 / points as f64;
        g.push(-(-u).exp_m1());
    }
    g.push(a);
    g.push(b);
    g.retain(|&s| s >= a && s <= b);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

fn bisect(poly: &[f64], mut lo: f64, mut hi: f64, mut vlo: f64, tol: f64) -> f64 {
    while (hi - lo).abs() > tol {
        let mid = 0.5 * (lo + hi);
        let vm = horner(poly, mid);
        if vm == 0.0 {
            return mid;
        }
        if (vm > 0.0) == (vlo > 0.0) {
            lo = mid;
            vlo = vm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A sample of `f` at `s`; beyond `s = 1` the value comes from the reversed
/// polynomial at `t = 1/s`, which has the same sign.
#[derive(Clone, Copy)]
struct Sample {
    s: f64,
    v: f64,
    reversed: bool,
}
/// Zeros of `coeffs` on `(s_lo, s_hi)` located by grid sign changes and
/// bisection to `tol` (relative to `s` beyond 1).
///
/// The part beyond `s = 1` is handled through the reversed polynomial in
/// `t = 1/s`, so `s_hi = +∞` is allowed.
pub fn grid_roots(
    coeffs: &[f64],
    s_lo: f64,
    s_hi: f64,
    points: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    locate(coeffs, s_lo, s_hi, points, Some(tol))
}

/// Number of sign changes of `coeffs` on the fallback grid over `(s_lo, s_hi)`.
pub fn grid_count(coeffs: &[f64], s_lo: f64, s_hi: f64, points: usize) -> Result<usize> {
    Ok(locate(coeffs, s_lo, s_hi, points, None)?.len())
}

fn locate(
    coeffs: &[f64],
    s_lo: f64,
    s_hi: f64,
    points: usize,
    tol: Option<f64>,
) -> Result<Vec<f64>> {
    check_interval(s_lo, s_hi)?;
    let c = trimmed(coeffs)?;
    let rev: Vec<f64> = c.iter().rev().copied().collect();
    let points = points.max(16);
    let mut samples = Vec::new();
    if s_lo < 1.0 {
        let grid = unit_grid(s_lo, s_hi.min(1.0), points);
        let vals = horner_many(c, &grid);
        samples.extend(grid.into_iter().zip(vals).map(|(s, v)| Sample {
            s,
            v,
            reversed: false,
        }));
    }
    if s_hi > 1.0 {
        let t_lo = if s_hi.is_infinite() { 0.0 } else { 1.0 / s_hi };
        let t_hi = 1.0 / s_lo.max(1.0);
        // t = 0 stands for s = ∞: outside the open interval but a valid sign sample
        let mut grid = unit_grid(t_lo, t_hi, points);
        grid.reverse();
        let vals = horner_many(&rev, &grid);
        samples.extend(grid.into_iter().zip(vals).map(|(t, v)| Sample {
            s: 1.0 / t,
            v,
            reversed: true,
        }));
    }
    let mut roots = Vec::new();
    let mut prev: Option<Sample> = None;
    for cur in samples {
        if cur.v == 0.0 {
            continue;
        }
        if let Some(p) = prev {
            if (p.v > 0.0) != (cur.v > 0.0) {
                let root = match tol {
                    None => 0.5 * (p.s + cur.s),
                    Some(tol) if p.reversed && cur.reversed => {
                        let (a, b) = (1.0 / p.s, 1.0 / cur.s);
                        1.0 / bisect(&rev, a, b, p.v, tol * a.min(1.0) * a.min(1.0))
                    }
                    Some(tol) => bisect(c, p.s, cur.s.min(2.0), p.v, tol),
                };
                roots.push(root);
            }
        }
        prev = Some(cur);
    }
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::SeededRng;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    fn from_roots(roots: &[f64]) -> Vec<f64> {
        let mut p = vec![1.0];
        for &r in roots {
            let mut q = vec![0.0; p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                q[i + 1] += c;
                q[i] -= r * c;
            }
            p = q;
        }
        p
    }

    fn gaussian_poly(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = SeededRng::new(seed, 0).lane(0);
        (0..=n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn cubic_with_three_roots() {
        let p = from_roots(&[1.0, 2.0, 3.0]);
        assert_eq!(sturm_count(&p, 1e-9, 4.0).unwrap().count, 3);
        assert_eq!(grid_count(&p, 1e-9, 4.0, 1000).unwrap(), 3);
        assert_eq!(sturm_count(&p, 1.5, 2.5).unwrap().count, 1);
        assert_eq!(sturm_count(&p, 1e-3, f64::INFINITY).unwrap().count, 3);
        assert_eq!(grid_count(&p, 1e-3, f64::INFINITY, 1000).unwrap(), 3);
    }

    #[test]
    fn hopf_series_has_one_zero() {
        let tau = std::f64::consts::TAU;
        let s = MelnikovSeries::new(vec![tau, -tau]);
        assert_eq!(count_real_zeros(&s, 1e-6, 4.0).unwrap(), 1);
    }

    #[test]
    fn zero_polynomial_is_degenerate() {
        let s = MelnikovSeries::new(vec![0.0, 0.0]);
        assert!(matches!(
            count_real_zeros(&s, 0.1, 1.0),
            Err(Error::DegeneratePolynomial(_))
        ));
    }

    #[test]
    fn double_root_is_flagged_and_counted_once() {
        let p = from_roots(&[0.5, 0.5, 2.0]);
        let z = sturm_count(&p, 0.1, 3.0).unwrap();
        assert_eq!(z.count, 2);
        assert!(z.multiple_root);
        assert!(
            !sturm_count(&from_roots(&[0.5, 2.0]), 0.1, 3.0)
                .unwrap()
                .multiple_root
        );
    }

    #[test]
    fn close_roots_and_wide_coefficient_range() {
        let p = from_roots(&[1e-3, 1.0000001, 1.0000002, 1e4]);
        assert_eq!(sturm_count(&p, 1e-6, f64::INFINITY).unwrap().count, 4);
        assert_eq!(sturm_count(&p, 1.00000015, f64::INFINITY).unwrap().count, 2);
    }

    #[test]
    fn grid_roots_are_located() {
        let p = from_roots(&[0.25, 0.9, 3.0, 50.0]);
        let r = grid_roots(&p, 1e-4, f64::INFINITY, 4000, 1e-13).unwrap();
        assert_eq!(r.len(), 4);
        for (got, want) in r.iter().zip([0.25, 0.9, 3.0, 50.0]) {
            assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn degree_50_sturm_matches_dense_grid() {
        for seed in 0..20 {
            let p = gaussian_poly(50, seed);
            let exact = sturm_count(&p, 1e-6, f64::INFINITY).unwrap().count;
            let dense = grid_count(&p, 1e-6, f64::INFINITY, 50_000).unwrap();
            assert_eq!(exact, dense, "seed {seed}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn counts_add_over_subintervals(seed in 0u64..10_000, n in 1usize..30, mid in 0.05f64..5.0) {
            let p = gaussian_poly(n, seed);
            let whole = sturm_count(&p, 1e-6, 10.0).unwrap();
            let a = sturm_count(&p, 1e-6, mid).unwrap();
            let b = sturm_count(&p, mid, 10.0).unwrap();
            prop_assert_eq!(whole.count, a.count + b.count);
        }

        #[test]
        fn grid_agrees_with_sturm_at_low_degree(seed in 0u64..10_000, n in 1usize..40) {
            let p = gaussian_poly(n, seed);
            let exact = sturm_count(&p, 1e-6, f64::INFINITY).unwrap().count;
            let g = grid_count(&p, 1e-6, f64::INFINITY, DEFAULT_GRID_POINTS).unwrap();
            prop_assert_eq!(exact, g);
        }
    }
}
