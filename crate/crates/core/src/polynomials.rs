//! Dense bivariate polynomials, their homogenizations, and planar vector fields.
//!
//! Coefficients are stored on the simplex `{(j, k) : j + k <= d}` ordered by
//! total degree and then by the power of `x`, so the coefficient of `x^j y^k`
//! sits at `m(m+1)/2 + j` with `m = j + k`. The same order is used when drawing
//! random coefficients, which makes truncation a prefix operation.

use crate::error::{invalid, Result};
use crate::special::{ln_multinomial, multinomial};

/// Largest degree accepted for dense bivariate storage (memory grows like `d²/2`).
pub const MAX_DEGREE: usize = 2000;

/// Number of coefficients of a bivariate polynomial of degree `d`.
pub const fn coeff_count(d: usize) -> usize {
    (d + 1) * (d + 2) / 2
}

#[inline]
pub const fn index(j: usize, k: usize) -> usize {
    let m = j + k;
    m * (m + 1) / 2 + j
}

fn check_degree(d: usize) -> Result<()> {
    if d > MAX_DEGREE {
        return Err(invalid(format!(
            "degree {d} exceeds dense storage limit {MAX_DEGREE}"
        )));
    }
    Ok(())
}

/// `p(x, y) = Σ_{j+k<=d} c_{j,k} x^j y^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariatePolynomial {
    degree: usize,
    coeffs: Vec<f64>,
}

impl BivariatePolynomial {
    pub fn zeros(degree: usize) -> Result<Self> {
        check_degree(degree)?;
        Ok(Self {
            degree,
            coeffs: vec![0.0; coeff_count(degree)],
        })
    }

    /// Takes ownership of coefficients already laid out in storage order.
    pub fn from_coeffs(degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_degree(degree)?;
        if coeffs.len() != coeff_count(degree) {
            return Err(invalid(format!(
                "degree {degree} needs {} coefficients, got {}",
                coeff_count(degree),
                coeffs.len()
            )));
        }
        Ok(Self { degree, coeffs })
    }

    /// Builds a polynomial from `(j, k, c)` triples; repeated monomials add up.
    pub fn from_terms(degree: usize, terms: &[(usize, usize, f64)]) -> Result<Self> {
        let mut p = Self::zeros(degree)?;
        for &(j, k, c) in terms {
            if j + k > degree {
                return Err(invalid(format!(
                    "monomial x^{j} y^{k} exceeds degree {degree}"
                )));
            }
            p.coeffs[index(j, k)] += c;
        }
        Ok(p)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize, k: usize) -> f64 {
        if j + k > self.degree {
            0.0
        } else {
            self.coeffs[index(j, k)]
        }
    }

    pub fn set_coeff(&mut self, j: usize, k: usize, c: f64) -> Result<()> {
        if j + k > self.degree {
            return Err(invalid(format!(
                "monomial x^{j} y^{k} exceeds degree {}",
                self.degree
            )));
        }
        self.coeffs[index(j, k)] = c;
        Ok(())
    }

    /// Coefficients of total degree `m`, ordered by the power of `x`.
    pub fn degree_part(&self, m: usize) -> &[f64] {
        if m > self.degree {
            return &[];
        }
        let start = index(0, m);
        &self.coeffs[start..start + m + 1]
    }

    /// `(j, k, c)` for every stored coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.degree).flat_map(move |m| {
            self.degree_part(m)
                .iter()
                .enumerate()
                .map(move |(j, &c)| (j, m - j, c))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// The sub-polynomial of total degree at most `d`.
    pub fn truncate(&self, d: usize) -> Self {
        let d = d.min(self.degree);
        Self {
            degree: d,
            coeffs: self.coeffs[..coeff_count(d)].to_vec(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + other`, at the larger of the two degrees.
    pub fn add(&self, other: &Self) -> Self {
        let (big, small) = if self.degree >= other.degree {
            (self, other)
        } else {
            (other, self)
        };
        let mut coeffs = big.coeffs.clone();
        for (c, s) in coeffs.iter_mut().zip(&small.coeffs) {
            *c += s;
        }
        Self {
            degree: big.degree,
            coeffs,
        }
    }

    pub fn partial_x(&self) -> Self {
        let d = self.degree.saturating_sub(1);
        let mut out = vec![0.0; coeff_count(d)];
        if self.degree > 0 {
            for (j, k, c) in self.terms() {
                if j > 0 {
                    out[index(j - 1, k)] = j as f64 * c;
                }
            }
        }
        Self {
            degree: d,
            coeffs: out,
        }
    }

    pub fn partial_y(&self) -> Self {
        let d = self.degree.saturating_sub(1);
        let mut out = vec![0.0; coeff_count(d)];
        if self.degree > 0 {
            for (j, k, c) in self.terms() {
                if k > 0 {
                    out[index(j, k - 1)] = k as f64 * c;
                }
            }
        }
        Self {
            degree: d,
            coeffs: out,
        }
    }

    /// Evaluates `p(x, y)`.
    ///
    /// Each homogeneous part is summed at the point scaled onto the unit box
    /// and parts are combined Horner-style in the scale factor.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let t = x.abs().max(y.abs());
        if t == 0.0 {
            return self.coeffs[0];
        }
        let (pu, pw) = unit_powers(x / t, y / t, self.degree);
        let mut acc = 0.0;
        for m in (0..=self.degree).rev() {
            let part = self.degree_part(m);
            let mut h = 0.0;
            for (j, &c) in part.iter().enumerate() {
                h += c * pu[j] * pw[m - j];
            }
            acc = acc * t + h;
        }
        acc
    }

    /// Value and gradient `(p, ∂p/∂x, ∂p/∂y)` in one pass.
    pub fn eval_with_gradient(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let t = x.abs().max(y.abs());
        if t == 0.0 {
            let px = if self.degree >= 1 {
                self.coeffs[index(1, 0)]
            } else {
                0.0
            };
            let py = if self.degree >= 1 {
                self.coeffs[index(0, 1)]
            } else {
                0.0
            };
            return (self.coeffs[0], px, py);
        }
        let (pu, pw) = unit_powers(x / t, y / t, self.degree);
        let (mut v, mut gx, mut gy) = (0.0, 0.0, 0.0);
        for m in (0..=self.degree).rev() {
            let part = self.degree_part(m);
            let (mut h, mut hx, mut hy) = (0.0, 0.0, 0.0);
            for (j, &c) in part.iter().enumerate() {
                let k = m - j;
                h += c * pu[j] * pw[k];
                if j > 0 {
                    hx += j as f64 * c * pu[j - 1] * pw[k];
                }
                if k > 0 {
                    hy += k as f64 * c * pu[j] * pw[k - 1];
                }
            }
            v = v * t + h;
            // derivative parts have degree m - 1
            if m > 0 {
                gx = gx * t + hx;
                gy = gy * t + hy;
            }
        }
        (v, gx, gy)
    }

    /// `z^d p(x/z, y/z)` as a homogeneous trivariate polynomial of degree `d`.
    pub fn homogenize(&self) -> HomogeneousPolynomial {
        HomogeneousPolynomial {
            degree: self.degree,
            coeffs: self.coeffs.clone(),
        }
    }

    /// `z^d p(x/z, y/z)` for a target degree `d` at least the stored degree.
    pub fn homogenize_to(&self, d: usize) -> Result<HomogeneousPolynomial> {
        if d < self.degree {
            return Err(invalid(format!(
                "cannot homogenize degree {} to degree {d}",
                self.degree
            )));
        }
        check_degree(d)?;
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(coeff_count(d), 0.0);
        Ok(HomogeneousPolynomial { degree: d, coeffs })
    }
}

fn unit_powers(u: f64, w: f64, d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut pu = Vec::with_capacity(d + 1);
    let mut pw = Vec::with_capacity(d + 1);
    let (mut a, mut b) = (1.0, 1.0);
    for _ in 0..=d {
        pu.push(a);
        pw.push(b);
        a *= u;
        b *= w;
    }
    (pu, pw)
}

/// Homogeneous polynomial of degree `d` in `(x, y, z)`.
///
/// The coefficient of `x^j y^k z^{d-j-k}` uses the same slot as `x^j y^k` in
/// [`BivariatePolynomial`].
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousPolynomial {
    degree: usize,
    coeffs: Vec<f64>,
}

impl HomogeneousPolynomial {
    /// Builds from `([j, k, l], c)` pairs; every exponent triple must sum to `d`.
    pub fn from_terms(degree: usize, terms: &[([usize; 3], f64)]) -> Result<Self> {
        check_degree(degree)?;
        let mut coeffs = vec![0.0; coeff_count(degree)];
        for &(alpha, c) in terms {
            if alpha.iter().sum::<usize>() != degree {
                return Err(invalid(format!(
                    "multi-index {alpha:?} does not have total degree {degree}"
                )));
            }
            coeffs[index(alpha[0], alpha[1])] += c;
        }
        Ok(Self { degree, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, alpha: [usize; 3]) -> f64 {
        if alpha.iter().sum::<usize>() != self.degree {
            0.0
        } else {
            self.coeffs[index(alpha[0], alpha[1])]
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ([usize; 3], f64)> + '_ {
        let d = self.degree;
        (0..=d).flat_map(move |m| {
            (0..=m).map(move |j| ([j, m - j, d - m], self.coeffs[index(j, m - j)]))
        })
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        self.terms()
            .map(|([j, k, l], c)| c * x.powi(j as i32) * y.powi(k as i32) * z.powi(l as i32))
            .sum()
    }

    pub fn dehomogenize(&self) -> BivariatePolynomial {
        BivariatePolynomial {
            degree: self.degree,
            coeffs: self.coeffs.clone(),
        }
    }

    /// `(Σ f_α² / C(d; α))^{1/2}`.
    pub fn fischer_norm(&self) -> f64 {
        let d = self.degree;
        self.terms()
            .filter(|(_, c)| *c != 0.0)
            .map(|(alpha, c)| c * c / weight(d, alpha))
            .sum::<f64>()
            .sqrt()
    }

    /// `Σ |f_α| / C(d; α)^{1/2}`, the sum of the Fischer norms of the
    /// individual terms. Always at least [`Self::fischer_norm`].
    pub fn fischer_term_sum(&self) -> f64 {
        let d = self.degree;
        self.terms()
            .filter(|(_, c)| *c != 0.0)
            .map(|(alpha, c)| c.abs() / weight(d, alpha).sqrt())
            .sum()
    }
}

fn weight(d: usize, alpha: [usize; 3]) -> f64 {
    if d <= 170 {
        multinomial(&alpha)
    } else {
        ln_multinomial(&alpha).exp()
    }
}

/// Fischer norm of a homogeneous polynomial of degree `d` given as `(α, f_α)`.
pub fn fischer_norm(terms: &[([usize; 3], f64)], d: usize) -> Result<f64> {
    Ok(HomogeneousPolynomial::from_terms(d, terms)?.fischer_norm())
}

/// Kostlan two-point covariance `(1 + x₁x₂ + y₁y₂)^d`.
pub fn kostlan_covariance(v1: [f64; 2], v2: [f64; 2], d: usize) -> f64 {
    let base = 1.0 + v1[0] * v2[0] + v1[1] * v2[1];
    if d <= i32::MAX as usize {
        base.powi(d as i32)
    } else {
        base.powf(d as f64)
    }
}

/// A planar vector field `F(x, y) = (P(x, y), Q(x, y))`.
pub trait VectorField {
    fn eval(&self, x: f64, y: f64) -> [f64; 2];

    /// `[[∂P/∂x, ∂P/∂y], [∂Q/∂x, ∂Q/∂y]]`.
    fn jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 2];

    fn eval_with_jacobian(&self, x: f64, y: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        (self.eval(x, y), self.jacobian(x, y))
    }
}

impl<T: VectorField + ?Sized> VectorField for &T {
    fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        (**self).eval(x, y)
    }

    fn jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        (**self).jacobian(x, y)
    }

    fn eval_with_jacobian(&self, x: f64, y: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        (**self).eval_with_jacobian(x, y)
    }
}

/// `(1 + x² + y²)^{-d/2} F`: same orbits and zeros as `F`, but without the
/// growth of a degree-`d` field, so Lipschitz bounds stay local.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveWeight<F> {
    pub field: F,
    pub degree: usize,
}

impl<F: VectorField> ProjectiveWeight<F> {
    pub fn new(field: F, degree: usize) -> Self {
        Self { field, degree }
    }

    fn weight(&self, x: f64, y: f64) -> (f64, f64) {
        let base = 1.0 + x * x + y * y;
        let w = (-0.5 * self.degree as f64 * base.ln()).exp();
        // ∂w/∂x = -d x w / base, likewise in y
        (w, -(self.degree as f64) * w / base)
    }
}

impl<F: VectorField> VectorField for ProjectiveWeight<F> {
    fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        let (w, _) = self.weight(x, y);
        let f = self.field.eval(x, y);
        [w * f[0], w * f[1]]
    }

    fn jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        self.eval_with_jacobian(x, y).1
    }

    fn eval_with_jacobian(&self, x: f64, y: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let (w, dw) = self.weight(x, y);
        let (f, j) = self.field.eval_with_jacobian(x, y);
        let g = [w * f[0], w * f[1]];
        let jg = [
            [w * j[0][0] + f[0] * dw * x, w * j[0][1] + f[0] * dw * y],
            [w * j[1][0] + f[1] * dw * x, w * j[1][1] + f[1] * dw * y],
        ];
        (g, jg)
    }
}

/// How a [`PlanarField`] was built.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldForm {
    General,
    /// `P = y + εp`, `Q = -x + εq`.
    CenterFocus {
        epsilon: f64,
        p: BivariatePolynomial,
        q: BivariatePolynomial,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarField {
    pub p: BivariatePolynomial,
    pub q: BivariatePolynomial,
    pub form: FieldForm,
}

impl PlanarField {
    pub fn new(p: BivariatePolynomial, q: BivariatePolynomial) -> Self {
        Self {
            p,
            q,
            form: FieldForm::General,
        }
    }

    /// `(y + εp, -x + εq)`.
    pub fn center_focus(
        p: BivariatePolynomial,
        q: BivariatePolynomial,
        epsilon: f64,
    ) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(invalid(format!(
                "epsilon must be finite and non-negative, got {epsilon}"
            )));
        }
        let d = p.degree().max(q.degree()).max(1);
        let y = BivariatePolynomial::from_terms(d, &[(0, 1, 1.0)])?;
        let minus_x = BivariatePolynomial::from_terms(d, &[(1, 0, -1.0)])?;
        let big_p = y.add(&p.scale(epsilon));
        let big_q = minus_x.add(&q.scale(epsilon));
        Ok(Self {
            p: big_p,
            q: big_q,
            form: FieldForm::CenterFocus { epsilon, p, q },
        })
    }

    pub fn degree(&self) -> usize {
        self.p.degree().max(self.q.degree())
    }

    /// `(ε, p, q)` for center-focus fields.
    pub fn perturbation(&self) -> Option<(f64, &BivariatePolynomial, &BivariatePolynomial)> {
        match &self.form {
            FieldForm::CenterFocus { epsilon, p, q } => Some((*epsilon, p, q)),
            FieldForm::General => None,
        }
    }
}

impl VectorField for PlanarField {
    fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        [self.p.eval(x, y), self.q.eval(x, y)]
    }

    fn jacobian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let (_, px, py) = self.p.eval_with_gradient(x, y);
        let (_, qx, qy) = self.q.eval_with_gradient(x, y);
        [[px, py], [qx, qy]]
    }

    fn eval_with_jacobian(&self, x: f64, y: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let (p, px, py) = self.p.eval_with_gradient(x, y);
        let (q, qx, qy) = self.q.eval_with_gradient(x, y);
        ([p, q], [[px, py], [qx, qy]])
    }
}
