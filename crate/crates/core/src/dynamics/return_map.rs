//! First-return map of `(y + εp, -x + εq)` on the positive `x` axis.
//!
//! Orbits of the unperturbed field turn clockwise. With `x = r cos ψ`,
//! `y = -r sin ψ` the radius obeys
//!
//! `dr/dψ = ε (x p + y q) / r / (1 - ε (x q - y p) / r²)`,
//!
//! integrated over `ψ ∈ [0, 2π]`. The state is `r - r₀` so that the error
//! control sees the `O(ε)` displacement rather than the radius itself.

use std::f64::consts::TAU;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ode::{integrate, integrate_observed, locate_crossing, OdeError, OdeOptions};
use crate::polynomials::{BivariatePolynomial, PlanarField};

/// Inner end of the fixed-point scan, shared with the Melnikov zero counts.
pub use crate::melnikov::R_MIN;

/// Stages whose angular-speed denominator falls below this are refused.
pub const DENOMINATOR_FLOOR: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnStatus {
    Ok,
    DenominatorVanished,
    StepFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapResult {
    pub r0: f64,
    pub r1: f64,
    pub status: ReturnStatus,
}

impl ReturnMapResult {
    pub fn is_ok(&self) -> bool {
        self.status == ReturnStatus::Ok
    }

    /// `r₁ - r₀`.
    pub fn displacement(&self) -> f64 {
        self.r1 - self.r0
    }
}

fn center_focus_parts(
    field: &PlanarField,
) -> Result<(f64, &BivariatePolynomial, &BivariatePolynomial)> {
    field
        .perturbation()
        .ok_or_else(|| invalid("return maps need a field in center-focus form"))
}

fn check_radius(r0: f64) -> Result<()> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(invalid(format!(
            "starting radius must be positive and finite, got {r0}"
        )));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(invalid(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    Ok(())
}

/// Return radius after one clockwise revolution from `(r0, 0)`, integrated in
/// the polar angle with relative tolerance `tol`.
///
/// A stage with angular-speed denominator below [`DENOMINATOR_FLOOR`] (or a
/// non-positive radius) is refused; if refusals persist the result carries
/// [`ReturnStatus::DenominatorVanished`].
pub fn poincare_return(field: &PlanarField, r0: f64, tol: f64) -> Result<ReturnMapResult> {
    let (eps, p, q) = center_focus_parts(field)?;
    check_radius(r0)?;
    check_tol(tol)?;
    if eps == 0.0 {
        return Ok(ReturnMapResult {
            r0,
            r1: r0,
            status: ReturnStatus::Ok,
        });
    }
    let rhs = |psi: f64, state: &[f64; 1]| -> Option<[f64; 1]> {
        let r = r0 + state[0];
        if !(r > 0.0) {
            return None;
        }
        let (s, c) = psi.sin_cos();
        let (x, y) = (r * c, -r * s);
        let (pv, qv) = (p.eval(x, y), q.eval(x, y));
        let den = 1.0 - eps * (x * qv - y * pv) / (r * r);
        if !(den >= DENOMINATOR_FLOOR) {
            return None;
        }
        Some([eps * (x * pv + y * qv) / r / den])
    };
    let opts = OdeOptions {
        rtol: tol,
        atol: (1e-3 * tol * eps.min(1.0) * r0 * r0).max(f64::MIN_POSITIVE),
        h_init: 0.05,
        h_min: 1e-10,
        h_max: 0.5,
        max_steps: 100_000,
    };
    match integrate(rhs, 0.0, [0.0], TAU, &opts) {
        Ok(out) => {
            let r1 = r0 + out.y[0];
            let status = if r1 > 0.0 {
                ReturnStatus::Ok
            } else {
                ReturnStatus::StepFailure
            };
            Ok(ReturnMapResult { r0, r1, status })
        }
        Err(OdeError::StageRejected { .. }) => Ok(ReturnMapResult {
            r0,
            r1: f64::NAN,
            status: ReturnStatus::DenominatorVanished,
        }),
        Err(_) => Ok(ReturnMapResult {
            r0,
            r1: f64::NAN,
            status: ReturnStatus::StepFailure,
        }),
    }
}

/// Return radius computed in Cartesian time: the orbit from `(r0, 0)` is
/// followed until it next crosses the positive `x` axis downwards.
///
/// Needs no angular-speed floor, so it serves as the fallback when the polar
/// integration refuses its stages.
pub fn cartesian_return(field: &PlanarField, r0: f64, tol: f64) -> Result<ReturnMapResult> {
    let (eps, p, q) = center_focus_parts(field)?;
    check_radius(r0)?;
    check_tol(tol)?;
    let fail = ReturnMapResult {
        r0,
        r1: f64::NAN,
        status: ReturnStatus::StepFailure,
    };
    let mut rhs = |_: f64, z: &[f64; 2]| -> Option<[f64; 2]> {
        let (x, y) = (z[0], z[1]);
        let v = [y + eps * p.eval(x, y), -x + eps * q.eval(x, y)];
        v.iter().all(|c| c.is_finite()).then_some(v)
    };
    let opts = OdeOptions {
        rtol: tol,
        atol: 1e-3 * tol * r0,
        h_init: 0.05,
        h_min: 1e-12,
        h_max: 0.5,
        max_steps: 200_000,
    };
    // generous time budget: the angular speed is at least the denominator floor
    let horizon = 2.0 * TAU / DENOMINATOR_FLOOR;
    let out = integrate_observed(&mut rhs, 0.0, [r0, 0.0], horizon, &opts, |s| {
        if s.y0[1] > 0.0 && s.y1[1] <= 0.0 && s.y1[0] > 0.0 {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    let Ok(out) = out else { return Ok(fail) };
    let Some(step) = out.stopped_at else {
        return Ok(fail);
    };
    let Some((_, z)) = locate_crossing(&mut rhs, &step, |z| z[1], 1e-3 * tol) else {
        return Ok(fail);
    };
    let r1 = z[0].hypot(z[1]);
    if !(r1 > 0.0 && r1.is_finite()) {
        return Ok(fail);
    }
    Ok(ReturnMapResult {
        r0,
        r1,
        status: ReturnStatus::Ok,
    })
}

/// `max(200, 20√d)`: the zero spacing of the displacement scales like `d^{-1/2}`.
pub fn default_grid_n(d: usize) -> usize {
    200.max((20.0 * (d as f64).sqrt()).ceil() as usize)
}

/// Isolated fixed points of the return map on `[R_MIN, ρ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointScan {
    pub count: usize,
    pub radii: Vec<f64>,
    /// Evaluations that needed the Cartesian fallback.
    pub fallbacks: usize,
}

/// Integrator tolerance used for a radius tolerance `tol`.
fn ode_tol(tol: f64) -> f64 {
    (1e-2 * tol).clamp(1e-12, 1e-8)
}

/// Counts sign changes of `D(r) = 𝒫(r) - r` on a uniform grid of `grid_n`
/// radii spanning `[R_MIN, ρ]` and bisects each bracket to width `tol`.
///
/// `grid_n = None` uses [`default_grid_n`]. Polar evaluations that fail are
/// retried in Cartesian form; if that fails too the trial is invalid.
pub fn count_return_fixed_points(
    field: &PlanarField,
    rho: f64,
    grid_n: Option<usize>,
    tol: f64,
) -> Result<FixedPointScan> {
    let (eps, _, _) = center_focus_parts(field)?;
    if eps == 0.0 {
        return Err(Error::DegenerateFamily);
    }
    if !(rho > R_MIN && rho.is_finite()) {
        return Err(invalid(format!("rho must exceed {R_MIN}, got {rho}")));
    }
    check_tol(tol)?;
    let n = grid_n.unwrap_or_else(|| default_grid_n(field.degree()));
    if n < 2 {
        return Err(invalid("grid_n must be at least 2"));
    }
    let itol = ode_tol(tol);
    let mut fallbacks = 0;
    let mut displacement = |r: f64| -> Result<f64> {
        let polar = poincare_return(field, r, itol)?;
        if polar.is_ok() {
            return Ok(polar.displacement());
        }
        fallbacks += 1;
        let cart = cartesian_return(field, r, itol)?;
        if cart.is_ok() {
            Ok(cart.displacement())
        } else {
            Err(Error::TrialInvalid(format!(
                "return map failed at r = {r} ({:?})",
                polar.status
            )))
        }
    };
    let radii: Vec<f64> = (0..n)
        .map(|i| R_MIN + (rho - R_MIN) * i as f64 / (n - 1) as f64)
        .collect();
    let mut values = Vec::with_capacity(n);
    for &r in &radii {
        values.push(displacement(r)?);
    }
    let mut roots = Vec::new();
    for i in 0..n - 1 {
        let (mut lo, mut hi) = (radii[i], radii[i + 1]);
        let (d_lo, d_hi) = (values[i], values[i + 1]);
        if (d_lo >= 0.0) == (d_hi >= 0.0) {
            continue;
        }
        let lo_positive = d_lo >= 0.0;
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if (displacement(mid)? >= 0.0) == lo_positive {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    Ok(FixedPointScan {
        count: roots.len(),
        radii: roots,
        fallbacks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_kostlan, sample_uniform_cube, SeededRng, LANE_P, LANE_Q};
    use crate::melnikov::{count_real_zeros, melnikov_series};

    fn hopf_perturbation() -> (BivariatePolynomial, BivariatePolynomial) {
        let p =
            BivariatePolynomial::from_terms(3, &[(1, 0, 1.0), (3, 0, -1.0), (1, 2, -1.0)]).unwrap();
        let q =
            BivariatePolynomial::from_terms(3, &[(0, 1, 1.0), (2, 1, -1.0), (0, 3, -1.0)]).unwrap();
        (p, q)
    }

    #[test]
    fn unperturbed_center_returns_exactly() {
        let (p, q) = hopf_perturbation();
        let f = PlanarField::center_focus(p, q, 0.0).unwrap();
        for r0 in [0.1, 1.0, 3.0] {
            let res = poincare_return(&f, r0, 1e-10).unwrap();
            assert_eq!(res.r1, r0);
            assert!(res.is_ok());
        }
        assert_eq!(
            count_return_fixed_points(&f, 1.0, None, 1e-8),
            Err(Error::DegenerateFamily)
        );
    }

    #[test]
    fn hopf_cycle_is_fixed() {
        let (p, q) = hopf_perturbation();
        for eps in [1e-3, 0.1, 0.5] {
            let f = PlanarField::center_focus(p.clone(), q.clone(), eps).unwrap();
            let res = poincare_return(&f, 1.0, 1e-10).unwrap();
            assert!((res.r1 - 1.0).abs() < 1e-9, "eps {eps}: {}", res.r1);
            // dr/dψ = ε r (1 - r²) has the closed-form flow
            let r0: f64 = 0.5;
            let e = (2.0 * eps * TAU).exp();
            let want = r0 * e.sqrt() / (1.0 + r0 * r0 * (e - 1.0)).sqrt();
            let got = poincare_return(&f, r0, 1e-11).unwrap().r1;
            assert!((got - want).abs() < 1e-9, "eps {eps}: {got} vs {want}");
            let scan = count_return_fixed_points(&f, 2.0, None, 1e-8).unwrap();
            assert_eq!(scan.count, 1);
            assert!((scan.radii[0] - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn polar_and_cartesian_agree() {
        let seed = SeededRng::new(5, 0);
        let p = sample_kostlan(8, &mut seed.lane(LANE_P)).unwrap();
        let q = sample_kostlan(8, &mut seed.lane(LANE_Q)).unwrap();
        let f = PlanarField::center_focus(p, q, 1e-2).unwrap();
        let tol = 1e-10;
        for r0 in [0.2, 0.5, 0.8] {
            let a = poincare_return(&f, r0, tol).unwrap();
            let b = cartesian_return(&f, r0, tol).unwrap();
            assert!(a.is_ok() && b.is_ok());
            assert!(
                (a.r1 - b.r1).abs() <= 10.0 * tol * r0.max(1.0),
                "r0 {r0}: {} vs {}",
                a.r1,
                b.r1
            );
        }
    }

    #[test]
    fn self_convergence_under_tolerance_halving() {
        let seed = SeededRng::new(17, 3);
        let p = sample_kostlan(10, &mut seed.lane(LANE_P)).unwrap();
        let q = sample_kostlan(10, &mut seed.lane(LANE_Q)).unwrap();
        let f = PlanarField::center_focus(p, q, 1e-3).unwrap();
        for tol in [1e-8, 1e-10] {
            let a = poincare_return(&f, 0.5, tol).unwrap().r1;
            let b = poincare_return(&f, 0.5, tol / 2.0).unwrap().r1;
            assert!((a - b).abs() < tol, "tol {tol}: {a} vs {b}");
        }
    }

    #[test]
    fn large_perturbation_reports_vanishing_denominator() {
        // x q - y p = -r² (1 + ...) makes the angular speed collapse for ε near 1
        let p = BivariatePolynomial::from_terms(1, &[(0, 1, -1.0)]).unwrap();
        let q = BivariatePolynomial::from_terms(1, &[(1, 0, 1.0)]).unwrap();
        let f = PlanarField::center_focus(p, q, 0.9).unwrap();
        let res = poincare_return(&f, 0.5, 1e-8).unwrap();
        assert_eq!(res.status, ReturnStatus::DenominatorVanished);
    }

    #[test]
    fn general_fields_are_rejected() {
        let (p, q) = hopf_perturbation();
        let f = PlanarField::new(p, q);
        assert!(matches!(
            poincare_return(&f, 0.5, 1e-8),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn fixed_points_match_melnikov_zeros() {
        let mut agree = 0;
        let trials = 6;
        for t in 0..trials {
            let seed = SeededRng::new(23, t);
            let p = sample_uniform_cube(20, &mut seed.lane(LANE_P)).unwrap();
            let q = sample_uniform_cube(20, &mut seed.lane(LANE_Q)).unwrap();
            let series = melnikov_series(&p, &q);
            let want = count_real_zeros(&series, R_MIN * R_MIN, 0.25).unwrap();
            let f = PlanarField::center_focus(p, q, 1e-4).unwrap();
            let got = count_return_fixed_points(&f, 0.5, None, 1e-8).unwrap();
            agree += usize::from(got.count == want);
        }
        assert_eq!(agree, trials as usize);
    }
}
