//! Random planar polynomial vector fields and their limit cycles.
//!
//! The crate is organised bottom-up:
//!
//! - [`polynomials`]: dense bivariate polynomials, homogenization, Fischer norms
//!   and the Kostlan covariance kernel; [`PlanarField`] pairs two of them.
//! - [`ensembles`]: seeded samplers for the Kostlan, uniform-cube, power-law and
//!   truncated Bargmann-Fock models.
//! - [`dynamics`]: return maps of the perturbed linear center, tangency counts,
//!   equilibria, the barrier field and transverse-annulus certification.
//! - [`melnikov`]: the first Melnikov function of the perturbed center, its
//!   exact series coefficients and real-zero counting.
//! - [`kac_rice`]: the two-point kernel of the Melnikov function and the
//!   expected number of its zeros.

pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod kac_rice;
pub mod melnikov;
pub mod ode;
pub mod polynomials;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use polynomials::{
    BivariatePolynomial, FieldForm, HomogeneousPolynomial, PlanarField, ProjectiveWeight,
    VectorField,
};
