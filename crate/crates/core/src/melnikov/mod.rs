//! First Melnikov function of the perturbed linear center
//! `(y + εp, -x + εq)` and its zeros.

pub mod power_law;
pub mod series;
pub mod x_rho;
pub mod zeros;

pub use power_law::{
    power_law_scales, power_law_slope, power_law_zero_count, sample_power_law_series,
    PowerLawSampler,
};
pub use series::{
    melnikov_quadrature, melnikov_series, sigma_m_squared, zeta_weights, MelnikovSeries,
};
pub use x_rho::{sample_x_rho, uniform_cube_series, x_rho_conjecture, R_MIN};
pub use zeros::{
    count_real_zeros, count_zeros, grid_count, grid_roots, sturm_count, CountMethod, ZeroCount,
};
