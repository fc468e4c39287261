//! Incomplete Macdonald functions, the incomplete cylindrical function of
//! Bessel form, and classical Macdonald functions.

mod epsilon;
mod expphase;
mod macdonald;
mod sine_integral;

pub use epsilon::{
    epsilon_asymptotic, epsilon_incomplete, epsilon_quadrature, epsilon_series, k0_series, macdonald_via_epsilon,
    EpsilonMethod, EpsilonValue,
};
pub use expphase::{ExpPhase, Method, DIRECT_SPAN_LIMIT, SERIES_GROWTH_LIMIT};
pub use sine_integral::sine_integral;
pub use macdonald::{
    incomplete_macdonald, incomplete_macdonald_dxi, incomplete_macdonald_dz, kdot_over_z, macdonald_imag_order,
    macdonald_imag_order_dz, macdonald_real_order, s_combination, special_value, symmetric_moments, Estimate,
    MacdonaldOptions, Regularization, SpecialValue, Z_SWITCH,
};
