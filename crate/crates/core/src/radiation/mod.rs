//! Radiated energies, rates and spectral-angular distributions.

mod amplitude;
mod energy;
mod grid;

pub use amplitude::{amplitude_integrals, from_special, mode_phase, rapidity_moments, reduced_values, AmplitudeVector, Route};
pub use energy::{
    density_prefactor, energy_density, eta_window, i0_2, lambda_of, parallel_phase, spectral_angular_energy, total_energy,
    total_energy_on_grid, total_energy_with, DistributionValue,
};
pub use grid::{default_grid, integrate_grid, node_spec, sum_on_grid, Cutoffs};
mod rate;
pub use rate::{
    dw_cl, rate_asymptotic, rate_classical_nr, rate_density, rate_density_parallel, rate_general, rate_halfinfinite, rate_on_grid,
    rate_parallel, rate_spectral_angular, rate_spectral_angular_asymptotic, Check, RateResult, RateVariant,
};
mod asymptotic;
pub use asymptotic::{asymptotic_distribution, asymptotic_distribution_window, golden_max, stationary_phase_i2, theta_max};
mod symmetric;
pub use symmetric::{
    angular_kernel, cutoff_kernel, rate_density_symmetric, rate_density_symmetric_parallel, rate_symmetric, rate_symmetric_cutoff,
    symmetric_window,
};
mod figures;
pub use figures::{axes, distribution_grid, figure_grids, ray_sign_changes, FigureGrid, FigureParams, GridKind};
