//! Photon counting: vacuum persistence, Poisson photon-number law and the
//! N-photon energies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::Window;
use crate::quadrature::{CutoffPolicy, KGrid, KSpaceResult, QuadSpec};
use crate::radiation::{default_grid, energy_density, integrate_grid, node_spec, Cutoffs, Route};
use crate::units::DerivedConstants;

/// `lambda_bar = sum_pol int |y|^2 d^3k`, the energy density divided by `hbar c k0`.
pub fn mean_photon_number(d: &DerivedConstants, window: &Window, spec: &QuadSpec, cutoffs: &Cutoffs) -> Result<KSpaceResult> {
    let tightened = QuadSpec { cutoff: CutoffPolicy { rel_change: spec.cutoff.rel_change.min(1e-5), ..spec.cutoff }, ..*spec };
    let grid = default_grid(d, window, &tightened, cutoffs);
    mean_photon_number_with(d, window, &grid, &tightened, cutoffs.is_fixed())
}

pub fn mean_photon_number_with(d: &DerivedConstants, window: &Window, grid: &KGrid, spec: &QuadSpec, fixed: bool) -> Result<KSpaceResult> {
    if window.is_empty() {
        return Ok(KSpaceResult { value: 0.0, error: 0.0, grid: *grid, converged: true, trend: vec![] });
    }
    let ns = node_spec(spec);
    let hc = d.hbar * d.c;
    integrate_grid(|k| Ok(energy_density(d, k, window, Route::Rapidity, &ns)?.value / (hc * k.k0())), grid, spec, fixed)
}

fn check_lambda(lambda_bar: f64) -> Result<()> {
    if lambda_bar >= 0.0 && lambda_bar.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("mean photon number must be finite and >= 0, got {lambda_bar}")))
    }
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// `P(N) = e^{-lambda} lambda^N / N!`.
pub fn n_photon_probability(n: u64, lambda_bar: f64) -> Result<f64> {
    check_lambda(lambda_bar)?;
    if lambda_bar == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    Ok((-lambda_bar + n as f64 * lambda_bar.ln() - ln_factorial(n)).exp())
}

/// `W(N) = W1 lambda^{N-1} / (N-1)!`, `N >= 1`.
pub fn n_photon_energy(n: u64, w1: f64, lambda_bar: f64) -> Result<f64> {
    check_lambda(lambda_bar)?;
    if n == 0 {
        return Err(Error::InvalidArgument("N-photon energy needs N >= 1".into()));
    }
    if n == 1 {
        return Ok(w1);
    }
    if lambda_bar == 0.0 {
        return Ok(0.0);
    }
    Ok(w1 * ((n - 1) as f64 * lambda_bar.ln() - ln_factorial(n - 1)).exp())
}

/// How the one-photon energy is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OnePhoton {
    /// `W1 = hbar c P0 sum int k0 |y|^2 = W e^{-lambda_bar}`.
    General { lambda_bar: f64 },
    /// Classical-window form `W1 = W e^{-W / (hbar c)}`.
    Classical { hbar_c: f64 },
}

pub fn one_photon_energy(w: f64, form: OnePhoton) -> Result<f64> {
    if !(w >= 0.0 && w.is_finite()) {
        return Err(Error::InvalidArgument(format!("energy must be finite and >= 0, got {w}")));
    }
    match form {
        OnePhoton::General { lambda_bar } => {
            check_lambda(lambda_bar)?;
            Ok(w * (-lambda_bar).exp())
        }
        OnePhoton::Classical { hbar_c } => {
            if !(hbar_c > 0.0) {
                return Err(Error::InvalidArgument("hbar c must be > 0".into()));
            }
            Ok(w * (-w / hbar_c).exp())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerN {
    pub n: u64,
    pub probability: f64,
    /// `None` for `N = 0`.
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionSummary {
    pub lambda_bar: f64,
    pub lambda_bar_error: f64,
    #[serde(rename = "P0")]
    pub p0: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub w_error: f64,
    #[serde(rename = "W1")]
    pub w1: f64,
    pub eta_in: f64,
    pub eta: f64,
    pub converged: bool,
    pub per_n: Vec<PerN>,
}

/// `N` up to which the Poisson tail is below `1e-12`.
pub fn poisson_cutoff(lambda_bar: f64) -> u64 {
    (lambda_bar + 12.0 * lambda_bar.sqrt() + 20.0).ceil() as u64
}

/// Energy, mean photon number and the photon-number table for a finite window.
pub fn emission_summary(d: &DerivedConstants, window: &Window, spec: &QuadSpec, cutoffs: &Cutoffs, n_max: Option<u64>) -> Result<EmissionSummary> {
    let (Some(eta_in), Some(eta)) = (window.eta.lo.finite(), window.eta.hi.finite()) else {
        return Err(Error::ClassicalDivergence("photon statistics need a finite window".into()));
    };
    let energy = crate::radiation::total_energy(d, window, spec, cutoffs)?;
    let lambda = mean_photon_number(d, window, spec, cutoffs)?;
    summary_from(energy.value, energy.error, lambda.value, lambda.error, eta_in, eta, energy.converged && lambda.converged, n_max)
}

/// Builds the summary from a computed `W` and `lambda_bar`.
#[allow(clippy::too_many_arguments)]
pub fn summary_from(
    w: f64,
    w_error: f64,
    lambda_bar: f64,
    lambda_bar_error: f64,
    eta_in: f64,
    eta: f64,
    converged: bool,
    n_max: Option<u64>,
) -> Result<EmissionSummary> {
    let lambda_bar = lambda_bar.max(0.0);
    let w1 = one_photon_energy(w.max(0.0), OnePhoton::General { lambda_bar })?;
    let n_max = n_max.unwrap_or_else(|| poisson_cutoff(lambda_bar));
    let per_n = (0..=n_max)
        .map(|n| {
            Ok(PerN {
                n,
                probability: n_photon_probability(n, lambda_bar)?,
                energy: if n == 0 { None } else { Some(n_photon_energy(n, w1, lambda_bar)?) },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmissionSummary { lambda_bar, lambda_bar_error, p0: (-lambda_bar).exp(), w, w_error, w1, eta_in, eta, converged, per_n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::compensated_sum;
    use crate::radiation::{eta_window, total_energy_with};
    use crate::units::{derive_constants, SourceConfig, UnitSystem};

    #[test]
    fn poisson_law() {
        assert_eq!(n_photon_probability(0, 0.0).unwrap(), 1.0);
        assert_eq!(n_photon_probability(3, 0.0).unwrap(), 0.0);
        assert!((n_photon_probability(1, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-16);
        for lambda in [0.0, 0.3, 1.0, 7.5, 20.0, 50.0] {
            let total = compensated_sum((0..=poisson_cutoff(lambda)).map(|n| n_photon_probability(n, lambda).unwrap()));
            assert!((total - 1.0).abs() < 1e-12, "{lambda}: {total}");
        }
        assert!(n_photon_probability(1, -0.1).is_err());
    }

    #[test]
    fn n_photon_energies_sum_to_total() {
        for lambda in [0.5, 2.0, 10.0] {
            let w = 3.7;
            let w1 = one_photon_energy(w, OnePhoton::General { lambda_bar: lambda }).unwrap();
            assert_eq!(n_photon_energy(1, w1, lambda).unwrap(), w1);
            let sum = compensated_sum((1..=poisson_cutoff(lambda) + 40).map(|n| n_photon_energy(n, w1, lambda).unwrap()));
            assert!((sum - w).abs() < 1e-12 * w);
            // maximum over N by enumeration
            let best = (1..200).max_by(|&a, &b| n_photon_energy(a, w1, lambda).unwrap().total_cmp(&n_photon_energy(b, w1, lambda).unwrap())).unwrap();
            assert!((best as f64 - (lambda + 1.0)).abs() <= 1.0, "{lambda}: {best}");
        }
        assert!(n_photon_energy(0, 1.0, 1.0).is_err());
    }

    #[test]
    fn classical_one_photon_form() {
        let hc = 1.0;
        assert_eq!(one_photon_energy(0.0, OnePhoton::Classical { hbar_c: hc }).unwrap(), 0.0);
        let f = |w: f64| one_photon_energy(w, OnePhoton::Classical { hbar_c: hc }).unwrap();
        let h = 1e-5;
        assert!(((f(hc + h) - f(hc - h)) / (2.0 * h)).abs() < 1e-6);
        assert!((f(1e-6) - 1e-6).abs() < 1e-11);
    }

    #[test]
    fn photon_number_scales_with_charge_squared_and_matches_energy() {
        let u = UnitSystem::default();
        let window = eta_window(0.0, 0.6).unwrap();
        let grid = KGrid::cylindrical(6.0, 6.0, 4, 8);
        let spec = QuadSpec::with_tol(1e-15, 1e-10);
        let lam = |q: f64| {
            let d = derive_constants(&SourceConfig::at_rest_with_scale(q, 1.0, &u), &u).unwrap();
            mean_photon_number_with(&d, &window, &grid, &spec, true).unwrap().value
        };
        let (a, b) = (lam(0.5), lam(0.25));
        assert!(a > 0.0);
        assert!((a / b - 4.0).abs() < 1e-9);
        let empty = eta_window(0.2, 0.2).unwrap();
        let d = derive_constants(&SourceConfig::at_rest_with_scale(0.5, 1.0, &u), &u).unwrap();
        assert_eq!(mean_photon_number_with(&d, &empty, &grid, &spec, true).unwrap().value, 0.0);
        let w = total_energy_with(&d, &window, &grid, &spec, true).unwrap().value;
        let s = summary_from(w, 0.0, a, 0.0, 0.0, 0.6, true, None).unwrap();
        assert!((s.w1 * s.lambda_bar.exp() - s.w).abs() < 1e-10 * s.w);
        assert!((s.p0 - (-a).exp()).abs() < 1e-16);
        assert!(s.w / s.lambda_bar > 0.0);
    }
}
