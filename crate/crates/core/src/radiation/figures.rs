//! Spectral-angular grids in the `(k_x, k_par)` plane at `k_y = 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::asymptotic::asymptotic_distribution;
use super::energy::{eta_window, spectral_angular_energy};
use super::rate::rate_spectral_angular;
use crate::error::{Error, Result};
use crate::quadrature::QuadSpec;
use crate::units::{derive_constants, DerivedConstants, SourceConfig, UnitSystem};

/// Which distribution a grid holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// `d^2W/(k0^2 dk0 dOmega)`.
    Energy,
    /// Large-`Lambda` form of the energy distribution, `eta_in = 0`.
    EnergyAsymptotic,
    /// `d^3w/(k0^2 dk0 dOmega)`.
    Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureParams {
    pub q: f64,
    pub c_over_eps: f64,
    pub eta_in: f64,
    pub etas: Vec<f64>,
    /// Nodes per axis.
    pub nodes: usize,
    /// `k_x` extent in units of `eps / c`.
    pub kx_max: f64,
    /// `k_par` extent (symmetric) in units of `eps / c`.
    pub kpar_max: f64,
}

impl FigureParams {
    /// Default parameters of figure `n`.
    pub fn for_figure(n: u8) -> Result<Self> {
        let etas = match n {
            1 => vec![3.0, 3.6, 4.0, 4.5],
            2 => vec![3.8],
            3 => vec![3.0, 3.5, 4.0, 4.5],
            _ => return Err(Error::InvalidArgument(format!("no figure {n}; choose 1, 2 or 3"))),
        };
        Ok(Self { q: 2.0, c_over_eps: 0.1, eta_in: 0.0, etas, nodes: 201, kx_max: 2.0, kpar_max: 2.0 })
    }

    pub fn source(&self) -> Result<DerivedConstants> {
        let u = UnitSystem::default();
        derive_constants(&SourceConfig::at_rest_with_scale(self.q, self.c_over_eps, &u), &u)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.nodes >= 2
            && self.kx_max > 0.0
            && self.kpar_max > 0.0
            && !self.etas.is_empty()
            && self.etas.iter().all(|e| e.is_finite() && *e >= self.eta_in);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid figure parameters {self:?}")))
        }
    }
}

/// Values on a `k_par`-major grid: `values[j * kx.len() + i]` is at `(kx[i], kpar[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureGrid {
    pub figure: u8,
    pub kind: GridKind,
    pub eta_in: f64,
    pub eta: f64,
    pub kx: Vec<f64>,
    pub kpar: Vec<f64>,
    pub values: Vec<f64>,
}

impl FigureGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.kx.len() + i]
    }

    /// Sums of the values with `k_par > 0` and `k_par < 0`, times the cell area.
    pub fn hemisphere_mass(&self) -> (f64, f64) {
        let dx = self.kx[1] - self.kx[0];
        let dz = self.kpar[1] - self.kpar[0];
        let (mut fwd, mut back) = (0.0, 0.0);
        for (j, &kz) in self.kpar.iter().enumerate() {
            let row: f64 = (0..self.kx.len()).map(|i| self.at(i, j)).sum();
            if kz > 0.0 {
                fwd += row * dx * dz;
            } else if kz < 0.0 {
                back += row * dx * dz;
            }
        }
        (fwd, back)
    }
}

/// `k_x` nodes are cell centres on `(0, kx_max)`, so no node lies on the field
/// axis; `k_par` nodes span `[-kpar_max, kpar_max]` including both ends.
pub fn axes(params: &FigureParams, d: &DerivedConstants) -> (Vec<f64>, Vec<f64>) {
    let unit = d.epsilon / d.c;
    let n = params.nodes;
    let hx = params.kx_max * unit / n as f64;
    let kx = (0..n).map(|i| (i as f64 + 0.5) * hx).collect();
    let hz = 2.0 * params.kpar_max * unit / (n - 1) as f64;
    let kpar = (0..n).map(|j| -params.kpar_max * unit + j as f64 * hz).collect();
    (kx, kpar)
}

/// One grid of `kind` at rapidity `eta`.
pub fn distribution_grid(figure: u8, kind: GridKind, params: &FigureParams, eta: f64, spec: &QuadSpec) -> Result<FigureGrid> {
    params.validate()?;
    let d = params.source()?;
    let (kx, kpar) = axes(params, &d);
    let window = eta_window(params.eta_in, eta)?;
    if kind == GridKind::EnergyAsymptotic && params.eta_in != 0.0 {
        return Err(Error::InvalidArgument("the asymptotic grid is defined for eta_in = 0".into()));
    }
    let rows: Result<Vec<Vec<f64>>> = kpar
        .par_iter()
        .map(|&kz| {
            kx.iter()
                .map(|&x| {
                    let k0 = x.hypot(kz);
                    let theta = x.atan2(kz);
                    match kind {
                        GridKind::Energy => Ok(spectral_angular_energy(&d, k0, theta, &window, spec)?.value),
                        GridKind::EnergyAsymptotic => asymptotic_distribution(&d, k0, theta, eta),
                        GridKind::Rate => rate_spectral_angular(&d, k0, theta, &window, spec),
                    }
                })
                .collect()
        })
        .collect();
    let values = rows?.into_iter().flatten().collect();
    Ok(FigureGrid { figure, kind, eta_in: params.eta_in, eta, kx, kpar, values })
}

/// All panels of figure `n`: energy grids (1), exact and asymptotic energy (2), rate grids (3).
pub fn figure_grids(n: u8, params: &FigureParams, spec: &QuadSpec) -> Result<Vec<FigureGrid>> {
    let mut out = vec![];
    for &eta in &params.etas {
        match n {
            1 => out.push(distribution_grid(1, GridKind::Energy, params, eta, spec)?),
            2 => {
                out.push(distribution_grid(2, GridKind::Energy, params, eta, spec)?);
                out.push(distribution_grid(2, GridKind::EnergyAsymptotic, params, eta, spec)?);
            }
            3 => out.push(distribution_grid(3, GridKind::Rate, params, eta, spec)?),
            _ => return Err(Error::InvalidArgument(format!("no figure {n}; choose 1, 2 or 3"))),
        }
    }
    Ok(out)
}

/// Sign changes of exact minus asymptotic energy distribution along the ray
/// at polar angle `theta`, sampled at `samples` points on `(0, k_max]`.
pub fn ray_sign_changes(params: &FigureParams, eta: f64, theta: f64, samples: usize, spec: &QuadSpec) -> Result<usize> {
    let d = params.source()?;
    let window = eta_window(0.0, eta)?;
    let k_max = params.kx_max.hypot(params.kpar_max) * d.epsilon / d.c;
    let mut changes = 0;
    let mut last = 0.0f64;
    for s in 1..=samples {
        let k0 = k_max * s as f64 / samples as f64;
        let diff = spectral_angular_energy(&d, k0, theta, &window, spec)?.value - asymptotic_distribution(&d, k0, theta, eta)?;
        if diff != 0.0 {
            if last != 0.0 && diff.signum() != last.signum() {
                changes += 1;
            }
            last = diff;
        }
    }
    Ok(changes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: u8) -> FigureParams {
        FigureParams { nodes: 41, ..FigureParams::for_figure(n).unwrap() }
    }

    #[test]
    fn default_parameters() {
        let p = FigureParams::for_figure(3).unwrap();
        let d = p.source().unwrap();
        let constant = (d.q * d.c / std::f64::consts::PI).powi(2) / (2.0 * d.epsilon);
        assert!((constant - 1.0 / (5.0 * std::f64::consts::PI.powi(2))).abs() < 1e-15);
        assert!(FigureParams::for_figure(4).is_err());
    }

    #[test]
    fn lobes_lean_forward() {
        let spec = QuadSpec::with_tol(1e-14, 1e-8);
        for n in [1u8, 3] {
            for g in figure_grids(n, &small(n), &spec).unwrap() {
                let (f, b) = g.hemisphere_mass();
                assert!(f > b, "figure {n} eta {}: {f} {b}", g.eta);
                if n == 1 {
                    assert!(g.values.iter().all(|v| *v >= 0.0));
                }
            }
        }
    }

    #[test]
    fn exact_oscillates_about_asymptotic() {
        let spec = QuadSpec::with_tol(1e-14, 1e-8);
        let p = small(2);
        for th in [0.5, 1.0, 1.5, 2.0] {
            assert!(ray_sign_changes(&p, 3.8, th, 200, &spec).unwrap() >= 2);
        }
    }
}
