//! Default k-space grids and fallible grid integration.

use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::kinematics::{Endpoint, WaveVector, Window};
use crate::quadrature::{evaluate_grid, integrate_k_space, GridSum, KGrid, KSpaceResult, QuadSpec};
use crate::units::DerivedConstants;

/// Explicit cutoffs; when either is set the grid is used as given, without growth.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cutoffs {
    pub kperp_max: Option<f64>,
    pub kpar_max: Option<f64>,
}

impl Cutoffs {
    pub fn is_fixed(&self) -> bool {
        self.kperp_max.is_some() || self.kpar_max.is_some()
    }
}

/// Cylindrical grid with `|k_perp|, |k_par| <= initial_z eps / (c rho)` unless
/// overridden, and enough panels to follow the phase across the window.
pub fn default_grid(d: &DerivedConstants, window: &Window, spec: &QuadSpec, cutoffs: &Cutoffs) -> KGrid {
    let scale = d.epsilon / (d.c * d.rho);
    let kperp = cutoffs.kperp_max.unwrap_or(spec.cutoff.initial_z * scale);
    let kpar = cutoffs.kpar_max.unwrap_or(spec.cutoff.initial_z * scale);
    let reach = |e: Endpoint, sign: f64| e.finite().map_or(1.0, |x| (sign * x).exp());
    let spread = 0.5 * (reach(window.eta.hi, 1.0) + reach(window.eta.lo, -1.0));
    let panels = |kmax: f64| {
        let span = kmax / scale * spread;
        ((span / std::f64::consts::PI).ceil() as usize).clamp(4, 200)
    };
    let azimuth = if d.is_parallel() { 1 } else { 16 };
    KGrid::cylindrical(kperp, kpar, panels(kperp), 2 * panels(kpar)).with_azimuth(azimuth)
}

/// Wraps a fallible integrand; the first failure is returned after the sweep.
struct Guard<F> {
    f: F,
    first: Mutex<Option<Error>>,
}

impl<F: Fn(&WaveVector) -> Result<f64> + Sync> Guard<F> {
    fn new(f: F) -> Self {
        Self { f, first: Mutex::new(None) }
    }

    fn call(&self, k: &WaveVector) -> f64 {
        match (self.f)(k) {
            Ok(v) => v,
            Err(e) => {
                let mut slot = self.first.lock().unwrap();
                if slot.is_none() {
                    *slot = Some(e);
                }
                0.0
            }
        }
    }

    fn finish<T>(self, value: T) -> Result<T> {
        match self.first.into_inner().unwrap() {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }
}

/// `int f d^3k` on a fixed grid.
pub fn sum_on_grid<F>(f: F, grid: &KGrid) -> Result<GridSum<f64>>
where
    F: Fn(&WaveVector) -> Result<f64> + Sync,
{
    let g = Guard::new(f);
    let r = evaluate_grid(&|k: &WaveVector| g.call(k), grid)?;
    g.finish(r)
}

/// `int f d^3k`, with cutoff growth unless `fixed`.
pub fn integrate_grid<F>(f: F, grid: &KGrid, spec: &QuadSpec, fixed: bool) -> Result<KSpaceResult>
where
    F: Fn(&WaveVector) -> Result<f64> + Sync,
{
    let g = Guard::new(f);
    let spec = if fixed {
        QuadSpec { cutoff: crate::quadrature::CutoffPolicy { max_growths: 0, ..spec.cutoff }, ..*spec }
    } else {
        *spec
    };
    let r = integrate_k_space(&|k: &WaveVector| g.call(k), grid, &spec)?;
    g.finish(r)
}

/// Per-node tolerances for amplitude evaluation inside k-space sums.
pub fn node_spec(spec: &QuadSpec) -> QuadSpec {
    QuadSpec { abs_tol: 1e-15, rel_tol: spec.rel_tol.clamp(1e-12, 1e-8), ..*spec }
}
