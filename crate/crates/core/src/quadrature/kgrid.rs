//! Wave-vector space integration on tensor-product composite GK15 grids.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adaptive::QuadSpec;
use super::rules::{gk15_nodes, RuleNode};
use super::value::{CompensatedSum, QuadValue};
use crate::error::{Error, Result};
use crate::kinematics::WaveVector;

/// Coordinates of the two non-azimuthal axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    /// `|k_perp| in [0, radial_max]`, `k_par in [-axial_max, axial_max]`,
    /// measure `|k_perp| d|k_perp| dk_par dvartheta`.
    Cylindrical,
    /// `k0 in [0, radial_max]`, `theta in [0, pi]`, measure `k0^2 sin(theta)`.
    Spherical,
}

/// A wave-vector grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub geometry: Geometry,
    pub radial_max: f64,
    /// Ignored for spherical grids.
    pub axial_max: f64,
    pub radial_panels: usize,
    pub axial_panels: usize,
    /// Trapezoid nodes in the azimuth; 1 means the integrand is taken as
    /// azimuthally symmetric and weighted by 2 pi.
    pub azimuth_nodes: usize,
}

impl KGrid {
    pub fn cylindrical(kperp_max: f64, kpar_max: f64, radial_panels: usize, axial_panels: usize) -> Self {
        Self {
            geometry: Geometry::Cylindrical,
            radial_max: kperp_max,
            axial_max: kpar_max,
            radial_panels,
            axial_panels,
            azimuth_nodes: 1,
        }
    }

    pub fn spherical(k0_max: f64, radial_panels: usize, theta_panels: usize) -> Self {
        Self {
            geometry: Geometry::Spherical,
            radial_max: k0_max,
            axial_max: PI,
            radial_panels,
            axial_panels: theta_panels,
            azimuth_nodes: 1,
        }
    }

    pub fn with_azimuth(mut self, nodes: usize) -> Self {
        self.azimuth_nodes = nodes;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.radial_max > 0.0
            && self.radial_max.is_finite()
            && self.radial_panels >= 1
            && self.axial_panels >= 1
            && self.azimuth_nodes >= 1
            && (self.geometry == Geometry::Spherical || (self.axial_max > 0.0 && self.axial_max.is_finite()));
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid k-grid {:?}", self)))
        }
    }

    /// The same grid with cutoffs and panel counts scaled by `factor`.
    pub fn grown(&self, factor: f64) -> Self {
        let mut g = *self;
        g.radial_max *= factor;
        g.radial_panels = (self.radial_panels as f64 * factor).ceil() as usize;
        if self.geometry == Geometry::Cylindrical {
            g.axial_max *= factor;
            g.axial_panels = (self.axial_panels as f64 * factor).ceil() as usize;
        }
        g
    }

    pub fn node_count(&self) -> usize {
        let n = gk15_nodes().len();
        self.radial_panels * n * self.axial_panels * n * self.azimuth_nodes
    }

    fn axis_lo(&self) -> f64 {
        match self.geometry {
            Geometry::Cylindrical => -self.axial_max,
            Geometry::Spherical => 0.0,
        }
    }

    fn axis_hi(&self) -> f64 {
        match self.geometry {
            Geometry::Cylindrical => self.axial_max,
            Geometry::Spherical => PI,
        }
    }
}

struct AxisNode {
    x: f64,
    wk: f64,
    wg: f64,
}

fn composite(lo: f64, hi: f64, panels: usize, rule: &[RuleNode]) -> Vec<AxisNode> {
    let h = (hi - lo) / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.len());
    for p in 0..panels {
        let a = lo + p as f64 * h;
        let mid = a + 0.5 * h;
        for n in rule {
            out.push(AxisNode { x: mid + 0.5 * h * n.x, wk: 0.5 * h * n.wk, wg: 0.5 * h * n.wg });
        }
    }
    out
}

/// Grid sum with its Kronrod-vs-Gauss (and azimuth halving) error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSum<V> {
    pub value: V,
    pub error: f64,
    pub nodes: usize,
}

/// Evaluates `int f d^3k` on a fixed grid. The integrand is called once per
/// node, possibly in parallel; the reduction order is fixed.
pub fn evaluate_grid<V, F>(integrand: &F, grid: &KGrid) -> Result<GridSum<V>>
where
    V: QuadValue,
    F: Fn(&WaveVector) -> V + Sync,
{
    grid.validate()?;
    let rule = gk15_nodes();
    let radial = composite(0.0, grid.radial_max, grid.radial_panels, rule);
    let axial = composite(grid.axis_lo(), grid.axis_hi(), grid.axial_panels, rule);
    let na = grid.azimuth_nodes;
    let dphi = 2.0 * PI / na as f64;
    // per radial node: (kronrod-kronrod, gauss-gauss, even-azimuth-only) sums
    let rows: Vec<(V, V, V)> = radial
        .par_iter()
        .map(|r| {
            let mut kk = CompensatedSum::new();
            let mut gg = CompensatedSum::new();
            let mut half = CompensatedSum::new();
            for ax in &axial {
                let measure = match grid.geometry {
                    Geometry::Cylindrical => r.x,
                    Geometry::Spherical => r.x * r.x * ax.x.sin(),
                };
                let make = |phi: f64| match grid.geometry {
                    Geometry::Cylindrical => WaveVector::cylindrical(r.x, ax.x, phi),
                    Geometry::Spherical => WaveVector::spherical(r.x, ax.x, phi),
                };
                let mut az = CompensatedSum::new();
                let mut az_even = CompensatedSum::new();
                for j in 0..na {
                    let v = integrand(&make(j as f64 * dphi));
                    az.add(v);
                    if j % 2 == 0 {
                        az_even.add(v);
                    }
                }
                let ring = az.value().scale(dphi * measure);
                let ring_even = if na >= 4 && na % 2 == 0 {
                    az_even.value().scale(2.0 * dphi * measure)
                } else {
                    ring
                };
                kk.add(ring.scale(r.wk * ax.wk));
                half.add(ring_even.scale(r.wk * ax.wk));
                if r.wg != 0.0 && ax.wg != 0.0 {
                    gg.add(ring.scale(r.wg * ax.wg));
                }
            }
            (kk.value(), gg.value(), half.value())
        })
        .collect();
    let value = rows.iter().map(|r| r.0).collect::<CompensatedSum<V>>().value();
    let gauss = rows.iter().map(|r| r.1).collect::<CompensatedSum<V>>().value();
    let halved = rows.iter().map(|r| r.2).collect::<CompensatedSum<V>>().value();
    let error = value.sub(gauss).norm() + value.sub(halved).norm();
    Ok(GridSum { value, error, nodes: grid.node_count() })
}

/// Result of an integration under cutoff growth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSpaceResult {
    pub value: f64,
    pub error: f64,
    pub grid: KGrid,
    pub converged: bool,
    /// `(radial_max, axial_max, value)` per cutoff step.
    pub trend: Vec<(f64, f64, f64)>,
}

impl KSpaceResult {
    /// Ratios of successive increments; about `growth` for a linear divergence.
    pub fn trend_summary(&self) -> String {
        let v: Vec<String> = self.trend.iter().map(|(r, a, x)| format!("({r:.4e}, {a:.4e}) -> {x:.10e}")).collect();
        v.join("; ")
    }

    pub fn require(self, what: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                what: format!("{what} under cutoff growth [{}]", self.trend_summary()),
                partial: self.value,
                error: self.error,
            })
        }
    }
}

/// `int f d^3k`, growing the cutoffs by `spec.cutoff.growth` until the
/// relative change drops below `spec.cutoff.rel_change`. Non-convergence is
/// reported in the result (with the trend), not as an error.
pub fn integrate_k_space<F>(integrand: &F, grid: &KGrid, spec: &QuadSpec) -> Result<KSpaceResult>
where
    F: Fn(&WaveVector) -> f64 + Sync,
{
    spec.validate()?;
    let mut g = *grid;
    let first = evaluate_grid(integrand, &g)?;
    let mut trend = vec![(g.radial_max, g.axial_max, first.value)];
    let mut last = first;
    for _ in 0..spec.cutoff.max_growths {
        let next_grid = g.grown(spec.cutoff.growth);
        let next = evaluate_grid(integrand, &next_grid)?;
        trend.push((next_grid.radial_max, next_grid.axial_max, next.value));
        let change = (next.value - last.value).abs();
        g = next_grid;
        let done = change <= spec.cutoff.rel_change * next.value.abs() || change <= spec.abs_tol;
        last = next;
        if done {
            return Ok(KSpaceResult { value: last.value, error: last.error + change, grid: g, converged: true, trend });
        }
    }
    let change = if trend.len() >= 2 { (trend[trend.len() - 1].2 - trend[trend.len() - 2].2).abs() } else { 0.0 };
    let converged = spec.cutoff.max_growths == 0;
    Ok(KSpaceResult { value: last.value, error: last.error + change, grid: g, converged, trend })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_in_both_geometries() {
        let f = |k: &WaveVector| (-(k.k0() * k.k0())).exp();
        let exact = PI.powf(1.5);
        let cyl = evaluate_grid(&f, &KGrid::cylindrical(7.0, 7.0, 6, 12)).unwrap();
        assert!((cyl.value - exact).abs() < 1e-10, "{}", cyl.value);
        assert!(cyl.error >= (cyl.value - exact).abs());
        let sph = evaluate_grid(&f, &KGrid::spherical(7.0, 6, 2)).unwrap();
        assert!((sph.value - exact).abs() < 1e-10, "{}", sph.value);
    }

    #[test]
    fn azimuthal_axis_contributes_two_pi() {
        let f = |k: &WaveVector| (-(k.k0() * k.k0())).exp();
        let one = evaluate_grid(&f, &KGrid::cylindrical(7.0, 7.0, 6, 12)).unwrap();
        let many = evaluate_grid(&f, &KGrid::cylindrical(7.0, 7.0, 6, 12).with_azimuth(8)).unwrap();
        assert!((one.value - many.value).abs() < 1e-13 * one.value);
        // a cos(phi) modulation integrates to zero on the periodic trapezoid
        let g = |k: &WaveVector| (-(k.k0() * k.k0())).exp() * (1.0 + k.kx / (k.kperp() + 1e-300));
        let m = evaluate_grid(&g, &KGrid::cylindrical(7.0, 7.0, 6, 12).with_azimuth(8)).unwrap();
        assert!((m.value - one.value).abs() < 1e-12);
    }

    #[test]
    fn zero_integrand_gives_zero() {
        let r = integrate_k_space(&|_: &WaveVector| 0.0, &KGrid::cylindrical(1.0, 1.0, 2, 2), &QuadSpec::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn growth_converges_for_decaying_and_flags_linear() {
        let spec = QuadSpec::default();
        let f = |k: &WaveVector| (-(k.k0() * k.k0())).exp();
        let r = integrate_k_space(&f, &KGrid::cylindrical(4.0, 4.0, 4, 8), &spec).unwrap();
        assert!(r.converged);
        assert!((r.value - PI.powf(1.5)).abs() < 1e-6);
        let lin = |k: &WaveVector| 1.0 / (1.0 + k.k0()).powi(2) / (1.0 + k.kperp().powi(2));
        let r = integrate_k_space(&lin, &KGrid::cylindrical(4.0, 4.0, 4, 8), &spec).unwrap();
        assert!(!r.converged);
        assert_eq!(r.trend.len(), spec.cutoff.max_growths + 1);
        assert!(r.clone().require("lin").is_err());
    }

    #[test]
    fn deterministic_across_runs() {
        let f = |k: &WaveVector| (k.kx * 3.0).sin().powi(2) * (-(k.k0())).exp();
        let g = KGrid::cylindrical(9.0, 9.0, 5, 9).with_azimuth(6);
        let a = evaluate_grid(&f, &g).unwrap();
        let b = evaluate_grid(&f, &g).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }
}
