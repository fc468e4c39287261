//! The acceptance suite: each criterion runs a computation and compares it
//! against an independent closed form or a second route.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{eta_of_t, t_of_eta, Interval, WaveVector, Window};
use crate::photon_stats::{n_photon_probability, one_photon_energy, poisson_cutoff, OnePhoton};
use crate::quadrature::{compensated_sum, KGrid, QuadSpec};
use crate::radiation::{
    asymptotic_distribution, distribution_grid, eta_window, golden_max, i0_2, rate_asymptotic, rate_classical_nr,
    rate_general, rate_symmetric, ray_sign_changes, stationary_phase_i2, theta_max, total_energy_on_grid,
    energy_density, Cutoffs, FigureParams, GridKind, Route,
};
use crate::specfun::{
    epsilon_asymptotic, epsilon_quadrature, incomplete_macdonald, k0_series, macdonald_real_order, MacdonaldOptions,
    Method,
};
use crate::units::{derive_constants, DerivedConstants, SourceConfig, UnitSystem};
use num_complex::Complex64;

/// One comparison inside a criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Comparison {
    /// Passes when `|observed - expected| <= tolerance`.
    fn near(name: impl Into<String>, observed: f64, expected: f64, tolerance: f64) -> Self {
        let passed = (observed - expected).abs() <= tolerance;
        Self { name: name.into(), observed, expected, tolerance, passed }
    }

    /// Passes when `observed <= bound`.
    fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self { name: name.into(), observed, expected: 0.0, tolerance: bound, passed: observed <= bound }
    }

    /// Passes when `observed >= bound`.
    fn at_least(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self { name: name.into(), observed, expected: bound, tolerance: 0.0, passed: observed >= bound }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: String,
    pub module: String,
    pub title: String,
    pub passed: bool,
    pub comparisons: Vec<Comparison>,
    /// Set when the computation itself failed.
    pub error: Option<String>,
    pub seconds: f64,
}

impl Outcome {
    /// `id: PASS|FAIL title (worst comparison)`.
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        let worst = self.comparisons.iter().find(|c| !c.passed).or(self.comparisons.first());
        let detail = match (&self.error, worst) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(c)) => format!(
                "{}: observed {:.6e}, expected {:.6e}, tolerance {:.1e}",
                c.name, c.observed, c.expected, c.tolerance
            ),
            (None, None) => String::new(),
        };
        format!("{tag} {} [{}] {} ({detail}; {:.2} s)", self.id, self.module, self.title, self.seconds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tighten: f64,
    pub passed: bool,
    pub outcomes: Vec<Outcome>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Outcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }
}

type Runner = fn(f64) -> Result<Vec<Comparison>>;

/// A criterion of the suite.
pub struct Criterion {
    pub id: &'static str,
    pub module: &'static str,
    pub title: &'static str,
    run: Runner,
}

/// All criteria, in suite order.
pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: "larmor", module: "radiation", title: "Larmor limit of the rate", run: larmor },
        Criterion { id: "classical-ratio", module: "radiation", title: "classical rate over Larmor rate", run: classical_ratio },
        Criterion { id: "symmetric-rate", module: "radiation", title: "symmetric-window rate approaches Larmor", run: symmetric_rate },
        Criterion { id: "k0-series", module: "specfun", title: "series against direct quadrature", run: k0_series_oracle },
        Criterion { id: "asymptotic-orders", module: "specfun", title: "error slopes of the large-argument forms", run: asymptotic_orders },
        Criterion { id: "theta-max", module: "radiation", title: "angle of maximal emission", run: theta_max_property },
        Criterion { id: "rate-energy", module: "radiation", title: "rate is the time derivative of the energy", run: rate_energy },
        Criterion { id: "photon-identities", module: "photon_stats", title: "photon-number identities", run: photon_identities },
        Criterion { id: "infrared", module: "radiation", title: "finite windows are regular on the axis", run: infrared },
        Criterion { id: "figures", module: "radiation", title: "figure grid properties", run: figures },
    ]
}

/// Runs the criteria whose id or module equals `only` (all when `None`), with
/// every tolerance divided by `tighten`.
pub fn run(only: Option<&str>, tighten: f64) -> Result<Report> {
    if !(tighten > 0.0 && tighten.is_finite()) {
        return Err(Error::InvalidArgument(format!("tighten factor must be finite and > 0, got {tighten}")));
    }
    let selected: Vec<Criterion> =
        criteria().into_iter().filter(|c| only.map_or(true, |o| c.id == o || c.module == o)).collect();
    if selected.is_empty() {
        let known: Vec<&str> = criteria().iter().map(|c| c.id).collect();
        return Err(Error::InvalidArgument(format!(
            "no criterion matches {:?}; use a module (specfun, radiation, photon_stats) or one of {known:?}",
            only.unwrap_or("")
        )));
    }
    let outcomes: Vec<Outcome> = selected.iter().map(|c| run_one(c, tighten)).collect();
    Ok(Report { tighten, passed: outcomes.iter().all(|o| o.passed), outcomes })
}

fn run_one(c: &Criterion, tighten: f64) -> Outcome {
    let start = Instant::now();
    let result = (c.run)(tighten);
    let seconds = start.elapsed().as_secs_f64();
    let (comparisons, error) = match result {
        Ok(v) => (v, None),
        Err(e) => (vec![], Some(e.to_string())),
    };
    let passed = error.is_none() && !comparisons.is_empty() && comparisons.iter().all(|c| c.passed);
    Outcome { id: c.id.into(), module: c.module.into(), title: c.title.into(), passed, comparisons, error, seconds }
}

fn source(q: f64, c_over_eps: f64) -> Result<DerivedConstants> {
    let u = UnitSystem::default();
    derive_constants(&SourceConfig::at_rest_with_scale(q, c_over_eps, &u), &u)
}

fn tight() -> QuadSpec {
    QuadSpec::with_tol(1e-15, 1e-13)
}

fn larmor(t: f64) -> Result<Vec<Comparison>> {
    let d = source(1.3, 0.7)?;
    let r = rate_asymptotic(&d, &tight())?;
    let check = r.check.ok_or_else(|| Error::InvalidArgument("missing verification integral".into()))?;
    let closed = 2.0 * d.q * d.q * d.accel * d.accel / d.c.powi(3);
    Ok(vec![
        Comparison::near("w / (2 q^2 a^2 / c^3)", r.w / closed, 1.0, 1e-15 / t),
        Comparison::near("int K1(z) z^2 dz", check.value, 2.0, 1e-8 / t),
    ])
}

fn classical_ratio(t: f64) -> Result<Vec<Comparison>> {
    let d = source(0.8, 1.7)?;
    let nr = rate_classical_nr(&d, &tight())?;
    let larmor = rate_asymptotic(&d, &tight())?;
    let check = nr.check.ok_or_else(|| Error::InvalidArgument("missing verification integral".into()))?;
    Ok(vec![
        Comparison::near("int K1(z)^2 z^2 dz", check.value, 3.0 * PI * PI / 32.0, 1e-8 / t),
        Comparison::near("w_cl / w_Larmor", nr.w / larmor.w, 3.0 * PI / 32.0, 1e-10 / t),
    ])
}

fn symmetric_rate(t: f64) -> Result<Vec<Comparison>> {
    let d = source(1.0, 1.0)?;
    let spec = QuadSpec::with_tol(1e-14, 1e-8);
    let larmor = 2.0 * d.q * d.q * d.accel * d.accel / d.c.powi(3);
    let mut out = vec![];
    let mut deviations = vec![];
    for et in [1.0, 10.0, 100.0, 1000.0] {
        let r = rate_symmetric(&d, Some(et / d.epsilon), &spec)?;
        let ratio = r.w / larmor;
        deviations.push((ratio - 1.0).abs());
        out.push(Comparison::near(format!("w(eps T = {et}) / w_Larmor"), ratio, 1.0, 0.02 / t));
    }
    let rises = deviations.windows(2).filter(|p| p[1] > p[0]).count();
    out.push(Comparison::at_most("increases of |w/w_Larmor - 1| along T", rises as f64, 0.0));
    Ok(out)
}

fn k0_series_oracle(t: f64) -> Result<Vec<Comparison>> {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let opts = MacdonaldOptions { method: Method::Direct, ..Default::default() };
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let z = rng.gen_range(1e-3..=1.0);
        let lo = rng.gen_range(-2.0..1.9);
        let hi = rng.gen_range(lo + 0.05..=2.0);
        let s = k0_series(z, lo, hi)?.value;
        let q = incomplete_macdonald(0.0, z, &Interval::finite(lo, hi)?, &opts, &tight())?.value;
        worst = worst.max((s - q).norm());
    }
    Ok(vec![Comparison::at_most("max |series - quadrature| over 100 pairs", worst, 1e-9 / t)])
}

fn slope(errs: &[f64], ratio: f64) -> f64 {
    (errs[errs.len() - 1] / errs[0]).ln() / (ratio.powi(errs.len() as i32 - 1)).ln()
}

fn asymptotic_orders(t: f64) -> Result<Vec<Comparison>> {
    let nu = Complex64::new(0.0, 0.0);
    let a = 0.5;
    let quad = QuadSpec::with_tol(1e-300, 1e-15);
    let mut e1z = vec![];
    for z in [10.0, 20.0, 40.0] {
        let zc = Complex64::new(z, 0.0);
        let q = epsilon_quadrature(nu, a, zc, &quad)?.value;
        let scale = (zc * a.sinh() - nu * a).exp().norm();
        e1z.push((epsilon_asymptotic(nu, a, zc) - q).norm() / scale);
    }
    let spec = QuadSpec::with_tol(1e-16, 1e-13);
    let window = Interval::finite(0.0, 2.0)?;
    let th = PI / 2.0;
    let mut sp = vec![];
    for l in [10.0, 20.0, 40.0, 80.0] {
        sp.push((i0_2(l, th, &window, &spec)?.value - stationary_phase_i2(th, 0.0, 2.0, l)?).norm());
    }
    Ok(vec![
        Comparison::near("epsilon expansion error slope in z", slope(&e1z, 2.0), -4.0, 0.5 / t),
        Comparison::near("boundary-term error slope in Lambda", slope(&sp, 2.0), -2.0, 0.5 / t),
    ])
}

fn theta_max_property(t: f64) -> Result<Vec<Comparison>> {
    let d = source(2.0, 0.1)?;
    let mut out = vec![];
    for eta in [1.0, 2.0, 3.0, 4.0] {
        let failed = std::cell::Cell::new(None);
        let f = |th: f64| {
            asymptotic_distribution(&d, 1.0, th, eta).unwrap_or_else(|e| {
                failed.set(Some(e.to_string()));
                f64::NAN
            })
        };
        let found = golden_max(f, 1e-9, PI - 1e-9, 1e-11);
        if let Some(e) = failed.take() {
            return Err(Error::InvalidArgument(e));
        }
        out.push(Comparison::near(format!("argmax at eta = {eta}"), found, theta_max(eta), 1e-6 / t));
    }
    Ok(out)
}

fn rate_energy(t: f64) -> Result<Vec<Comparison>> {
    let u = UnitSystem::default();
    let parallel = source(1.0, 1.0)?;
    let oblique = derive_constants(&SourceConfig::at_rest_with_scale(1.0, 1.0, &u).with_u_perp(0.4, 0.2), &u)?;
    let spec = QuadSpec::with_tol(1e-14, 1e-10);
    let mut rng = ChaCha8Rng::seed_from_u64(1410);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let (d, azimuth) = if i % 2 == 0 { (&parallel, 1) } else { (&oblique, 8) };
        let scale = d.epsilon / d.c;
        let grid = KGrid::cylindrical(6.0 * scale, 6.0 * scale, 6, 12).with_azimuth(azimuth);
        let eta_in = rng.gen_range(-1.5..0.5);
        let eta = eta_in + rng.gen_range(0.3..1.5);
        let time = t_of_eta(d, eta);
        let h = 1e-3 / d.epsilon;
        let energy = |tt: f64| -> Result<f64> {
            Ok(total_energy_on_grid(d, &Window::from_eta(eta_in, eta_of_t(d, tt))?, &grid, Route::Rapidity, &spec)?.value)
        };
        let fd = (8.0 * (energy(time + h)? - energy(time - h)?) - (energy(time + 2.0 * h)? - energy(time - 2.0 * h)?))
            / (12.0 * h);
        let rate = rate_general(d, &eta_window(eta_in, eta)?, &spec, &Cutoffs::default(), Some(&grid))?.w;
        worst = worst.max((fd - rate).abs() / rate.abs());
    }
    Ok(vec![Comparison::at_most("max |dW/dt - w| / |w| over 20 windows", worst, 1e-3 / t)])
}

fn photon_identities(t: f64) -> Result<Vec<Comparison>> {
    let mut sum_err = 0.0f64;
    for lambda in [0.01, 0.3, 1.0, 7.5, 40.0] {
        let total = compensated_sum((0..=poisson_cutoff(lambda)).map(|n| n_photon_probability(n, lambda).unwrap_or(f64::NAN)));
        sum_err = sum_err.max((total - 1.0).abs());
    }
    let mut alg_err = 0.0f64;
    for (w, lambda) in [(0.2, 0.05), (3.0, 1.7), (40.0, 12.0)] {
        let w1 = one_photon_energy(w, OnePhoton::General { lambda_bar: lambda })?;
        alg_err = alg_err.max((w1 * lambda.exp() - w).abs() / w);
    }
    let hbar_c = UnitSystem::default().hbar * UnitSystem::default().c;
    let f = |w: f64| one_photon_energy(w, OnePhoton::Classical { hbar_c });
    let h = 1e-4 * hbar_c;
    let slope = (f(hbar_c + h)? - f(hbar_c - h)?) / (2.0 * h);
    let curvature = f(hbar_c + h)? - 2.0 * f(hbar_c)? + f(hbar_c - h)?;
    Ok(vec![
        Comparison::at_most("max |sum P(N) - 1|", sum_err, 1e-12 / t),
        Comparison::at_most("max |W1 e^lambda - W| / W", alg_err, 1e-10 / t),
        Comparison::at_most("|dW1/dW| at W = hbar c", slope.abs(), 1e-6 / t),
        Comparison::at_least("-d2W1/dW2 at W = hbar c", -curvature, 0.0),
    ])
}

fn infrared(t: f64) -> Result<Vec<Comparison>> {
    let u = UnitSystem::default();
    let d = derive_constants(&SourceConfig::at_rest_with_scale(1.0, 1.0, &u).with_u_perp(0.6, 0.0), &u)?;
    let window = eta_window(-0.5, 0.8)?;
    let spec = tight();
    let kpar = 0.7 * d.epsilon / d.c;
    let on_axis = energy_density(&d, &WaveVector::new(0.0, 0.0, kpar), &window, Route::Rapidity, &spec)?.value;
    let mut worst = 0.0f64;
    let mut finite = true;
    for j in 7..=12 {
        let kperp = 10f64.powi(-j) * d.epsilon / d.c;
        let v = energy_density(&d, &WaveVector::cylindrical(kperp, kpar, 0.3), &window, Route::Rapidity, &spec)?.value;
        finite &= v.is_finite();
        worst = worst.max((v - on_axis).abs() / on_axis.abs());
    }
    let series_gap: f64 = [1e-6, 1e-9, 1e-12]
        .iter()
        .map(|&z| k0_series(z, -0.5, 0.8).map(|s| (s.value.re - 0.65).abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let k0_small = macdonald_real_order(0.0, 1e-12, &spec)?.value;
    let k0_mid = macdonald_real_order(0.0, 1e-3, &spec)?.value;
    Ok(vec![
        Comparison::at_least("on-axis density finite", if finite && on_axis.is_finite() { 1.0 } else { 0.0 }, 1.0),
        Comparison::at_most("max relative jump to the axis value", worst, 1e-6 / t),
        Comparison::at_most("|Re K0 window - (u - u_in)/2| as z -> 0", series_gap, 1e-6 / t),
        Comparison::at_least("classical K0(1e-12) / K0(1e-3)", k0_small / k0_mid, 3.0),
    ])
}

fn figures(_t: f64) -> Result<Vec<Comparison>> {
    let spec = QuadSpec::with_tol(1e-14, 1e-8);
    let mut out = vec![];
    for (n, kind) in [(1u8, GridKind::Energy), (3u8, GridKind::Rate)] {
        let p = FigureParams::for_figure(n)?;
        for &eta in &p.etas {
            let g = distribution_grid(n, kind, &p, eta, &spec)?;
            let (forward, backward) = g.hemisphere_mass();
            out.push(Comparison::at_least(format!("figure {n} eta {eta}: forward minus backward mass"), forward - backward, 0.0));
        }
    }
    let p = FigureParams::for_figure(2)?;
    let eta = p.etas[0];
    for th in [0.5, 1.0, 1.5, 2.0] {
        let changes = ray_sign_changes(&p, eta, th, p.nodes, &spec)?;
        out.push(Comparison::at_least(format!("figure 2 sign changes along theta = {th}"), changes as f64, 2.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_and_tighten_validation() {
        assert!(run(Some("nonexistent"), 1.0).is_err());
        assert!(run(None, 0.0).is_err());
        let r = run(Some("photon_stats"), 1.0).unwrap();
        assert_eq!(r.outcomes.len(), 1);
        assert!(r.passed, "{}", r.outcomes[0].line());
    }

    #[test]
    fn tightening_produces_failures_not_errors() {
        let r = run(Some("theta-max"), 1e6).unwrap();
        assert!(!r.passed);
        assert!(r.outcomes[0].error.is_none());
        assert!(r.outcomes[0].line().starts_with("FAIL theta-max"));
    }
}
