//! Moments `J_s = int e^{s w} exp(i psi(w)) dw` of the phase
//! `psi(w) = A e^w - B e^{-w} - nu w` over a window.
//!
//! Every incomplete Macdonald quantity is a combination of these moments:
//! in `u` variables `A = B = z/2`, in rapidity variables
//! `A = z e^{-xi}/2`, `B = z e^{xi}/2`.
//!
//! Three evaluators are provided. The contour evaluator lifts the real
//! segment to the line `Im w = tau0`, where the integrand decays like
//! `exp(-(A e^x + B e^-x) sin tau0)`; the cost is then independent of how
//! fast the phase oscillates, and infinite ends get the Abel-regularised
//! value. The series evaluator expands both exponentials. The direct
//! evaluator integrates on the real axis with phase-bounded panels.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{Endpoint, Interval};
use crate::quadrature::{integrate_breaks, phase_breakpoints, QuadResult, QuadSpec, QuadValue};

/// Evaluation route for [`ExpPhase::moments`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Method {
    #[default]
    Auto,
    Contour,
    Series,
    Direct,
}

/// Phase coefficients `(A, B, nu)`, `A, B >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpPhase {
    pub a: f64,
    pub b: f64,
    pub nu: f64,
}

/// Largest `A e^hi + B e^-lo` the series evaluator accepts; its rounding
/// error grows like `e^M` times machine epsilon.
pub const SERIES_GROWTH_LIMIT: f64 = 12.0;

/// Phase spans up to which `Method::Auto` integrates along the real axis.
pub const DIRECT_SPAN_LIMIT: f64 = 40.0;

/// Log-modulus drop at which a contour tail is discarded.
const TAIL_DROP: f64 = 45.0;

impl ExpPhase {
    pub fn new(a: f64, b: f64, nu: f64) -> Result<Self> {
        if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite() && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("phase coefficients A={a}, B={b}, nu={nu}")));
        }
        Ok(Self { a, b, nu })
    }

    /// `u`-variable form with `psi(u) = z sinh u - nu u`.
    pub fn symmetric(z: f64, nu: f64) -> Result<Self> {
        if z < 0.0 {
            return Err(Error::InvalidArgument(format!("z must be >= 0, got {z}")));
        }
        Self::new(0.5 * z, 0.5 * z, nu)
    }

    pub fn psi(&self, w: f64) -> f64 {
        self.a * w.exp() - self.b * (-w).exp() - self.nu * w
    }

    /// `e^{i psi(w)}`.
    pub fn phase_factor(&self, w: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.psi(w))
    }

    /// Effective `z = 2 sqrt(A B)`.
    pub fn z_eff(&self) -> f64 {
        2.0 * (self.a * self.b).sqrt()
    }

    /// Integrand `e^{s w} e^{i psi(w)}` at complex `w`.
    fn integrand_c(&self, w: Complex64) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        (i * (self.a * w.exp() - self.b * (-w).exp() - self.nu * w)).exp()
    }

    /// `int_lo^hi e^{s_k w} e^{i psi(w)} dw` for each shift `s_k`.
    pub fn moments<const N: usize>(
        &self,
        shifts: [f64; N],
        window: &Interval,
        method: Method,
        spec: &QuadSpec,
    ) -> Result<QuadResult<[Complex64; N]>> {
        if window.is_empty() {
            return Ok(QuadResult::exact([Complex64::new(0.0, 0.0); N]));
        }
        let method = match (method, window.lo.finite(), window.hi.finite()) {
            (Method::Auto, Some(lo), Some(hi)) if self.phase_span(lo, hi) <= DIRECT_SPAN_LIMIT => Method::Direct,
            (m, _, _) => m,
        };
        match method {
            Method::Auto | Method::Contour => self.contour(shifts, window, spec),
            Method::Series => {
                let (lo, hi) = finite_ends(window, "series evaluation")?;
                self.series(shifts, lo, hi)
            }
            Method::Direct => {
                let (lo, hi) = finite_ends(window, "direct quadrature")?;
                Ok(self.direct(shifts, lo, hi, spec))
            }
        }
    }

    /// Bound on the total variation of `psi` over `[lo, hi]`.
    pub fn phase_span(&self, lo: f64, hi: f64) -> f64 {
        let (lo, hi) = (lo.min(hi), lo.max(hi));
        self.a * (hi.exp() - lo.exp()) + self.b * ((-lo).exp() - (-hi).exp()) + self.nu.abs() * (hi - lo)
    }

    /// Height of the lifted line.
    pub fn contour_height(&self) -> f64 {
        let half_pi = std::f64::consts::FRAC_PI_2;
        if self.nu <= 0.0 {
            return half_pi;
        }
        let z = self.z_eff();
        let steepest = if self.nu < z { (self.nu / z).acos() } else { 0.0 };
        steepest.max(half_pi.min(1.0 / self.nu))
    }

    fn contour<const N: usize>(
        &self,
        shifts: [f64; N],
        window: &Interval,
        spec: &QuadSpec,
    ) -> Result<QuadResult<[Complex64; N]>> {
        if window.hi == Endpoint::PosInfinity && self.a == 0.0 {
            return Err(Error::InvalidArgument("upper end at +infinity needs A > 0".into()));
        }
        if window.lo == Endpoint::NegInfinity && self.b == 0.0 {
            return Err(Error::InvalidArgument("lower end at -infinity needs B > 0".into()));
        }
        let tau0 = self.contour_height();
        let mut total = QuadResult::exact([Complex64::new(0.0, 0.0); N]);
        if let Some(lo) = window.lo.finite() {
            total = total.plus(self.vertical(shifts, lo, tau0, spec));
        }
        total = total.plus(self.horizontal(shifts, window, tau0, spec)?);
        if let Some(hi) = window.hi.finite() {
            total = total.plus(self.vertical(shifts, hi, tau0, spec).map(|v| v.scale(-1.0)));
        }
        Ok(total)
    }

    /// `i int_0^tau0 e^{s (x + i tau)} e^{i psi(x + i tau)} dtau`.
    fn vertical<const N: usize>(&self, shifts: [f64; N], x: f64, tau0: f64, spec: &QuadSpec) -> QuadResult<[Complex64; N]> {
        let m = self.a * x.exp() + self.b * (-x).exp();
        // modulus is exp(s x + nu tau - m sin tau); cut where it has dropped by TAIL_DROP
        let mut end = tau0;
        if m * tau0.sin() - self.nu.max(0.0) * tau0 > TAIL_DROP {
            let (mut lo, mut hi) = (0.0, tau0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if m * mid.sin() - self.nu.max(0.0) * mid > TAIL_DROP {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            end = hi;
        }
        let mut pts = vec![0.0];
        if m > 0.0 {
            let mut t = 1.0 / m;
            while t < end {
                pts.push(t);
                t *= 2.0;
            }
        }
        pts.push(end);
        let i = Complex64::new(0.0, 1.0);
        integrate_breaks(
            |tau: f64| {
                let w = Complex64::new(x, tau);
                let base = self.integrand_c(w) * i;
                std::array::from_fn(|k| base * (shifts[k] * w).exp())
            },
            &pts,
            spec,
        )
    }

    fn horizontal<const N: usize>(
        &self,
        shifts: [f64; N],
        window: &Interval,
        tau0: f64,
        spec: &QuadSpec,
    ) -> Result<QuadResult<[Complex64; N]>> {
        let smin = shifts.iter().cloned().fold(f64::INFINITY, f64::min);
        let smax = shifts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sin0 = tau0.sin();
        // log-modulus bound over the shifts
        let ell = |x: f64| {
            let s = if x >= 0.0 { smax } else { smin };
            s * x + self.nu * tau0 - (self.a * x.exp() + self.b * (-x).exp()) * sin0
        };
        let (lo, hi) = self.horizontal_range(window, &ell, smin, smax)?;
        if !(hi > lo) {
            return Ok(QuadResult::exact([Complex64::new(0.0, 0.0); N]));
        }
        let cos0 = tau0.cos();
        let line_phase = |x: f64| (self.a * x.exp() - self.b * (-x).exp()) * cos0 - self.nu * x;
        let max_panels = (spec.max_evals / 42).max(2);
        let pts = phase_breakpoints(&line_phase, lo, hi, max_panels);
        Ok(integrate_breaks(
            |x: f64| {
                let w = Complex64::new(x, tau0);
                let base = self.integrand_c(w);
                std::array::from_fn(|k| base * (shifts[k] * w).exp())
            },
            &pts,
            spec,
        ))
    }

    /// Finite stand-ins for the horizontal integration range.
    fn horizontal_range<L: Fn(f64) -> f64>(&self, window: &Interval, ell: &L, smin: f64, smax: f64) -> Result<(f64, f64)> {
        let peak = {
            // ell is concave when A, B > 0; find its maximum on a coarse bracket
            let (mut l, mut r) = (-60.0, 60.0);
            if self.a == 0.0 || self.b == 0.0 {
                (0.0, 0.0)
            } else {
                for _ in 0..200 {
                    let m1 = l + (r - l) / 3.0;
                    let m2 = r - (r - l) / 3.0;
                    if ell(m1) < ell(m2) {
                        l = m1;
                    } else {
                        r = m2;
                    }
                }
                let x = 0.5 * (l + r);
                (x, ell(x))
            }
        };
        let level = peak.1 - TAIL_DROP;
        let hi = match window.hi {
            Endpoint::Finite(x) => x,
            Endpoint::PosInfinity => {
                if smax >= self.a * 1e300 {
                    return Err(Error::InvalidArgument("non-decaying upper tail".into()));
                }
                let mut x = peak.0.max(0.0) + 1.0;
                while ell(x) > level {
                    x += 1.0 + 0.25 * x.abs();
                }
                x
            }
            Endpoint::NegInfinity => return Err(Error::InvalidArgument("window upper end at -infinity".into())),
        };
        let lo = match window.lo {
            Endpoint::Finite(x) => x,
            Endpoint::NegInfinity => {
                let _ = smin;
                let mut x = peak.0.min(0.0) - 1.0;
                while ell(x) > level {
                    x -= 1.0 + 0.25 * x.abs();
                }
                x
            }
            Endpoint::PosInfinity => return Err(Error::InvalidArgument("window lower end at +infinity".into())),
        };
        // clip finite ends to where the line integrand is not negligible
        let lo_eff = if window.lo.is_finite() && self.b > 0.0 && self.a > 0.0 && lo < peak.0 && ell(lo) < level {
            let (mut a, mut b) = (lo, peak.0);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if ell(m) < level {
                    a = m;
                } else {
                    b = m;
                }
            }
            a
        } else {
            lo
        };
        let hi_eff = if window.hi.is_finite() && self.a > 0.0 && self.b > 0.0 && hi > peak.0 && ell(hi) < level {
            let (mut a, mut b) = (peak.0, hi);
            for _ in 0..100 {
                let m = 0.5 * (a + b);
                if ell(m) < level {
                    b = m;
                } else {
                    a = m;
                }
            }
            b
        } else {
            hi
        };
        Ok((lo_eff, hi_eff.max(lo_eff)))
    }

    /// Real-axis quadrature with panels bounded by the phase.
    pub fn direct<const N: usize>(&self, shifts: [f64; N], lo: f64, hi: f64, spec: &QuadSpec) -> QuadResult<[Complex64; N]> {
        let max_panels = (spec.max_evals / 42).max(2);
        let phase = |w: f64| self.psi(w);
        let pts = phase_breakpoints(&phase, lo.min(hi), lo.max(hi), max_panels);
        let r = integrate_breaks(
            |w: f64| {
                let base = self.phase_factor(w);
                std::array::from_fn(|k| base * (shifts[k] * w).exp())
            },
            &pts,
            spec,
        );
        if lo <= hi {
            r
        } else {
            r.map(|v| v.scale(-1.0))
        }
    }

    /// Double power series in `A e^w` and `B e^-w`, integrated termwise.
    pub fn series<const N: usize>(&self, shifts: [f64; N], lo: f64, hi: f64) -> Result<QuadResult<[Complex64; N]>> {
        let growth = self.a * hi.exp() + self.b * (-lo).exp();
        if growth > SERIES_GROWTH_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "series evaluation needs A e^hi + B e^-lo <= {SERIES_GROWTH_LIMIT}, got {growth:.3}"
            )));
        }
        let i = Complex64::new(0.0, 1.0);
        let len = hi - lo;
        let nmax = series_terms(growth);
        let mut out = [Complex64::new(0.0, 0.0); N];
        let mut bound = 0.0;
        for (k, &s) in shifts.iter().enumerate() {
            let mut acc = crate::quadrature::CompensatedSum::<Complex64>::new();
            for j in 0..=nmax {
                for l in 0..=nmax {
                    let c = Complex64::new(s + j as f64 - l as f64, -self.nu);
                    // anchor at the end where |e^{c w}| is largest
                    let anchor = if c.re >= 0.0 { hi } else { lo };
                    let p = self.a * anchor.exp();
                    let m = self.b * (-anchor).exp();
                    let coef = (i * p).powu(j as u32) * (-i * m).powu(l as u32) / (factorial(j) * factorial(l));
                    let base = (Complex64::new(s, -self.nu) * anchor).exp();
                    let seg = exp_segment(c, lo - anchor, hi - anchor);
                    acc.add(coef * base * seg);
                }
            }
            out[k] = acc.value();
            bound += (s.abs() * hi.abs().max(lo.abs())).exp() * growth.exp() * len;
        }
        // truncation is below 1e-17 relative to e^growth; rounding dominates
        let error = 8.0 * f64::EPSILON * bound;
        Ok(QuadResult { value: out, error, evals: 0, converged: true })
    }
}

fn finite_ends(window: &Interval, what: &str) -> Result<(f64, f64)> {
    match (window.lo.finite(), window.hi.finite()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::InvalidArgument(format!("{what} needs a finite window"))),
    }
}

/// Terms needed so that `g^n / n! < 1e-17 e^g`.
pub(crate) fn series_terms(g: f64) -> usize {
    let mut n = 0usize;
    let mut term = 1.0f64;
    let target = 1e-17 * g.exp().max(1.0);
    while n < 400 && (n as f64) < g + 2.0 || term > target {
        n += 1;
        term *= g / n as f64;
        if n >= 400 {
            break;
        }
    }
    n
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `int_a^b e^{c y} dy`, stable for small `|c|`.
pub(crate) fn exp_segment(c: Complex64, a: f64, b: f64) -> Complex64 {
    let len = b - a;
    let x = c * len;
    if x.norm() < 1e-3 {
        // e^{c a} * len * (1 + x/2 + x^2/6 + x^3/24 + x^4/120)
        let series = Complex64::new(1.0, 0.0) + x / 2.0 + x * x / 6.0 + x * x * x / 24.0 + x * x * x * x / 120.0;
        (c * a).exp() * len * series
    } else {
        ((c * b).exp() - (c * a).exp()) / c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::Interval;

    fn tight() -> QuadSpec {
        QuadSpec::with_tol(1e-15, 1e-14)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn empty_window_is_zero() {
        let p = ExpPhase::symmetric(3.0, 0.4).unwrap();
        let w = Interval::finite(0.7, 0.7).unwrap();
        let r = p.moments([0.0, 1.0], &w, Method::Auto, &tight()).unwrap();
        assert_eq!(r.value, [Complex64::new(0.0, 0.0); 2]);
    }

    #[test]
    fn zero_phase_is_elementary() {
        let p = ExpPhase::new(0.0, 0.0, 0.0).unwrap();
        let w = Interval::finite(-0.5, 4.5).unwrap();
        let r = p.moments([-1.0, 0.0, 1.0], &w, Method::Contour, &tight()).unwrap().value;
        assert!(close(r[1], Complex64::new(5.0, 0.0), 1e-13));
        assert!(close(r[2], Complex64::new(4.5f64.exp() - (-0.5f64).exp(), 0.0), 1e-13));
        assert!(close(r[0], Complex64::new(0.5f64.exp() - (-4.5f64).exp(), 0.0), 1e-13));
    }

    #[test]
    fn contour_series_direct_agree() {
        let cases = [
            (0.4, 0.4, 0.0, -1.0, 1.5),
            (0.3, 0.2, 0.3, -2.0, 1.0),
            (2.0, 0.5, -0.7, -1.0, 2.0),
            (5.0, 5.0, 3.0, -1.5, 1.2),
            (1.0, 3.0, 6.0, -0.5, 0.5),
            (0.0, 2.0, 0.0, -1.0, 3.0),
        ];
        for &(a, b, nu, lo, hi) in &cases {
            let p = ExpPhase::new(a, b, nu).unwrap();
            let w = Interval::finite(lo, hi).unwrap();
            let c = p.moments([-1.0, 0.0, 1.0], &w, Method::Contour, &tight()).unwrap();
            let d = p.moments([-1.0, 0.0, 1.0], &w, Method::Direct, &tight()).unwrap();
            for k in 0..3 {
                assert!(close(c.value[k], d.value[k], 1e-11), "{:?} k={k}: {} vs {}", (a, b, nu), c.value[k], d.value[k]);
            }
            if a * hi.exp() + b * (-lo).exp() <= SERIES_GROWTH_LIMIT {
                let s = p.moments([-1.0, 0.0, 1.0], &w, Method::Series, &tight()).unwrap();
                for k in 0..3 {
                    assert!(close(s.value[k], d.value[k], 1e-10), "series {:?} k={k}", (a, b, nu));
                }
            }
        }
    }

    #[test]
    fn large_oscillation_contour_matches_direct() {
        let p = ExpPhase::symmetric(20.0, 0.0).unwrap();
        let w = Interval::finite(0.0, 4.5).unwrap();
        let c = p.moments([0.0, 1.0], &w, Method::Contour, &tight()).unwrap();
        let d = p.moments([0.0, 1.0], &w, Method::Direct, &tight()).unwrap();
        assert!(close(c.value[0], d.value[0], 1e-11));
        assert!(close(c.value[1], d.value[1], 1e-10));
        assert!(c.evals * 20 < d.evals, "contour {} direct {}", c.evals, d.evals);
    }

    #[test]
    fn full_line_is_real_macdonald() {
        // (1/2) int e^{i sinh u} du over R equals e^{pi nu/2} K_{i nu}(z) with nu = 0: K0(1)
        let p = ExpPhase::symmetric(1.0, 0.0).unwrap();
        let r = p.moments([0.0], &Interval::full(), Method::Auto, &tight()).unwrap();
        let k0 = 0.5 * r.value[0];
        assert!((k0.re - 0.421_024_438_240_708_3).abs() < 1e-13, "{k0}");
        assert!(k0.im.abs() < 1e-13);
    }

    #[test]
    fn infinite_end_needs_decay() {
        let p = ExpPhase::new(0.0, 1.0, 0.0).unwrap();
        let w = Interval::new(Endpoint::Finite(0.0), Endpoint::PosInfinity).unwrap();
        assert!(p.moments([0.0], &w, Method::Auto, &tight()).is_err());
        assert!(p.moments([0.0], &w, Method::Series, &tight()).is_err());
    }

    #[test]
    fn exp_segment_small_and_large() {
        let c = Complex64::new(1e-9, -2e-9);
        let v = exp_segment(c, -1.0, 2.0);
        assert!((v - Complex64::new(3.0, 0.0)).norm() < 1e-8);
        let c = Complex64::new(0.5, 1.0);
        let v = exp_segment(c, 0.0, 1.0);
        assert!((v - (c.exp() - 1.0) / c).norm() < 1e-15);
    }
}
