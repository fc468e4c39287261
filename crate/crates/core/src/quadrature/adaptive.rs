//! Globally adaptive one-dimensional quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::rules::{gk21_nodes, RuleNode};
use super::value::{CompensatedSum, QuadValue};
use crate::error::{Error, Result};

/// How semi-infinite k-space axes are truncated and grown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffPolicy {
    /// Initial cutoff in units of `z`, i.e. `k_max = initial_z * eps / (c rho)`.
    pub initial_z: f64,
    pub growth: f64,
    /// Relative change between successive cutoffs that counts as converged.
    pub rel_change: f64,
    pub max_growths: usize,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self { initial_z: 20.0, growth: 1.5, rel_change: 1e-4, max_growths: 3 }
    }
}

/// Tolerances and budgets shared by all integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
    pub cutoff: CutoffPolicy,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-10, max_evals: 2_000_000, cutoff: CutoffPolicy::default() }
    }
}

impl QuadSpec {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be > 0".into()));
        }
        if self.cutoff.growth <= 1.0 {
            return Err(Error::InvalidArgument("cutoff growth factor must be > 1".into()));
        }
        if self.max_evals == 0 {
            return Err(Error::InvalidArgument("max_evals must be positive".into()));
        }
        Ok(())
    }

    pub fn target(&self, value_norm: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value_norm)
    }
}

/// An integral estimate with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<V> {
    pub value: V,
    pub error: f64,
    pub evals: usize,
    pub converged: bool,
}

impl<V: QuadValue> QuadResult<V> {
    pub fn exact(value: V) -> Self {
        Self { value, error: 0.0, evals: 0, converged: true }
    }

    /// Turns a budget overrun into [`Error::NonConvergence`].
    pub fn require(self, what: &str) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                what: what.to_string(),
                partial: self.value.norm(),
                error: self.error,
            })
        }
    }

    pub fn map<W: QuadValue>(self, f: impl FnOnce(V) -> W) -> QuadResult<W> {
        QuadResult { value: f(self.value), error: self.error, evals: self.evals, converged: self.converged }
    }

    pub fn plus(self, other: Self) -> Self {
        Self {
            value: self.value.add(other.value),
            error: self.error + other.error,
            evals: self.evals + other.evals,
            converged: self.converged && other.converged,
        }
    }
}

struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    error: f64,
    floor: f64,
}

impl<V> PartialEq for Segment<V> {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl<V> Eq for Segment<V> {}
impl<V> PartialOrd for Segment<V> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<V> Ord for Segment<V> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error).then_with(|| o.a.total_cmp(&self.a))
    }
}

/// Applies a Gauss-Kronrod pair (nodes from [`GaussKronrod::nodes`]) on
/// `[a, b]`; returns (value, error estimate).
pub fn apply_rule<V: QuadValue, F: FnMut(f64) -> V>(
    nodes: &[RuleNode],
    f: &mut F,
    a: f64,
    b: f64,
) -> (V, f64) {
    let (v, e, _) = apply_rule_floor(nodes, f, a, b);
    (v, e)
}

/// As [`apply_rule`], also returning the rounding floor of the estimate.
fn apply_rule_floor<V: QuadValue, F: FnMut(f64) -> V>(
    nodes: &[RuleNode],
    f: &mut F,
    a: f64,
    b: f64,
) -> (V, f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut vals = [V::zero(); 64];
    let mut k = CompensatedSum::new();
    let mut g = CompensatedSum::new();
    let mut absk = 0.0;
    for (i, n) in nodes.iter().enumerate() {
        let v = f(mid + half * n.x);
        k.add(v.scale(n.wk));
        if n.wg != 0.0 {
            g.add(v.scale(n.wg));
        }
        absk += n.wk * v.norm();
        vals[i] = v;
    }
    let kv = k.value();
    let mean = kv.scale(0.5);
    let resasc: f64 = nodes.iter().zip(&vals).map(|(n, v)| n.wk * v.sub(mean).norm()).sum::<f64>()
        * half.abs();
    let resabs = absk * half.abs();
    let value = kv.scale(half);
    let mut err = kv.sub(g.value()).scale(half).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let roundoff = 50.0 * f64::EPSILON * resabs;
    if roundoff > err {
        err = roundoff;
    }
    if !err.is_finite() || !value.norm().is_finite() {
        err = f64::INFINITY;
    }
    (value, err, roundoff)
}

/// Globally adaptive GK21 over `[points[0], points[last]]`, with the given
/// interior breakpoints as initial subdivision.
pub fn integrate_breaks<V: QuadValue, F: FnMut(f64) -> V>(
    mut f: F,
    points: &[f64],
    spec: &QuadSpec,
) -> QuadResult<V> {
    assert!(points.len() >= 2, "need at least one interval");
    let rule = gk21_nodes();
    let per_rule = rule.len();
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    let mut total_err = 0.0;
    let mut total = CompensatedSum::new();
    for w in points.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (value, error, floor) = apply_rule_floor(rule, &mut f, w[0], w[1]);
        evals += per_rule;
        total_err += error;
        total.add(value);
        heap.push(Segment { a: w[0], b: w[1], value, error, floor });
    }
    let mut finished: Vec<Segment<V>> = Vec::new();
    let mut running = total.value();
    let mut iter = 0usize;
    let mut converged = true;
    while !heap.is_empty() {
        if total_err <= spec.target(running.norm()) {
            break;
        }
        if evals + 2 * per_rule > spec.max_evals {
            converged = false;
            break;
        }
        let worst = heap.pop().expect("peeked");
        let mid = 0.5 * (worst.a + worst.b);
        if worst.error <= worst.floor {
            // limited by rounding; splitting cannot help
            finished.push(worst);
            continue;
        }
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a).abs() < 1e-15 * worst.a.abs().max(1.0) {
            // interval cannot be split further
            finished.push(worst);
            if heap.is_empty() {
                converged = false;
            }
            continue;
        }
        let (v1, e1, f1) = apply_rule_floor(rule, &mut f, worst.a, mid);
        let (v2, e2, f2) = apply_rule_floor(rule, &mut f, mid, worst.b);
        evals += 2 * per_rule;
        total_err += e1 + e2 - worst.error;
        running = running.add(v1).add(v2).sub(worst.value);
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1, floor: f1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2, floor: f2 });
        iter += 1;
        if iter % 64 == 0 {
            let all = heap.iter().chain(finished.iter());
            total_err = all.map(|s| s.error).sum();
        }
    }
    let mut segs: Vec<Segment<V>> = heap.into_vec();
    segs.extend(finished);
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut sum = CompensatedSum::new();
    let mut err = 0.0;
    let mut floor = 0.0;
    for s in &segs {
        sum.add(s.value);
        err += s.error;
        floor += s.floor;
    }
    let value = sum.value();
    if converged && err > spec.target(value.norm()).max(2.0 * floor) {
        converged = false;
    }
    QuadResult { value, error: err, evals, converged }
}

/// Adaptive integral over `[a, b]`; `a > b` flips the sign.
pub fn integrate<V: QuadValue, F: FnMut(f64) -> V>(f: F, a: f64, b: f64, spec: &QuadSpec) -> QuadResult<V> {
    if a == b {
        return QuadResult::exact(V::zero());
    }
    if a > b {
        return integrate(f, b, a, spec).map(|v| v.scale(-1.0));
    }
    integrate_breaks(f, &[a, b], spec)
}

/// Splits `[a, b]` so that the phase changes by at most `pi` on each panel.
pub fn phase_breakpoints<P: Fn(f64) -> f64>(phase: &P, a: f64, b: f64, max_panels: usize) -> Vec<f64> {
    let mut out = vec![a];
    let mut stack = vec![(a, b, phase(a), phase(b), 0u32)];
    // depth-first, right-to-left pushes keep output ordered
    while let Some((x0, x1, p0, p1, depth)) = stack.pop() {
        let xm = 0.5 * (x0 + x1);
        let pm = phase(xm);
        let small = (p1 - p0).abs() <= std::f64::consts::PI
            && (pm - 0.5 * (p0 + p1)).abs() <= 0.5 * std::f64::consts::PI;
        if small || depth >= 60 || out.len() + stack.len() >= max_panels || !(xm > x0 && xm < x1) {
            out.push(x1);
        } else {
            stack.push((xm, x1, pm, p1, depth + 1));
            stack.push((x0, xm, p0, pm, depth + 1));
        }
    }
    out
}

/// `int_a^b amplitude(x) e^{i phase(x)} dx` with panels bounded by the local
/// phase variation, then global adaptivity.
pub fn integrate_oscillatory<A, P>(
    amplitude: A,
    phase: P,
    a: f64,
    b: f64,
    spec: &QuadSpec,
) -> QuadResult<num_complex::Complex64>
where
    A: Fn(f64) -> num_complex::Complex64,
    P: Fn(f64) -> f64,
{
    if a == b {
        return QuadResult::exact(num_complex::Complex64::new(0.0, 0.0));
    }
    if a > b {
        return integrate_oscillatory(amplitude, phase, b, a, spec).map(|v| -v);
    }
    let max_panels = (spec.max_evals / 42).max(2);
    let points = phase_breakpoints(&phase, a, b, max_panels);
    integrate_breaks(
        |x| amplitude(x) * num_complex::Complex64::from_polar(1.0, phase(x)),
        &points,
        spec,
    )
}

/// `int_a^inf f` for integrands that decay; panels of width `h` doubling
/// until two consecutive panels contribute below tolerance.
pub fn integrate_to_infinity<V: QuadValue, F: FnMut(f64) -> V>(
    mut f: F,
    a: f64,
    h: f64,
    spec: &QuadSpec,
) -> QuadResult<V> {
    let mut result = QuadResult::exact(V::zero());
    let mut lo = a;
    let mut width = h;
    let mut quiet = 0;
    for _ in 0..200 {
        let hi = lo + width;
        let piece = integrate(&mut f, lo, hi, spec);
        result = result.plus(piece);
        let small = piece.value.norm() + piece.error <= 1e-3 * spec.target(result.value.norm());
        quiet = if small { quiet + 1 } else { 0 };
        if quiet >= 2 {
            return result;
        }
        lo = hi;
        width *= 2.0;
        if !lo.is_finite() {
            break;
        }
    }
    result.converged = false;
    result
}

/// Limit `eps -> 0` of `f(eps)` by polynomial (Neville) extrapolation over
/// `eps_k = eps0 / 2^k`, extended until successive diagonal entries agree.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation<V> {
    pub value: V,
    pub error: f64,
    /// `(eps_k, f(eps_k))` in the order evaluated.
    pub samples: Vec<(f64, V)>,
}

pub fn richardson_to_zero<V: QuadValue, F: FnMut(f64) -> Result<V>>(
    mut f: F,
    eps0: f64,
    min_levels: usize,
    max_levels: usize,
    tol: f64,
) -> Result<Extrapolation<V>> {
    if !(eps0 > 0.0) || max_levels < 2 {
        return Err(Error::InvalidArgument("extrapolation needs eps0 > 0 and >= 2 levels".into()));
    }
    let mut rows: Vec<Vec<V>> = Vec::new();
    let mut samples = Vec::new();
    let mut last_diag: Option<V> = None;
    let mut best = (V::zero(), f64::INFINITY);
    for k in 0..max_levels {
        let eps = eps0 / 2f64.powi(k as i32);
        let fk = f(eps)?;
        samples.push((eps, fk));
        let mut row = vec![fk];
        if let Some(prev) = rows.last() {
            for j in 1..=k {
                let factor = 2f64.powi(j as i32) - 1.0;
                let t = row[j - 1].add(row[j - 1].sub(prev[j - 1]).scale(1.0 / factor));
                row.push(t);
            }
        }
        let diag = row[k];
        if let Some(ld) = last_diag {
            let diff = diag.sub(ld).norm();
            if diff < best.1 {
                best = (diag, diff);
            }
            if k + 1 >= min_levels && diff <= tol * diag.norm().max(1.0) {
                return Ok(Extrapolation { value: diag, error: diff, samples });
            }
        }
        last_diag = Some(diag);
        rows.push(row);
    }
    Err(Error::NonConvergence {
        what: "eps -> 0 extrapolation (sequence not Cauchy)".into(),
        partial: best.0.norm(),
        error: best.1,
    })
}
