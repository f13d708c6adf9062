//! Transferred operators `T♯f(x) = T(F(·, x))(0)` and their direct ergodic
//! counterparts.
//!
//! The line operator is applied to the truncated trace `F_{a+ε}(·, x)`, where
//! `ε` is the padding (at least the operator's semilocality radius). Only the
//! cells the kernel actually reads at `t = 0` are materialized; the truncation
//! is applied on top of that window.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flows::{orbit_cells, ticks, Flow, Point, SpaceFunction};
use crate::line_operators::{LineOperator, OperatorKind, WindowOrientation};
use crate::sampled_line::{SampledFunction, DEFAULT_STEP};
use crate::weights::{a1_constant, ap_constant, IntervalFamily, Weight};

#[derive(Debug, Clone, PartialEq)]
pub struct TransferredOperator {
    line_op: LineOperator,
    flow: Flow,
    truncation_a: f64,
    pad: f64,
    step: f64,
}

/// Default truncation: `pad + 2 · reach`, or 1 for an operator with no reach.
pub fn default_truncation(line_op: &LineOperator, pad: f64) -> f64 {
    let reach = line_op.semilocal_radius();
    if reach > 0.0 {
        pad + 2.0 * reach
    } else {
        pad.max(1.0)
    }
}

/// Interval of `t` read by `kernel_at(·, 0)`.
fn kernel_window(op: &LineOperator, step: f64) -> (f64, f64) {
    match op.kind() {
        OperatorKind::Identity => (-step, step),
        OperatorKind::Maximal { radii } => (0.0, radii.iter().cloned().fold(0.0, f64::max)),
        OperatorKind::Hilbert { eps } => (-1.0 / eps, 1.0 / eps),
        OperatorKind::Square {
            n_max, orientation, ..
        } => {
            let r = 2f64.powi(*n_max);
            match orientation {
                WindowOrientation::Backward => (-r, 0.0),
                WindowOrientation::Forward => (0.0, r),
            }
        }
        OperatorKind::SupFamily(members) => members
            .iter()
            .map(|m| kernel_window(m, step))
            .fold((0.0, 0.0), |(lo, hi), (l, h)| (lo.min(l), hi.max(h))),
    }
}

impl TransferredOperator {
    /// `pad` defaults to the semilocality radius, `truncation_a` to
    /// [`default_truncation`], `step` to [`DEFAULT_STEP`].
    pub fn new(
        line_op: LineOperator,
        flow: Flow,
        truncation_a: Option<f64>,
        pad: Option<f64>,
        step: Option<f64>,
    ) -> Result<Self> {
        let radius = line_op.semilocal_radius();
        let pad = pad.unwrap_or(radius);
        if !(pad >= radius && pad.is_finite()) {
            return Err(Error::invalid(format!(
                "pad {pad} is below the operator's semilocality radius {radius}"
            )));
        }
        let truncation_a = truncation_a.unwrap_or_else(|| default_truncation(&line_op, pad));
        if !(truncation_a > 0.0 && truncation_a.is_finite()) {
            return Err(Error::invalid(format!("truncation a must be positive, got {truncation_a}")));
        }
        let step = step.unwrap_or(DEFAULT_STEP);
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid(format!("step must be positive, got {step}")));
        }
        Ok(TransferredOperator {
            line_op,
            flow,
            truncation_a,
            pad,
            step,
        })
    }

    /// Same operator with another truncation.
    pub fn with_truncation(&self, a: f64) -> Result<Self> {
        Self::new(self.line_op.clone(), self.flow, Some(a), Some(self.pad), Some(self.step))
    }

    pub fn line_op(&self) -> &LineOperator {
        &self.line_op
    }

    pub fn flow(&self) -> &Flow {
        &self.flow
    }

    pub fn truncation_a(&self) -> f64 {
        self.truncation_a
    }

    pub fn pad(&self) -> f64 {
        self.pad
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Half-width `a + ε` of the truncated trace.
    pub fn trace_radius(&self) -> f64 {
        self.truncation_a + self.pad
    }

    /// The part of `F_{a+ε}(·, x)` that the kernel reads at `t = 0`.
    pub fn truncated_trace(&self, f: &SpaceFunction, x: &Point) -> Result<SampledFunction> {
        let h = self.step;
        let b = self.trace_radius();
        let n_half = (b / h).ceil() as i64;
        let (lo, hi) = kernel_window(&self.line_op, h);
        let k_lo = ((lo / h).floor() as i64 - 1).max(-n_half);
        let k_hi = ((hi / h).ceil() as i64 + 2).min(n_half + 1);
        let trace = orbit_cells(&self.flow, f, x, k_lo, k_hi.max(k_lo + 1), h)?;
        Ok(trace.map_indexed(|i, v| if trace.centre(i).abs() < b { v } else { 0.0 }))
    }

    /// `T♯f(x) = T(F_{a+ε}(·, x))(0)`.
    pub fn apply(&self, f: &SpaceFunction, x: &Point) -> Result<f64> {
        let trace = self.truncated_trace(f, x)?;
        Ok(self.line_op.kernel_at(&trace, 0.0))
    }

    /// `T♯f` at each point, in input order.
    pub fn apply_many(&self, f: &SpaceFunction, points: &[Point]) -> Result<Vec<f64>> {
        points.par_iter().map(|x| self.apply(f, x)).collect()
    }

    /// `G_{a+ε}(·, x) = T(F_{a+ε}(·, x))` on the full padded window, with the
    /// trace itself.
    pub fn line_outputs(&self, f: &SpaceFunction, x: &Point) -> Result<(SampledFunction, SampledFunction)> {
        let h = self.step;
        let b = self.trace_radius();
        let n_half = (b / h).ceil() as i64;
        let raw = orbit_cells(&self.flow, f, x, -n_half, n_half + 1, h)?;
        let trace = raw.map_indexed(|i, v| if raw.centre(i).abs() < b { v } else { 0.0 });
        let out = self.line_op.apply(&trace);
        Ok((trace, out))
    }
}

/// Values `f(U^{k h} x)` for `k_lo ≤ k < k_hi`.
fn node_samples(flow: &Flow, f: &SpaceFunction, x: &Point, k_lo: i64, k_hi: i64, h: f64) -> Result<Vec<f64>> {
    (k_lo..k_hi)
        .map(|k| Ok(f.eval(&flow.map_ticks(ticks(k as f64 * h), x)?)))
        .collect()
}

/// Forward orbit integrals `∫_0^s g`, where `g_k = g(k h)` is held on
/// `[(k − 1/2) h, (k + 1/2) h)`.
struct ForwardIntegral {
    vals: Vec<f64>,
    prefix: Vec<f64>,
    h: f64,
}

impl ForwardIntegral {
    fn new(vals: Vec<f64>, h: f64) -> Self {
        let mut prefix = Vec::with_capacity(vals.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for v in &vals {
            acc += v;
            prefix.push(acc);
        }
        ForwardIntegral { vals, prefix, h }
    }

    fn upto(&self, s: f64) -> f64 {
        let h = self.h;
        let u = s / h;
        if u <= 0.5 {
            return self.vals[0] * s;
        }
        // cell m holds s
        let m = ((u + 0.5).floor() as usize).min(self.vals.len());
        let mut acc = 0.5 * h * self.vals[0] + h * (self.prefix[m] - self.prefix[1]);
        if m < self.vals.len() {
            acc += self.vals[m] * (s - (m as f64 - 0.5) * h);
        }
        acc
    }
}

/// `max_s (1/s) ∫_0^s |f(U^t x)| dt`.
pub fn ergodic_maximal(flow: &Flow, f: &SpaceFunction, x: &Point, radii: &[f64], step: f64) -> Result<f64> {
    if radii.is_empty() || radii.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::invalid("radii must be positive"));
    }
    let smax = radii.iter().cloned().fold(0.0, f64::max);
    let n = (smax / step).ceil() as i64 + 1;
    let vals: Vec<f64> = node_samples(flow, f, x, 0, n, step)?
        .into_iter()
        .map(f64::abs)
        .collect();
    let integral = ForwardIntegral::new(vals, step);
    Ok(radii
        .iter()
        .map(|s| integral.upto(*s) / s)
        .fold(0.0, f64::max))
}

/// `∫_{eps ≤ |t| ≤ 1/eps} f(U^t x) / t dt`.
pub fn ergodic_hilbert(flow: &Flow, f: &SpaceFunction, x: &Point, eps: f64, step: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    let upper = 1.0 / eps;
    let n = (upper / step + 0.5).ceil() as i64 + 1;
    let fwd = node_samples(flow, f, x, 0, n, step)?;
    let bwd = node_samples(flow, f, x, -(n - 1), 1, step)?;
    let mut acc = 0.0;
    for k in 1..n as usize {
        // node k's cell covers distances [(k − 1/2) h, (k + 1/2) h] on either side
        let lo = ((k as f64 - 0.5) * step).max(eps);
        let hi = ((k as f64 + 0.5) * step).min(upper);
        if hi > lo {
            acc += (fwd[k] - bwd[n as usize - 1 - k]) * (hi / lo).ln();
        }
    }
    Ok(acc)
}

/// `(Σ_n |2^{-n} ∫_0^{2^n} f(U^t x) dt − 2^{-(n-1)} ∫_0^{2^{n-1}} f(U^t x) dt|²)^{1/2}`.
pub fn ergodic_square(
    flow: &Flow,
    f: &SpaceFunction,
    x: &Point,
    n_min: i32,
    n_max: i32,
    step: f64,
) -> Result<f64> {
    if n_min > n_max {
        return Err(Error::invalid("n_min must not exceed n_max"));
    }
    let n = (2f64.powi(n_max) / step).ceil() as i64 + 1;
    let integral = ForwardIntegral::new(node_samples(flow, f, x, 0, n, step)?, step);
    let avg = |len: f64| integral.upto(len) / len;
    let mut acc = 0.0;
    for j in n_min..=n_max {
        let d = avg(2f64.powi(j)) - avg(2f64.powi(j - 1));
        acc += d * d;
    }
    Ok(acc.sqrt())
}

/// Cells covering the family's hull with one spare cell on each side.
fn weight_trace(w: &SpaceFunction, flow: &Flow, x: &Point, fam: &IntervalFamily, step: f64) -> Result<Weight> {
    let hull = fam.hull();
    let k_lo = (hull.left() / step).floor() as i64 - 1;
    let k_hi = (hull.right() / step).ceil() as i64 + 2;
    let trace = orbit_cells(flow, w, x, k_lo, k_hi, step)?;
    if let Some(v) = trace.samples().iter().find(|v| **v < 0.0) {
        return Err(Error::invalid(format!("weight takes negative value {v} along the orbit")));
    }
    Weight::sampled(trace)
}

/// `A_p` constant of `t ↦ w(U^t x)` for each base point.
pub fn ap_prime_per_point(
    w: &SpaceFunction,
    flow: &Flow,
    p: f64,
    base_points: &[Point],
    fam: &IntervalFamily,
    step: f64,
) -> Result<Vec<f64>> {
    base_points
        .par_iter()
        .map(|x| ap_constant(&weight_trace(w, flow, x, fam, step)?, p, fam))
        .collect()
}

/// `sup_x sup_I ⟨w∘U⟩_I ⟨(w∘U)^{-1/(p-1)}⟩_I^{p-1}` over sampled base points.
pub fn ap_prime_constant(
    w: &SpaceFunction,
    flow: &Flow,
    p: f64,
    base_points: &[Point],
    fam: &IntervalFamily,
    step: f64,
) -> Result<f64> {
    if base_points.is_empty() {
        return Err(Error::invalid("A_p' needs at least one base point"));
    }
    Ok(ap_prime_per_point(w, flow, p, base_points, fam, step)?
        .into_iter()
        .fold(0.0, f64::max))
}

pub fn a1_prime_per_point(
    w: &SpaceFunction,
    flow: &Flow,
    base_points: &[Point],
    fam: &IntervalFamily,
    step: f64,
) -> Result<Vec<f64>> {
    base_points
        .par_iter()
        .map(|x| a1_constant(&weight_trace(w, flow, x, fam, step)?, fam))
        .collect()
}

/// Orbit-wise `A_1` constant, max over base points.
pub fn a1_prime_constant(
    w: &SpaceFunction,
    flow: &Flow,
    base_points: &[Point],
    fam: &IntervalFamily,
    step: f64,
) -> Result<f64> {
    if base_points.is_empty() {
        return Err(Error::invalid("A_1' needs at least one base point"));
    }
    Ok(a1_prime_per_point(w, flow, base_points, fam, step)?
        .into_iter()
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::stratified_points;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    const H: f64 = 1.0 / 1024.0;

    fn golden_op(op: LineOperator) -> TransferredOperator {
        TransferredOperator::new(op, Flow::golden(), None, None, None).unwrap()
    }

    #[test]
    fn pad_must_cover_radius() {
        let op = LineOperator::maximal(vec![2.0]).unwrap();
        assert!(TransferredOperator::new(op.clone(), Flow::golden(), None, Some(1.0), None).is_err());
        let t = TransferredOperator::new(op, Flow::golden(), None, None, None).unwrap();
        assert_eq!(t.pad(), 2.0);
        assert_eq!(t.truncation_a(), 6.0);
    }

    #[test]
    fn identity_returns_f() {
        let t = golden_op(LineOperator::identity());
        let f = SpaceFunction::cosine(2, 1.0, 0.3).unwrap();
        for x in stratified_points(&Flow::golden(), 16) {
            assert_abs_diff_eq!(t.apply(&f, &x).unwrap(), f.eval(&x), epsilon = 1e-15);
        }
    }

    #[test]
    fn maximal_of_constant() {
        let t = golden_op(LineOperator::maximal(vec![1.0]).unwrap());
        let f = SpaceFunction::constant(-2.5).unwrap();
        assert_eq!(t.apply(&f, &Point::circle(0.3)).unwrap(), 2.5);
    }

    #[test]
    fn transfer_matches_direct() {
        let flow = Flow::golden();
        let f = SpaceFunction::arc(0.2, 0.45).unwrap();
        let g = SpaceFunction::cosine(3, 1.0, 0.25).unwrap();
        let max = golden_op(LineOperator::default_maximal());
        let hil = golden_op(LineOperator::hilbert(1.0 / 16.0).unwrap());
        let sq = golden_op(LineOperator::square_oriented(-6, 3, WindowOrientation::Forward).unwrap());
        let OperatorKind::Maximal { radii } = max.line_op().kind().clone() else { unreachable!() };
        for x in stratified_points(&flow, 8) {
            for func in [&f, &g] {
                let a = max.apply(func, &x).unwrap();
                let b = ergodic_maximal(&flow, func, &x, &radii, H).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
                let a = hil.apply(func, &x).unwrap();
                let b = ergodic_hilbert(&flow, func, &x, 1.0 / 16.0, H).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
                let a = sq.apply(func, &x).unwrap();
                let b = ergodic_square(&flow, func, &x, -6, 3, H).unwrap();
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn backward_square_is_square_of_reversed_flow() {
        let flow = Flow::golden();
        let f = SpaceFunction::steps(vec![1.0, -1.0, 0.5]).unwrap();
        let t = golden_op(LineOperator::square(-4, 2).unwrap());
        for x in stratified_points(&flow, 8) {
            let a = t.apply(&f, &x).unwrap();
            let b = ergodic_square(&flow.reversed(), &f, &x, -4, 2, H).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn ergodic_examples() {
        let flow = Flow::golden();
        let c = SpaceFunction::constant(-1.5).unwrap();
        let x = Point::circle(0.7);
        assert_abs_diff_eq!(ergodic_maximal(&flow, &c, &x, &[0.25, 1.0], H).unwrap(), 1.5, epsilon = 1e-12);
        assert_eq!(ergodic_hilbert(&flow, &c, &x, 0.1, H).unwrap(), 0.0);
        assert_abs_diff_eq!(ergodic_square(&flow, &c, &x, -3, 3, H).unwrap(), 0.0, epsilon = 1e-12);
        let arc = SpaceFunction::arc(0.0, 0.5).unwrap();
        let start = Point::circle(0.0);
        let radii: Vec<f64> = (-6..=4).map(|k| 2f64.powi(k)).collect();
        assert_abs_diff_eq!(ergodic_maximal(&flow, &arc, &start, &radii, H).unwrap(), 1.0, epsilon = 1e-12);
        let cos = SpaceFunction::cosine(1, 1.0, 0.0).unwrap();
        let eps = 1.0 / 64.0;
        let v = ergodic_hilbert(&flow, &cos, &x, eps, H).unwrap();
        assert!(v.abs() <= 2.0 * (1.0 / (eps * eps)).ln());
        // single scale
        let one = ergodic_square(&flow, &cos, &x, 0, 0, H).unwrap();
        let tr = orbit_cells(&flow, &cos, &x, 0, 1025, H).unwrap();
        let expect = (tr.integrate_between(0.0, 1.0) - 2.0 * tr.integrate_between(0.0, 0.5)).abs();
        assert_abs_diff_eq!(one, expect, epsilon = 1e-12);
    }

    #[test]
    fn square_of_cosine_matches_closed_form() {
        let flow = Flow::golden();
        let alpha = flow.alphas()[0];
        let cos = SpaceFunction::cosine(1, 1.0, 0.0).unwrap();
        let x0 = 0.3;
        let x = Point::circle(x0);
        // exact orbit average of cos(2π(x0 + tα)) over [0, L]
        let avg = |l: f64| ((TAU * (x0 + l * alpha)).sin() - (TAU * x0).sin()) / (TAU * alpha * l);
        let exact: f64 = (-3..=3)
            .map(|n| {
                let d = avg(2f64.powi(n)) - avg(2f64.powi(n - 1));
                d * d
            })
            .sum::<f64>()
            .sqrt();
        let got = ergodic_square(&flow, &cos, &x, -3, 3, H).unwrap();
        // midpoint rule, error O(h²)
        assert_abs_diff_eq!(got, exact, epsilon = 1e-5);
    }

    #[test]
    fn ap_prime_examples() {
        let flow = Flow::golden();
        let pts = stratified_points(&flow, 16);
        let fam = IntervalFamily::dyadic(-6, 4, 0.5, 4.0).unwrap();
        let one = SpaceFunction::constant(1.0).unwrap();
        for p in [1.5, 2.0, 3.0] {
            assert_eq!(ap_prime_constant(&one, &flow, p, &pts, &fam, H).unwrap(), 1.0);
        }
        assert_eq!(a1_prime_constant(&one, &flow, &pts, &fam, H).unwrap(), 1.0);
        let w = SpaceFunction::cosine(1, 0.5, 1.0).unwrap();
        let per = ap_prime_per_point(&w, &flow, 2.0, &pts, &fam, H).unwrap();
        let hi = per.iter().cloned().fold(0.0, f64::max);
        let lo = per.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi.is_finite() && lo >= 1.0);
        assert!(hi / lo <= 1.05, "{lo} {hi}");
        let a1 = a1_prime_constant(&w, &flow, &pts, &fam, H).unwrap();
        assert!((1.0..=3.0).contains(&a1));
        let pw = SpaceFunction::steps(vec![1.0, 2.0, 1.5, 1.0]).unwrap();
        assert!(a1_prime_constant(&pw, &flow, &pts, &fam, H).unwrap() <= 2.0);
    }

    #[test]
    fn ap_prime_matches_line_constant_on_circle() {
        let flow = Flow::golden();
        let alpha = flow.alphas()[0];
        let x0 = 0.125;
        let fam = IntervalFamily::dyadic(-5, 3, 0.5, 2.0).unwrap();
        let w = SpaceFunction::cosine(1, 0.5, 1.0).unwrap();
        let orbit = ap_prime_constant(&w, &flow, 2.0, &[Point::circle(x0)], &fam, H).unwrap();
        let hull = fam.hull();
        // same nodes as the orbit trace: k h for floor(left/h) − 1 ≤ k < ceil(right/h) + 2
        let k_lo = (hull.left() / H).floor() as i64 - 1;
        let k_hi = (hull.right() / H).ceil() as i64 + 2;
        let vals = (k_lo..k_hi)
            .map(|k| 1.0 + 0.5 * (TAU * (x0 + k as f64 * H * alpha)).cos())
            .collect();
        let line = SampledFunction::new((k_lo as f64 - 0.5) * H, H, vals).unwrap();
        let direct = ap_constant(&Weight::sampled(line).unwrap(), 2.0, &fam).unwrap();
        assert_abs_diff_eq!(orbit, direct, epsilon = 1e-9);
    }

    #[test]
    fn plateau_in_truncation() {
        let f = SpaceFunction::arc(0.1, 0.3).unwrap();
        let x = Point::circle(0.4);
        for op in [
            LineOperator::default_maximal(),
            LineOperator::hilbert(0.125).unwrap(),
            LineOperator::square(-4, 2).unwrap(),
        ] {
            let t = golden_op(op);
            let base = t.apply(&f, &x).unwrap();
            for a in [t.pad() + t.line_op().semilocal_radius(), 2.0 * t.truncation_a()] {
                assert_eq!(t.with_truncation(a).unwrap().apply(&f, &x).unwrap(), base);
            }
        }
    }
}
