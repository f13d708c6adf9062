//! Compactly supported functions on the real line.
//!
//! A [`SampledFunction`] stores one value per grid cell `[origin + i·h,
//! origin + (i+1)·h)`. The value is the cell average of the generating
//! function (for smooth generators, its value at the cell centre). Integrals
//! treat the function as constant on each cell, which makes integrals of
//! cell-aligned step data exact over arbitrary windows and reduces to the
//! midpoint rule for smooth data. Pointwise evaluation interpolates linearly
//! between cell centres so that stored functions are continuous inside the
//! grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::Weight;

/// Default grid spacing, `2^-10`.
pub const DEFAULT_STEP: f64 = 1.0 / 1024.0;
/// Default half-width of the working domain.
pub const DEFAULT_SUPPORT_RADIUS: f64 = 64.0;

/// A nondegenerate interval `[left, right]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    left: f64,
    right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) || left >= right {
            return Err(Error::invalid(format!(
                "interval needs finite left < right, got [{left}, {right}]"
            )));
        }
        Ok(Interval { left, right })
    }

    /// Interval of the given length centred at `centre`.
    pub fn centred(centre: f64, length: f64) -> Result<Self> {
        Interval::new(centre - 0.5 * length, centre + 0.5 * length)
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }

    pub fn contains(&self, t: f64) -> bool {
        self.left <= t && t <= self.right
    }

    /// Length of the overlap with `[lo, hi]`.
    pub fn overlap(&self, lo: f64, hi: f64) -> f64 {
        (self.right.min(hi) - self.left.max(lo)).max(0.0)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.left.max(other.left);
        let hi = self.right.min(other.right);
        (lo < hi).then_some(Interval { left: lo, right: hi })
    }

    /// Smallest `|t|` over the interval.
    pub fn min_abs(&self) -> f64 {
        if self.left <= 0.0 && self.right >= 0.0 {
            0.0
        } else {
            self.left.abs().min(self.right.abs())
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.left.abs().max(self.right.abs())
    }
}

/// A function on ℝ sampled on a uniform cell grid, zero outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    origin: f64,
    step: f64,
    samples: Vec<f64>,
    support_radius: f64,
}

fn grid_bounds(lo: f64, hi: f64, step: f64) -> Result<(f64, usize)> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid(format!("step must be positive, got {step}")));
    }
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::invalid(format!("empty range [{lo}, {hi}]")));
    }
    let first = (lo / step).floor();
    let last = (hi / step).ceil();
    let len = (last - first).max(1.0) as usize;
    Ok((first * step, len))
}

impl SampledFunction {
    pub fn new(origin: f64, step: f64, samples: Vec<f64>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid(format!("step must be positive, got {step}")));
        }
        if !origin.is_finite() {
            return Err(Error::invalid("origin must be finite"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("a sampled function needs at least one cell"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("samples must be finite"));
        }
        let mut f = SampledFunction {
            origin,
            step,
            samples,
            support_radius: 0.0,
        };
        f.support_radius = f.support().map_or(0.0, |s| s.max_abs());
        Ok(f)
    }

    pub fn zeros(origin: f64, step: f64, len: usize) -> Result<Self> {
        Self::new(origin, step, vec![0.0; len.max(1)])
    }

    /// Grid aligned to multiples of `step` covering `[lo, hi]`; each cell gets
    /// `cell_value(cell_lo, cell_hi)`.
    pub fn from_cells(
        lo: f64,
        hi: f64,
        step: f64,
        cell_value: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let (origin, len) = grid_bounds(lo, hi, step)?;
        let samples = (0..len)
            .map(|i| {
                let a = origin + i as f64 * step;
                cell_value(a, a + step)
            })
            .collect();
        Self::new(origin, step, samples)
    }

    /// Samples `f` at cell centres over a grid covering `[lo, hi]`.
    pub fn from_midpoints(lo: f64, hi: f64, step: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_cells(lo, hi, step, |a, b| f(0.5 * (a + b)))
    }

    /// Indicator of `[a, b]`; cells cut by an endpoint carry the covered fraction.
    pub fn indicator(a: f64, b: f64, step: f64) -> Result<Self> {
        Self::constant(1.0, a, b, step)
    }

    pub fn constant(c: f64, a: f64, b: f64, step: f64) -> Result<Self> {
        let support = Interval::new(a, b)?;
        Self::from_cells(a, b, step, |lo, hi| c * support.overlap(lo, hi) / (hi - lo))
    }

    /// Tent of height 1 centred at `c` with half-width `r`.
    pub fn tent(c: f64, r: f64, step: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::invalid(format!("tent radius must be positive, got {r}")));
        }
        Self::from_midpoints(c - r, c + r, step, |t| (1.0 - (t - c).abs() / r).max(0.0))
    }

    /// `values.len()` equal steps spanning `[a, b]`.
    pub fn steps(values: &[f64], a: f64, b: f64, step: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("steps needs at least one value"));
        }
        let support = Interval::new(a, b)?;
        let width = support.length() / values.len() as f64;
        Self::from_cells(a, b, step, |lo, hi| {
            let mut acc = 0.0;
            for (k, v) in values.iter().enumerate() {
                let piece_lo = a + k as f64 * width;
                let piece_hi = if k + 1 == values.len() { b } else { piece_lo + width };
                acc += v * (hi.min(piece_hi) - lo.max(piece_lo)).max(0.0);
            }
            acc / (hi - lo)
        })
    }

    /// `cos(2πk t)` restricted to `[a, b]`.
    pub fn cosine(k: f64, a: f64, b: f64, step: f64) -> Result<Self> {
        let support = Interval::new(a, b)?;
        Self::from_cells(a, b, step, |lo, hi| {
            let cover = support.overlap(lo, hi) / (hi - lo);
            cover * (2.0 * std::f64::consts::PI * k * 0.5 * (lo + hi)).cos()
        })
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Every sample outside `[-support_radius, support_radius]` is zero.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Right edge of the last cell.
    pub fn end(&self) -> f64 {
        self.origin + self.samples.len() as f64 * self.step
    }

    pub fn domain(&self) -> Interval {
        Interval {
            left: self.origin,
            right: self.end(),
        }
    }

    pub fn cell(&self, i: usize) -> (f64, f64) {
        let lo = self.origin + i as f64 * self.step;
        (lo, self.origin + (i + 1) as f64 * self.step)
    }

    pub fn centre(&self, i: usize) -> f64 {
        self.origin + (i as f64 + 0.5) * self.step
    }

    /// Index of the cell containing `t`, if any.
    pub fn cell_index(&self, t: f64) -> Option<usize> {
        let u = ((t - self.origin) / self.step).floor();
        (u >= 0.0 && (u as usize) < self.samples.len()).then_some(u as usize)
    }

    /// Linear interpolation between cell centres; exactly 0 outside them.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.samples.len();
        let first = self.centre(0);
        let u = (t - first) / self.step;
        if !(u >= 0.0) || u > (n - 1) as f64 {
            return 0.0;
        }
        let i = u.floor() as usize;
        if i + 1 >= n {
            return self.samples[n - 1];
        }
        let frac = u - i as f64;
        self.samples[i] + frac * (self.samples[i + 1] - self.samples[i])
    }

    /// Visits `(overlap, sample)` for every cell meeting `[lo, hi]` in positive length.
    pub(crate) fn for_each_overlap(&self, lo: f64, hi: f64, mut visit: impl FnMut(f64, f64)) {
        if !(hi > lo) {
            return;
        }
        let n = self.samples.len() as f64;
        let i0 = ((lo - self.origin) / self.step).floor().clamp(0.0, n) as usize;
        let i1 = ((hi - self.origin) / self.step).ceil().clamp(0.0, n) as usize;
        for i in i0..i1 {
            let (cl, ch) = self.cell(i);
            let ov = hi.min(ch) - lo.max(cl);
            if ov > 0.0 {
                visit(ov, self.samples[i]);
            }
        }
    }

    /// Sum of `overlap · g(sample)` over cells meeting `[lo, hi]`.
    fn overlap_sum(&self, lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        self.for_each_overlap(lo, hi, |ov, v| acc += ov * g(v));
        acc
    }

    /// `∫_I f(t) dt` with the cellwise-constant rule.
    pub fn integrate(&self, interval: Interval) -> f64 {
        self.integrate_between(interval.left, interval.right)
    }

    /// Like [`integrate`](Self::integrate) but tolerates `hi <= lo` (gives 0).
    pub fn integrate_between(&self, lo: f64, hi: f64) -> f64 {
        self.overlap_sum(lo, hi, |v| v)
    }

    pub fn integrate_abs_between(&self, lo: f64, hi: f64) -> f64 {
        self.overlap_sum(lo, hi, f64::abs)
    }

    /// Hull of the cells holding nonzero samples.
    pub fn support(&self) -> Option<Interval> {
        let first = self.samples.iter().position(|v| *v != 0.0)?;
        let last = self.samples.iter().rposition(|v| *v != 0.0)?;
        Some(Interval {
            left: self.cell(first).0,
            right: self.cell(last).1,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.origin, self.step, self.samples.iter().map(|v| op(*v)).collect())
    }

    /// Sample-wise map that also sees the cell index; must keep values finite.
    pub fn map_indexed(&self, op: impl Fn(usize, f64) -> f64) -> Self {
        let mut out = self.clone();
        out.samples.iter_mut().enumerate().for_each(|(i, v)| *v = op(i, *v));
        out.support_radius = out.support().map_or(0.0, |s| s.max_abs());
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.samples.iter_mut().for_each(|v| *v *= c);
        out.support_radius = out.support().map_or(0.0, |s| s.max_abs());
        out
    }

    pub fn abs(&self) -> Self {
        let mut out = self.clone();
        out.samples.iter_mut().for_each(|v| *v = v.abs());
        out
    }

    /// `t ↦ f(t - tau)`.
    pub fn shifted(&self, tau: f64) -> Self {
        let mut out = self.clone();
        out.origin += tau;
        out.support_radius = out.support().map_or(0.0, |s| s.max_abs());
        out
    }

    /// Cell offset of `other`'s grid relative to this one, if the grids align.
    pub fn grid_offset(&self, other: &SampledFunction) -> Result<isize> {
        if self.step != other.step {
            return Err(Error::GridMismatch(format!(
                "steps differ: {} vs {}",
                self.step, other.step
            )));
        }
        let off = (other.origin - self.origin) / self.step;
        if (off - off.round()).abs() > 1e-9 {
            return Err(Error::GridMismatch(format!(
                "origins {} and {} are not a whole number of cells apart",
                self.origin, other.origin
            )));
        }
        Ok(off.round() as isize)
    }

    /// Pointwise combination over the union of both grids.
    pub fn zip_with(&self, other: &SampledFunction, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let off = self.grid_offset(other)?;
        let start = 0.min(off);
        let stop = (self.len() as isize).max(off + other.len() as isize);
        let get = |f: &SampledFunction, i: isize| -> f64 {
            if i >= 0 && (i as usize) < f.len() {
                f.samples[i as usize]
            } else {
                0.0
            }
        };
        let samples = (start..stop)
            .map(|i| op(get(self, i), get(other, i - off)))
            .collect();
        Self::new(self.origin + start as f64 * self.step, self.step, samples)
    }

    /// Running integral in cell units, for O(1) window integrals.
    pub fn cumulative(&self, absolute: bool) -> Cumulative {
        let mut cum = Vec::with_capacity(self.len() + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        let values: Vec<f64> = if absolute {
            self.samples.iter().map(|v| v.abs()).collect()
        } else {
            self.samples.clone()
        };
        for v in &values {
            acc += v;
            cum.push(acc);
        }
        Cumulative { cum, values }
    }
}

/// Prefix sums of a sampled function, indexed in cell units from its origin.
#[derive(Debug, Clone)]
pub struct Cumulative {
    cum: Vec<f64>,
    values: Vec<f64>,
}

impl Cumulative {
    /// `∫_{origin}^{origin + u·h} f / h`.
    pub fn at(&self, u: f64) -> f64 {
        let n = self.values.len();
        if u <= 0.0 {
            return 0.0;
        }
        if u >= n as f64 {
            return self.cum[n];
        }
        let i = u.floor() as usize;
        self.cum[i] + (u - i as f64) * self.values[i]
    }

    /// Integral over `[u0, u1]` in cell units (multiply by `h` for the integral).
    pub fn between(&self, u0: f64, u1: f64) -> f64 {
        self.at(u1) - self.at(u0)
    }
}

/// `(∫ |f|^p w)^{1/p}`.
pub fn lp_norm_weighted(f: &SampledFunction, w: &Weight, p: f64) -> f64 {
    lp_norm_weighted_on(f, w, p, None)
}

/// `(∫_I |f|^p w)^{1/p}`, or over the whole line when `window` is `None`.
pub fn lp_norm_weighted_on(f: &SampledFunction, w: &Weight, p: f64, window: Option<Interval>) -> f64 {
    assert!(p >= 1.0, "p must be at least 1");
    let mut acc = 0.0;
    for (i, v) in f.samples().iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        if let Some(mass) = cell_mass(f, i, w, window) {
            acc += v.abs().powf(p) * mass;
        }
    }
    acc.powf(1.0 / p)
}

fn cell_mass(f: &SampledFunction, i: usize, w: &Weight, window: Option<Interval>) -> Option<f64> {
    let (lo, hi) = f.cell(i);
    let (lo, hi) = match window {
        Some(win) => (lo.max(win.left()), hi.min(win.right())),
        None => (lo, hi),
    };
    (hi > lo).then(|| w.integral_between(lo, hi))
}

/// `w({t : |f(t)| > λ})`, deciding membership by each cell's value.
pub fn distribution_weighted(f: &SampledFunction, w: &Weight, lambda: f64) -> f64 {
    distribution_weighted_on(f, w, lambda, None)
}

pub fn distribution_weighted_on(
    f: &SampledFunction,
    w: &Weight,
    lambda: f64,
    window: Option<Interval>,
) -> f64 {
    f.samples()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > lambda)
        .filter_map(|(i, _)| cell_mass(f, i, w, window))
        .sum()
}
