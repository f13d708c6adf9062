//! Measure-preserving flows on the circle and the 2-torus, and orbit traces.
//!
//! Points are stored in 64-bit fixed point (`x = X / 2^64`) and time is
//! quantized to ticks of `2^-24`. A rate `α` becomes the integer
//! `R = round(α · 2^40)`, so `U^t x` is `X + ticks(t) · R` with wrapping
//! arithmetic. Composition is then exact: `U^{t+s} = U^t ∘ U^s` bit for bit
//! whenever `t` and `s` are whole ticks.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampled_line::SampledFunction;

const TWO_64: f64 = 18_446_744_073_709_551_616.0;
/// Ticks per unit time.
pub const TICKS_PER_UNIT: f64 = (1u64 << 24) as f64;
/// Rate units per unit of `α`.
pub const RATE_UNITS: f64 = (1u64 << 40) as f64;

/// A point of the circle `[0, 1)` in fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Phase(pub u64);

impl Phase {
    pub fn from_f64(x: f64) -> Self {
        let r = x.rem_euclid(1.0);
        let scaled = r * TWO_64;
        if scaled >= TWO_64 {
            Phase(0)
        } else {
            Phase(scaled as u64)
        }
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / TWO_64
    }
}

/// Time in ticks; `t` is rounded to the nearest multiple of `2^-24`.
pub fn ticks(t: f64) -> i64 {
    (t * TICKS_PER_UNIT).round() as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Point {
    Circle(Phase),
    Torus(Phase, Phase),
}

impl Point {
    pub fn circle(x: f64) -> Self {
        Point::Circle(Phase::from_f64(x))
    }

    pub fn torus(x: f64, y: f64) -> Self {
        Point::Torus(Phase::from_f64(x), Phase::from_f64(y))
    }

    pub fn coords(&self) -> Vec<f64> {
        match self {
            Point::Circle(x) => vec![x.to_f64()],
            Point::Torus(x, y) => vec![x.to_f64(), y.to_f64()],
        }
    }

    /// First coordinate.
    pub fn x(&self) -> Phase {
        match self {
            Point::Circle(x) | Point::Torus(x, _) => *x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flow {
    /// `U^t x = x + tα mod 1`.
    Circle { alpha: f64, rate: i64 },
    /// `U^t (x, y) = (x + tα1, y + tα2) mod 1`.
    Torus {
        alpha1: f64,
        alpha2: f64,
        rate1: i64,
        rate2: i64,
    },
}

fn quantize_rate(alpha: f64) -> Result<i64> {
    if !alpha.is_finite() || alpha.abs() >= (1u64 << 22) as f64 {
        return Err(Error::invalid(format!("flow rate {alpha} out of range")));
    }
    Ok((alpha * RATE_UNITS).round() as i64)
}

fn shift(x: Phase, t_ticks: i64, rate: i64) -> Phase {
    Phase(x.0.wrapping_add(t_ticks.wrapping_mul(rate) as u64))
}

impl Flow {
    pub fn circle(alpha: f64) -> Result<Self> {
        let rate = quantize_rate(alpha)?;
        Ok(Flow::Circle {
            alpha: rate as f64 / RATE_UNITS,
            rate,
        })
    }

    pub fn torus(alpha1: f64, alpha2: f64) -> Result<Self> {
        let rate1 = quantize_rate(alpha1)?;
        let rate2 = quantize_rate(alpha2)?;
        Ok(Flow::Torus {
            alpha1: rate1 as f64 / RATE_UNITS,
            alpha2: rate2 as f64 / RATE_UNITS,
            rate1,
            rate2,
        })
    }

    /// Rotation by the golden mean `(√5 − 1)/2`.
    pub fn golden() -> Self {
        Flow::circle((5f64.sqrt() - 1.0) / 2.0).expect("valid rate")
    }

    /// `t ↦ U^{-t}`.
    pub fn reversed(&self) -> Self {
        match *self {
            Flow::Circle { alpha, rate } => Flow::Circle {
                alpha: -alpha,
                rate: rate.wrapping_neg(),
            },
            Flow::Torus {
                alpha1,
                alpha2,
                rate1,
                rate2,
            } => Flow::Torus {
                alpha1: -alpha1,
                alpha2: -alpha2,
                rate1: rate1.wrapping_neg(),
                rate2: rate2.wrapping_neg(),
            },
        }
    }

    /// The (quantized) rates.
    pub fn alphas(&self) -> Vec<f64> {
        match self {
            Flow::Circle { alpha, .. } => vec![*alpha],
            Flow::Torus { alpha1, alpha2, .. } => vec![*alpha1, *alpha2],
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Flow::Circle { alpha, .. } => format!("circle {alpha}"),
            Flow::Torus { alpha1, alpha2, .. } => format!("torus {alpha1} {alpha2}"),
        }
    }

    pub fn accepts(&self, x: &Point) -> bool {
        matches!(
            (self, x),
            (Flow::Circle { .. }, Point::Circle(_)) | (Flow::Torus { .. }, Point::Torus(..))
        )
    }

    /// `U^t x`.
    pub fn map(&self, t: f64, x: &Point) -> Result<Point> {
        self.map_ticks(ticks(t), x)
    }

    pub fn map_ticks(&self, t_ticks: i64, x: &Point) -> Result<Point> {
        match (self, x) {
            (Flow::Circle { rate, .. }, Point::Circle(p)) => {
                Ok(Point::Circle(shift(*p, t_ticks, *rate)))
            }
            (Flow::Torus { rate1, rate2, .. }, Point::Torus(p, q)) => Ok(Point::Torus(
                shift(*p, t_ticks, *rate1),
                shift(*q, t_ticks, *rate2),
            )),
            _ => Err(Error::PointMismatch),
        }
    }
}

/// A half-open arc `[start, start + len)` of the circle, in fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub start: Phase,
    /// Length in units of `2^-64`; `2^64` is the whole circle.
    pub len: u128,
}

impl Arc {
    /// `[a, b)`, taken mod 1; `b − a ≥ 1` is the whole circle.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::invalid(format!("arc needs a < b, got [{a}, {b})")));
        }
        let len = if b - a >= 1.0 {
            1u128 << 64
        } else {
            let lo = Phase::from_f64(a).0;
            let hi = Phase::from_f64(b).0;
            hi.wrapping_sub(lo) as u128
        };
        Ok(Arc {
            start: Phase::from_f64(a),
            len,
        })
    }

    pub fn contains(&self, x: Phase) -> bool {
        (x.0.wrapping_sub(self.start.0) as u128) < self.len
    }

    pub fn measure(&self) -> f64 {
        self.len as f64 / TWO_64
    }

    /// The preimage `U^{-t} E` under a circle rotation with the given rate.
    pub fn preimage(&self, t: f64, rate: i64) -> Arc {
        Arc {
            start: shift(self.start, -ticks(t), rate),
            len: self.len,
        }
    }
}

/// A function on the circle or torus.
///
/// One-dimensional variants read the first coordinate of a torus point.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceFunction {
    Constant(f64),
    /// Indicator of an arc.
    Arc(Arc),
    /// `offset + amp · cos(2πk x)`.
    Cosine { k: i32, amp: f64, offset: f64 },
    /// `Σ_j a_j cos(2πjx) + b_j sin(2πjx)`.
    Trig { cos: Vec<f64>, sin: Vec<f64> },
    /// `values[floor(n x)]` over `n` equal arcs.
    Steps(Vec<f64>),
    /// Periodic linear interpolation of values at the nodes `j / n`.
    Grid(Vec<f64>),
    /// Periodic bilinear interpolation on an `n1 × n2` node grid (row-major in `x`).
    Grid2 { n1: usize, n2: usize, values: Vec<f64> },
    /// `f(x) g(y)` on the torus.
    Product(Box<SpaceFunction>, Box<SpaceFunction>),
}

impl SpaceFunction {
    pub fn constant(c: f64) -> Result<Self> {
        finite(c)?;
        Ok(SpaceFunction::Constant(c))
    }

    pub fn arc(a: f64, b: f64) -> Result<Self> {
        Ok(SpaceFunction::Arc(Arc::new(a, b)?))
    }

    pub fn cosine(k: i32, amp: f64, offset: f64) -> Result<Self> {
        finite(amp)?;
        finite(offset)?;
        Ok(SpaceFunction::Cosine { k, amp, offset })
    }

    /// Random trigonometric polynomial of degree `k`, coefficients uniform in
    /// `[-1/j, 1/j]`.
    pub fn random_trig(k: usize, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("random trig polynomial needs degree >= 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cos = Vec::with_capacity(k);
        let mut sin = Vec::with_capacity(k);
        for j in 1..=k {
            let s = 1.0 / j as f64;
            cos.push(rng.gen_range(-s..=s));
            sin.push(rng.gen_range(-s..=s));
        }
        Ok(SpaceFunction::Trig { cos, sin })
    }

    pub fn steps(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("steps needs at least one value"));
        }
        values.iter().try_for_each(|v| finite(*v))?;
        Ok(SpaceFunction::Steps(values))
    }

    pub fn grid(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("grid needs at least one value"));
        }
        values.iter().try_for_each(|v| finite(*v))?;
        Ok(SpaceFunction::Grid(values))
    }

    pub fn grid2(n1: usize, n2: usize, values: Vec<f64>) -> Result<Self> {
        if n1 == 0 || n2 == 0 || values.len() != n1 * n2 {
            return Err(Error::invalid(format!(
                "grid of {n1} x {n2} needs {} values, got {}",
                n1 * n2,
                values.len()
            )));
        }
        values.iter().try_for_each(|v| finite(*v))?;
        Ok(SpaceFunction::Grid2 { n1, n2, values })
    }

    pub fn product(f: SpaceFunction, g: SpaceFunction) -> Self {
        SpaceFunction::Product(Box::new(f), Box::new(g))
    }

    /// Literal form, matching the config grammar.
    pub fn descriptor(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        match self {
            SpaceFunction::Constant(c) => format!("const {c}"),
            SpaceFunction::Arc(a) => {
                let s = a.start.to_f64();
                format!("arc {s} {}", s + a.measure())
            }
            SpaceFunction::Cosine { k, amp, offset } => format!("cosine {k} {amp} {offset}"),
            SpaceFunction::Trig { cos, sin } => format!("trig [{}] [{}]", join(cos), join(sin)),
            SpaceFunction::Steps(v) => format!("steps {}", join(v)),
            SpaceFunction::Grid(v) => format!("grid {}", join(v)),
            SpaceFunction::Grid2 { n1, n2, values } => format!("grid2 {n1} {n2} {}", join(values)),
            SpaceFunction::Product(f, g) => format!("({}) * ({})", f.descriptor(), g.descriptor()),
        }
    }

    pub fn eval(&self, p: &Point) -> f64 {
        match self {
            SpaceFunction::Product(f, g) => match p {
                Point::Torus(x, y) => f.eval_1d(*x) * g.eval_1d(*y),
                Point::Circle(x) => f.eval_1d(*x) * g.eval_1d(Phase(0)),
            },
            SpaceFunction::Grid2 { n1, n2, values } => {
                let (x, y) = match p {
                    Point::Torus(x, y) => (x.to_f64(), y.to_f64()),
                    Point::Circle(x) => (x.to_f64(), 0.0),
                };
                let (i0, fx) = periodic_node(x, *n1);
                let (j0, fy) = periodic_node(y, *n2);
                let at = |i: usize, j: usize| values[(i % n1) * n2 + (j % n2)];
                (1.0 - fx) * ((1.0 - fy) * at(i0, j0) + fy * at(i0, j0 + 1))
                    + fx * ((1.0 - fy) * at(i0 + 1, j0) + fy * at(i0 + 1, j0 + 1))
            }
            _ => self.eval_1d(p.x()),
        }
    }

    fn eval_1d(&self, x: Phase) -> f64 {
        match self {
            SpaceFunction::Constant(c) => *c,
            SpaceFunction::Arc(arc) => {
                if arc.contains(x) {
                    1.0
                } else {
                    0.0
                }
            }
            SpaceFunction::Cosine { k, amp, offset } => {
                offset + amp * (TAU * k_phase(x, *k)).cos()
            }
            SpaceFunction::Trig { cos, sin } => {
                let mut acc = 0.0;
                for (j, (a, b)) in cos.iter().zip(sin).enumerate() {
                    let arg = TAU * k_phase(x, j as i32 + 1);
                    acc += a * arg.cos() + b * arg.sin();
                }
                acc
            }
            SpaceFunction::Steps(values) => {
                let n = values.len();
                let i = ((x.0 as u128 * n as u128) >> 64) as usize;
                values[i.min(n - 1)]
            }
            SpaceFunction::Grid(values) => {
                let n = values.len();
                let (i, frac) = periodic_node(x.to_f64(), n);
                (1.0 - frac) * values[i % n] + frac * values[(i + 1) % n]
            }
            SpaceFunction::Grid2 { .. } | SpaceFunction::Product(..) => {
                self.eval(&Point::Torus(x, Phase(0)))
            }
        }
    }

    /// `inf f` over the space, when it is cheap to know.
    pub fn lower_bound(&self) -> f64 {
        match self {
            SpaceFunction::Constant(c) => *c,
            SpaceFunction::Arc(a) => {
                if a.len >= 1u128 << 64 {
                    1.0
                } else {
                    0.0
                }
            }
            SpaceFunction::Cosine { amp, offset, .. } => offset - amp.abs(),
            SpaceFunction::Trig { cos, sin } => {
                -cos.iter().chain(sin).map(|c| c.abs()).sum::<f64>()
            }
            SpaceFunction::Steps(v) | SpaceFunction::Grid(v) | SpaceFunction::Grid2 { values: v, .. } => {
                v.iter().cloned().fold(f64::INFINITY, f64::min)
            }
            SpaceFunction::Product(f, g) => {
                let (a, b) = (f.lower_bound(), g.lower_bound());
                if a >= 0.0 && b >= 0.0 {
                    a * b
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}

/// `k x mod 1` computed in fixed point, so large `k` loses nothing.
fn k_phase(x: Phase, k: i32) -> f64 {
    Phase(x.0.wrapping_mul(k as i64 as u64)).to_f64()
}

fn periodic_node(x: f64, n: usize) -> (usize, f64) {
    let s = x * n as f64;
    let i = s.floor();
    (i as usize % n, s - i)
}

fn finite(v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("non-finite value {v}")))
    }
}

/// Stratified base points: `(i + 1/2)/n` on the circle, an `m × m` grid with
/// `m = ceil(√n)` on the torus.
pub fn stratified_points(flow: &Flow, n: usize) -> Vec<Point> {
    match flow {
        Flow::Circle { .. } => (0..n)
            .map(|i| Point::circle((i as f64 + 0.5) / n as f64))
            .collect(),
        Flow::Torus { .. } => {
            let m = (n as f64).sqrt().ceil() as usize;
            let mut pts = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    pts.push(Point::torus(
                        (i as f64 + 0.5) / m as f64,
                        (j as f64 + 0.5) / m as f64,
                    ));
                }
            }
            pts
        }
    }
}

/// `t ↦ f(U^t x)` sampled at the nodes `k h` of `[−(a+pad), a+pad]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTrace {
    pub base_point: Point,
    pub truncation_a: f64,
    pub pad: f64,
    trace: SampledFunction,
}

impl OrbitTrace {
    /// `F(·, x)` on the sampled window.
    pub fn trace(&self) -> &SampledFunction {
        &self.trace
    }

    pub fn values(&self) -> &[f64] {
        self.trace.samples()
    }

    /// Cell centres.
    pub fn t_grid(&self) -> Vec<f64> {
        (0..self.trace.len()).map(|i| self.trace.centre(i)).collect()
    }

    /// `F_b(·, x)`: cells with `|centre| ≥ b` set to zero.
    pub fn truncated(&self, b: f64) -> SampledFunction {
        self.trace
            .map_indexed(|i, v| if self.trace.centre(i).abs() < b { v } else { 0.0 })
    }

    /// `F_a`.
    pub fn truncated_a(&self) -> SampledFunction {
        self.truncated(self.truncation_a)
    }
}

fn check_trace_args(a: f64, pad: f64, step: f64) -> Result<()> {
    if !(a > 0.0 && pad >= 0.0 && step > 0.0 && (a + pad).is_finite()) {
        return Err(Error::invalid(format!(
            "orbit sampling needs a > 0, pad >= 0, step > 0 (got a={a}, pad={pad}, step={step})"
        )));
    }
    Ok(())
}

/// `F(t, x)` at the nodes `t = k h`, `k_lo ≤ k < k_hi`, each value held on
/// the cell `[(k − 1/2) h, (k + 1/2) h)`.
pub fn orbit_cells(
    flow: &Flow,
    f: &SpaceFunction,
    x: &Point,
    k_lo: i64,
    k_hi: i64,
    step: f64,
) -> Result<SampledFunction> {
    if !flow.accepts(x) {
        return Err(Error::PointMismatch);
    }
    if k_hi <= k_lo || !(step > 0.0) {
        return Err(Error::invalid(format!("empty orbit window [{k_lo}, {k_hi})")));
    }
    let mut values = Vec::with_capacity((k_hi - k_lo) as usize);
    for k in k_lo..k_hi {
        values.push(f.eval(&flow.map_ticks(ticks(k as f64 * step), x)?));
    }
    SampledFunction::new((k_lo as f64 - 0.5) * step, step, values)
}

/// The trace `F(t, x) = f(U^t x)` on `[−(a+pad), a+pad]`.
pub fn orbit_sample(
    flow: &Flow,
    f: &SpaceFunction,
    x: &Point,
    a: f64,
    pad: f64,
    step: f64,
) -> Result<OrbitTrace> {
    check_trace_args(a, pad, step)?;
    let n_half = ((a + pad) / step).ceil() as i64;
    let trace = orbit_cells(flow, f, x, -n_half, n_half + 1, step)?;
    Ok(OrbitTrace {
        base_point: *x,
        truncation_a: a,
        pad,
        trace,
    })
}

/// `t ↦ w(U^t x)` for a nonnegative `w`.
pub fn weighted_orbit_trace(
    flow: &Flow,
    w: &SpaceFunction,
    x: &Point,
    a: f64,
    pad: f64,
    step: f64,
) -> Result<OrbitTrace> {
    let tr = orbit_sample(flow, w, x, a, pad, step)?;
    if let Some(v) = tr.values().iter().find(|v| **v < 0.0) {
        return Err(Error::invalid(format!("weight takes negative value {v} along the orbit")));
    }
    Ok(tr)
}

/// `max_λ |μ{F(t1,·) > λ} − μ{F(t2,·) > λ}|` over stratified points.
pub fn equimeasurability_check(
    flow: &Flow,
    f: &SpaceFunction,
    t1: f64,
    t2: f64,
    n_points: usize,
    lambdas: &[f64],
) -> Result<f64> {
    if n_points == 0 {
        return Err(Error::invalid("equimeasurability check needs n_points >= 1"));
    }
    let pts = stratified_points(flow, n_points);
    let (k1, k2) = (ticks(t1), ticks(t2));
    let mut v1 = Vec::with_capacity(pts.len());
    let mut v2 = Vec::with_capacity(pts.len());
    for p in &pts {
        v1.push(f.eval(&flow.map_ticks(k1, p)?));
        v2.push(f.eval(&flow.map_ticks(k2, p)?));
    }
    let n = pts.len() as f64;
    Ok(lambdas
        .iter()
        .map(|l| {
            let c1 = v1.iter().filter(|v| **v > *l).count() as f64;
            let c2 = v2.iter().filter(|v| **v > *l).count() as f64;
            (c1 - c2).abs() / n
        })
        .fold(0.0, f64::max))
}
