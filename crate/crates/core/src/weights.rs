//! Weights on the line and the Muckenhoupt-type constants `A_p`, `A_1`, `A_∞`.
//!
//! Symbolic weights (constant, clipped power, piecewise constant) are
//! integrated in closed form; sampled weights use the same cellwise-constant
//! rule as [`SampledFunction`], backed by prefix sums so that sweeping a large
//! interval family costs O(1) per interval.

use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sampled_line::{Cumulative, Interval, SampledFunction};

/// Clip radius used for singular power weights when none is given, `2^-20`.
pub const DEFAULT_POWER_FLOOR: f64 = 1.0 / 1_048_576.0;

/// A nonnegative, locally integrable weight on ℝ.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Constant(f64),
    /// `max(|t|, floor)^alpha`, or `|t|^alpha` when `floor == 0`.
    Power { alpha: f64, floor: f64 },
    /// Listed values on disjoint intervals, 1 elsewhere.
    Piecewise(Vec<(Interval, f64)>),
    /// Cellwise-constant samples, 0 outside the grid.
    Sampled(SampledFunction),
    Scaled { factor: f64, inner: Box<Weight> },
}

impl Weight {
    /// The unweighted case.
    pub fn unit() -> Self {
        Weight::Constant(1.0)
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("constant weight must be >= 0, got {c}")));
        }
        Ok(Weight::Constant(c))
    }

    pub fn power(alpha: f64, floor: f64) -> Result<Self> {
        if !alpha.is_finite() || !(floor >= 0.0 && floor.is_finite()) {
            return Err(Error::invalid(format!("bad power weight ({alpha}, {floor})")));
        }
        if alpha <= -1.0 && floor == 0.0 {
            return Err(Error::invalid(format!(
                "|t|^{alpha} is not locally integrable; give a positive floor"
            )));
        }
        Ok(Weight::Power { alpha, floor })
    }

    pub fn piecewise(mut pieces: Vec<(Interval, f64)>) -> Result<Self> {
        if pieces.iter().any(|(_, v)| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid("piecewise weight values must be >= 0"));
        }
        pieces.sort_by(|a, b| a.0.left().total_cmp(&b.0.left()));
        for pair in pieces.windows(2) {
            if pair[0].0.right() > pair[1].0.left() {
                return Err(Error::invalid("piecewise weight intervals overlap"));
            }
        }
        Ok(Weight::Piecewise(pieces))
    }

    pub fn sampled(f: SampledFunction) -> Result<Self> {
        if f.samples().iter().any(|v| *v < 0.0) {
            return Err(Error::invalid("sampled weight has negative values"));
        }
        Ok(Weight::Sampled(f))
    }

    pub fn scaled(self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid(format!("scale factor must be > 0, got {factor}")));
        }
        Ok(Weight::Scaled {
            factor,
            inner: Box::new(self),
        })
    }

    /// Literal form, as accepted by the config grammar where one exists.
    pub fn descriptor(&self) -> String {
        match self {
            Weight::Constant(c) => format!("const {c}"),
            Weight::Power { alpha, floor } => format!("power {alpha} {floor}"),
            Weight::Piecewise(pieces) => {
                let body: Vec<String> = pieces
                    .iter()
                    .map(|(i, v)| format!("({},{},{})", i.left(), i.right(), v))
                    .collect();
                format!("piecewise {}", body.join(";"))
            }
            Weight::Sampled(f) => format!("sampled {}x{}@{}", f.len(), f.step(), f.origin()),
            Weight::Scaled { factor, inner } => format!("{factor} * ({})", inner.descriptor()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Weight::Constant(c) => *c,
            Weight::Power { alpha, floor } => radial(*alpha, *floor, t.abs()),
            Weight::Piecewise(pieces) => pieces
                .iter()
                .find(|(i, _)| i.contains(t))
                .map_or(1.0, |(_, v)| *v),
            Weight::Sampled(f) => f.eval(t),
            Weight::Scaled { factor, inner } => factor * inner.eval(t),
        }
    }

    /// `∫_lo^hi w`; `+∞` if divergent, 0 when `hi <= lo`.
    pub fn integral_between(&self, lo: f64, hi: f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        self.integral_pow_between(1.0, lo, hi).unwrap_or(f64::INFINITY)
    }

    /// `∫_I w^q`, `None` when the integral diverges.
    pub fn integral_pow(&self, q: f64, interval: Interval) -> Option<f64> {
        self.integral_pow_between(q, interval.left(), interval.right())
    }

    fn integral_pow_between(&self, q: f64, lo: f64, hi: f64) -> Option<f64> {
        match self {
            Weight::Constant(c) => {
                let v = c.powf(q);
                v.is_finite().then_some(v * (hi - lo))
            }
            Weight::Power { alpha, floor } => power_integral(alpha * q, *floor, lo, hi),
            Weight::Piecewise(pieces) => {
                let mut covered = 0.0;
                let mut acc = 0.0;
                for (piece, v) in pieces {
                    let ov = piece.overlap(lo, hi);
                    if ov > 0.0 {
                        let vq = v.powf(q);
                        if !vq.is_finite() {
                            return None;
                        }
                        acc += vq * ov;
                        covered += ov;
                    }
                }
                Some(acc + ((hi - lo) - covered).max(0.0))
            }
            Weight::Sampled(f) => {
                let mut acc = 0.0;
                let dom = f.domain();
                let outside = (hi - lo) - dom.overlap(lo, hi);
                if outside > 0.0 && q < 0.0 {
                    return None;
                }
                if outside > 0.0 && q == 0.0 {
                    acc += outside;
                }
                let mut finite = true;
                f.for_each_overlap(lo, hi, |ov, v| {
                    let vq = v.powf(q);
                    finite &= vq.is_finite();
                    acc += ov * vq;
                });
                finite.then_some(acc)
            }
            Weight::Scaled { factor, inner } => inner
                .integral_pow_between(q, lo, hi)
                .map(|v| factor.powf(q) * v),
        }
    }

    /// `(1/|I|) ∫_I w^q`.
    pub fn average_pow(&self, q: f64, interval: Interval) -> Option<f64> {
        match self {
            Weight::Constant(c) => {
                let v = c.powf(q);
                v.is_finite().then_some(v)
            }
            Weight::Scaled { factor, inner } => {
                inner.average_pow(q, interval).map(|v| factor.powf(q) * v)
            }
            _ => self.integral_pow(q, interval).map(|v| v / interval.length()),
        }
    }

    /// Infimum over `I` (exact for symbolic kinds, grid minimum for sampled).
    pub fn infimum(&self, interval: Interval) -> f64 {
        match self {
            Weight::Constant(c) => *c,
            Weight::Power { alpha, floor } => {
                let s = if *alpha >= 0.0 {
                    interval.min_abs()
                } else {
                    interval.max_abs()
                };
                radial(*alpha, *floor, s)
            }
            Weight::Piecewise(pieces) => {
                let mut covered = 0.0;
                let mut m = f64::INFINITY;
                for (piece, v) in pieces {
                    let ov = piece.overlap(interval.left(), interval.right());
                    if ov > 0.0 {
                        covered += ov;
                        m = m.min(*v);
                    }
                }
                if covered < interval.length() {
                    m = m.min(1.0);
                }
                m
            }
            Weight::Sampled(f) => {
                let dom = f.domain();
                if dom.overlap(interval.left(), interval.right()) < interval.length() {
                    return 0.0;
                }
                let mut m = f64::INFINITY;
                f.for_each_overlap(interval.left(), interval.right(), |_, v| m = m.min(v));
                m
            }
            Weight::Scaled { factor, inner } => factor * inner.infimum(interval),
        }
    }

    /// Whether `w` is a.e. constant on `I` (sampled kinds handled by the evaluator).
    fn is_constant_on(&self, interval: Interval) -> bool {
        match self {
            Weight::Constant(_) => true,
            Weight::Power { alpha, floor } => {
                *alpha == 0.0 || interval.max_abs() <= *floor
            }
            Weight::Piecewise(pieces) => {
                let mut covered = 0.0;
                let mut value: Option<f64> = None;
                for (piece, v) in pieces {
                    let ov = piece.overlap(interval.left(), interval.right());
                    if ov > 0.0 {
                        covered += ov;
                        match value {
                            Some(prev) if prev != *v => return false,
                            _ => value = Some(*v),
                        }
                    }
                }
                if covered < interval.length() {
                    value.is_none_or(|v| v == 1.0)
                } else {
                    true
                }
            }
            Weight::Sampled(_) => false,
            Weight::Scaled { inner, .. } => inner.is_constant_on(interval),
        }
    }

    /// Strips positive scale factors; every constant computed here is scale free.
    fn unscaled(&self) -> &Weight {
        match self {
            Weight::Scaled { inner, .. } => inner.unscaled(),
            w => w,
        }
    }
}

fn radial(alpha: f64, floor: f64, s: f64) -> f64 {
    if floor > 0.0 {
        s.max(floor).powf(alpha)
    } else {
        s.powf(alpha)
    }
}

/// `∫_0^r g(s) ds` with `g(s) = max(s, floor)^beta` (or `s^beta` without floor).
fn radial_integral(beta: f64, floor: f64, r: f64) -> Option<f64> {
    if r <= 0.0 {
        return Some(0.0);
    }
    if floor > 0.0 {
        if r <= floor {
            return Some(r * floor.powf(beta));
        }
        let tail = if beta == -1.0 {
            (r / floor).ln()
        } else {
            (r.powf(beta + 1.0) - floor.powf(beta + 1.0)) / (beta + 1.0)
        };
        Some(floor.powf(beta + 1.0) + tail)
    } else if beta > -1.0 {
        Some(r.powf(beta + 1.0) / (beta + 1.0))
    } else {
        None
    }
}

fn power_integral(beta: f64, floor: f64, lo: f64, hi: f64) -> Option<f64> {
    if beta == 0.0 {
        return Some(hi - lo);
    }
    if lo >= 0.0 {
        Some(radial_integral(beta, floor, hi)? - radial_integral(beta, floor, lo)?)
    } else if hi <= 0.0 {
        Some(radial_integral(beta, floor, -lo)? - radial_integral(beta, floor, -hi)?)
    } else {
        Some(radial_integral(beta, floor, -lo)? + radial_integral(beta, floor, hi)?)
    }
}

/// Finite surrogate for "all intervals": every `[c - L/2, c + L/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalFamily {
    centers: Vec<f64>,
    lengths: Vec<f64>,
}

impl IntervalFamily {
    pub fn new(centers: Vec<f64>, lengths: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || lengths.is_empty() {
            return Err(Error::invalid("interval family must be nonempty"));
        }
        if lengths.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::invalid("interval lengths must be positive"));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("interval centres must be finite"));
        }
        Ok(IntervalFamily { centers, lengths })
    }

    /// Lengths `2^k` for `k` in `[k_lo, k_hi]`, centres every `center_step`
    /// over `[-radius, radius]`.
    pub fn dyadic(k_lo: i32, k_hi: i32, center_step: f64, radius: f64) -> Result<Self> {
        if k_lo > k_hi || !(center_step > 0.0) || !(radius >= 0.0) {
            return Err(Error::invalid("bad dyadic family parameters"));
        }
        let n = (radius / center_step).floor() as i64;
        let centers = (-n..=n).map(|i| i as f64 * center_step).collect();
        let lengths = (k_lo..=k_hi).map(|k| 2f64.powi(k)).collect();
        Self::new(centers, lengths)
    }

    /// Lengths `2^-8 .. 2^6`, centres on a quarter grid over `[-radius, radius]`.
    pub fn default_for(radius: f64) -> Self {
        Self::dyadic(-8, 6, 0.25, radius).expect("default family parameters are valid")
    }

    /// Intervals `[-2^{k-1}, 2^{k-1}]` centred at the origin.
    pub fn symmetric(k_lo: i32, k_hi: i32) -> Result<Self> {
        if k_lo > k_hi {
            return Err(Error::invalid("bad symmetric family parameters"));
        }
        Self::new(vec![0.0], (k_lo..=k_hi).map(|k| 2f64.powi(k)).collect())
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.centers.len() * self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn intervals(&self) -> impl Iterator<Item = Interval> + '_ {
        self.centers.iter().flat_map(move |c| {
            self.lengths
                .iter()
                .map(move |l| Interval::centred(*c, *l).expect("validated family"))
        })
    }

    /// Convex hull of all member intervals.
    pub fn hull(&self) -> Interval {
        let lmax = self.lengths.iter().cloned().fold(0.0, f64::max);
        let cmin = self.centers.iter().cloned().fold(f64::INFINITY, f64::min);
        let cmax = self.centers.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(cmin - 0.5 * lmax, cmax + 0.5 * lmax).expect("validated family")
    }

    /// The union of two families' centre and length sets.
    pub fn merged(&self, other: &IntervalFamily) -> IntervalFamily {
        let mut centers = self.centers.clone();
        centers.extend(other.centers.iter().filter(|c| !self.centers.contains(c)));
        let mut lengths = self.lengths.clone();
        lengths.extend(other.lengths.iter().filter(|l| !self.lengths.contains(l)));
        IntervalFamily { centers, lengths }
    }
}

/// Interval averages backed by prefix sums over a sampled weight.
struct SampledAverager<'a> {
    f: &'a SampledFunction,
    plain: Cumulative,
    dual: Cumulative,
    zeros: Vec<u32>,
    changes: Vec<u32>,
}

impl<'a> SampledAverager<'a> {
    fn new(f: &'a SampledFunction, q: f64) -> Self {
        let plain = f.cumulative(false);
        let dual_vals: Vec<f64> = f
            .samples()
            .iter()
            .map(|v| if *v > 0.0 { v.powf(q) } else { 0.0 })
            .collect();
        let dual = SampledFunction::new(f.origin(), f.step(), dual_vals)
            .expect("finite dual samples")
            .cumulative(false);
        let mut zeros = vec![0u32; f.len() + 1];
        let mut changes = vec![0u32; f.len() + 1];
        for (i, v) in f.samples().iter().enumerate() {
            zeros[i + 1] = zeros[i] + u32::from(*v <= 0.0);
            let changed = i > 0 && f.samples()[i - 1] != *v;
            changes[i + 1] = changes[i] + u32::from(changed);
        }
        SampledAverager {
            f,
            plain,
            dual,
            zeros,
            changes,
        }
    }

    fn ap_product(&self, interval: Interval, p: f64) -> Result<f64> {
        let h = self.f.step();
        let u0 = (interval.left() - self.f.origin()) / h;
        let u1 = (interval.right() - self.f.origin()) / h;
        let n = self.f.len() as f64;
        if u0 < 0.0 || u1 > n {
            return Err(Error::NonIntegrableDual(interval));
        }
        let i0 = u0.floor() as usize;
        let i1 = (u1.ceil() as usize).max(i0 + 1).min(self.f.len());
        if self.zeros[i1] - self.zeros[i0] > 0 {
            return Err(Error::NonIntegrableDual(interval));
        }
        if self.changes[i1] - self.changes[i0 + 1] == 0 {
            return Ok(1.0);
        }
        let cells = u1 - u0;
        let avg = self.plain.between(u0, u1) / cells;
        let avg_dual = self.dual.between(u0, u1) / cells;
        Ok(avg * avg_dual.powf(p - 1.0))
    }
}

fn symbolic_ap_product(w: &Weight, interval: Interval, p: f64) -> Result<f64> {
    if w.is_constant_on(interval) {
        return Ok(1.0);
    }
    let q = -1.0 / (p - 1.0);
    let avg = w
        .average_pow(1.0, interval)
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::invalid("weight is not integrable on the interval"))?;
    let dual = w
        .average_pow(q, interval)
        .filter(|v| v.is_finite())
        .ok_or(Error::NonIntegrableDual(interval))?;
    Ok(avg * dual.powf(p - 1.0))
}

/// `A_p` products `⟨w⟩_I ⟨w^{-1/(p-1)}⟩_I^{p-1}` for every interval of the family.
pub fn ap_products(w: &Weight, p: f64, family: &IntervalFamily) -> Result<Vec<(Interval, f64)>> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("A_p needs 1 < p < ∞, got {p}")));
    }
    let w = w.unscaled();
    match w {
        Weight::Sampled(f) => {
            let avg = SampledAverager::new(f, -1.0 / (p - 1.0));
            family
                .intervals()
                .map(|i| avg.ap_product(i, p).map(|v| (i, v)))
                .collect()
        }
        _ => family
            .intervals()
            .map(|i| symbolic_ap_product(w, i, p).map(|v| (i, v)))
            .collect(),
    }
}

/// `sup_I ⟨w⟩_I ⟨w^{-1/(p-1)}⟩_I^{p-1}` over the family.
pub fn ap_constant(w: &Weight, p: f64, family: &IntervalFamily) -> Result<f64> {
    Ok(ap_products(w, p, family)?
        .into_iter()
        .fold(0.0, |m, (_, v)| m.max(v)))
}

/// Sparse table for O(1) range minima over sampled weights.
struct RangeMin {
    levels: Vec<Vec<f64>>,
}

impl RangeMin {
    fn new(values: &[f64]) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = levels.last().expect("nonempty");
            let next: Vec<f64> = (0..=values.len() - 2 * width)
                .map(|i| prev[i].min(prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        RangeMin { levels }
    }

    /// Minimum over `[i0, i1)`.
    fn min(&self, i0: usize, i1: usize) -> f64 {
        let len = i1 - i0;
        let k = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let w = 1 << k;
        self.levels[k][i0].min(self.levels[k][i1 - w])
    }
}

/// `sup_I ⟨w⟩_I / essinf_I w` over the family (grid minimum for sampled weights).
pub fn a1_constant(w: &Weight, family: &IntervalFamily) -> Result<f64> {
    let w = w.unscaled();
    let mut best: f64 = 0.0;
    match w {
        Weight::Sampled(f) => {
            let table = RangeMin::new(f.samples());
            let cum = f.cumulative(false);
            let h = f.step();
            for i in family.intervals() {
                let u0 = (i.left() - f.origin()) / h;
                let u1 = (i.right() - f.origin()) / h;
                if u0 < 0.0 || u1 > f.len() as f64 {
                    return Err(Error::ZeroInfimum(i));
                }
                let i0 = u0.floor() as usize;
                let i1 = (u1.ceil() as usize).max(i0 + 1).min(f.len());
                let m = table.min(i0, i1);
                if !(m > 0.0) {
                    return Err(Error::ZeroInfimum(i));
                }
                best = best.max(cum.between(u0, u1) / (u1 - u0) / m);
            }
        }
        _ => {
            for i in family.intervals() {
                if w.is_constant_on(i) {
                    best = best.max(1.0);
                    continue;
                }
                let m = w.infimum(i);
                if !(m > 0.0) {
                    return Err(Error::ZeroInfimum(i));
                }
                let avg = w.average_pow(1.0, i).unwrap_or(f64::INFINITY);
                best = best.max(avg / m);
            }
        }
    }
    Ok(best)
}

/// Outcome of an empirical `A_∞` test on one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AInftyEstimate {
    /// `1 - max_E w(E)/w(I)`.
    pub epsilon: f64,
    pub holds: bool,
}

/// Checks `|E| < δ|I| ⟹ w(E) < (1-ε) w(I)` over the supplied subsets of `I`,
/// each given as a union of disjoint intervals.
pub fn a_infty_check(
    w: &Weight,
    interval: Interval,
    delta: f64,
    subsets: &[Vec<Interval>],
) -> Result<AInftyEstimate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    if subsets.is_empty() {
        return Err(Error::EmptySubsetFamily);
    }
    let total = w.integral_between(interval.left(), interval.right());
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::invalid("w(I) must be positive and finite"));
    }
    let mut worst: f64 = 0.0;
    for (k, subset) in subsets.iter().enumerate() {
        let mut measure = 0.0;
        let mut mass = 0.0;
        for piece in subset {
            if piece.left() < interval.left() || piece.right() > interval.right() {
                return Err(Error::InvalidSubset(format!("subset {k} leaves I")));
            }
            measure += piece.length();
            mass += w.integral_between(piece.left(), piece.right());
        }
        if measure >= delta * interval.length() {
            return Err(Error::InvalidSubset(format!(
                "subset {k} has measure {measure} >= delta |I|"
            )));
        }
        worst = worst.max(mass / total);
    }
    let epsilon = 1.0 - worst;
    Ok(AInftyEstimate {
        epsilon,
        holds: epsilon > 0.0,
    })
}

/// Random unions of grid cells plus slivers around the weight's maximum.
pub fn default_a_infty_subsets(
    w: &Weight,
    interval: Interval,
    delta: f64,
    cells: usize,
    random_subsets: usize,
    seed: u64,
) -> Result<Vec<Vec<Interval>>> {
    if cells < 4 {
        return Err(Error::invalid("need at least 4 cells"));
    }
    let width = interval.length() / cells as f64;
    let cell = |i: usize| {
        Interval::new(
            interval.left() + i as f64 * width,
            interval.left() + (i + 1) as f64 * width,
        )
        .expect("positive width")
    };
    // cells strictly fewer than delta * cells
    let budget = ((delta * cells as f64).ceil() as usize).saturating_sub(1);
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if budget > 0 {
        for _ in 0..random_subsets {
            let mut picked = sample_indices(&mut rng, cells, budget).into_vec();
            picked.sort_unstable();
            out.push(merge_cells(&picked, &cell));
        }
    }
    // the cell carrying the most mass, grown symmetrically
    let peak = (0..cells)
        .max_by(|a, b| {
            let ma = w.integral_between(cell(*a).left(), cell(*a).right());
            let mb = w.integral_between(cell(*b).left(), cell(*b).right());
            ma.total_cmp(&mb)
        })
        .expect("cells > 0");
    let centre = 0.5 * (cell(peak).left() + cell(peak).right());
    let max_len = delta * interval.length();
    for k in 1..=8 {
        let len = max_len * 0.5f64.powi(k);
        let mut lo = centre - 0.5 * len;
        let mut hi = centre + 0.5 * len;
        if lo < interval.left() {
            hi += interval.left() - lo;
            lo = interval.left();
        }
        if hi > interval.right() {
            lo -= hi - interval.right();
            hi = interval.right();
        }
        out.push(vec![Interval::new(lo.max(interval.left()), hi)?]);
    }
    Ok(out)
}

fn merge_cells(sorted: &[usize], cell: &impl Fn(usize) -> Interval) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::new();
    let mut run_start = sorted[0];
    let mut prev = sorted[0];
    for &i in &sorted[1..] {
        if i != prev + 1 {
            out.push(Interval::new(cell(run_start).left(), cell(prev).right()).expect("run"));
            run_start = i;
        }
        prev = i;
    }
    out.push(Interval::new(cell(run_start).left(), cell(prev).right()).expect("run"));
    out
}
