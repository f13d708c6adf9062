//! Empirical strong and weak type constants for transferred and line
//! operators, and the comparison between the two.
//!
//! Weight placement follows the transfer argument: `w` weighs the output
//! `T♯f`, `v` weighs the input `f`. Swap the descriptors for the other
//! convention. Constants are maxima over finite families, so they are lower
//! bounds on operator norms; only the direction "ergodic ≤ line × slack" is
//! ever asserted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{orbit_cells, Point, SpaceFunction};
use crate::line_operators::LineOperator;
use crate::sampled_line::{distribution_weighted, lp_norm_weighted, SampledFunction};
use crate::transfer::TransferredOperator;
use crate::weights::Weight;

pub const SCHEMA_VERSION: &str = "1";
pub const DEFAULT_TOLERANCE: f64 = 0.05;

/// Named functions on the flow's space.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFamily {
    members: Vec<(String, SpaceFunction)>,
}

impl FunctionFamily {
    pub fn new(members: Vec<(String, SpaceFunction)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("function family is empty"));
        }
        for (i, (id, _)) in members.iter().enumerate() {
            if members[..i].iter().any(|(other, _)| other == id) {
                return Err(Error::invalid(format!("duplicate function id `{id}`")));
            }
        }
        Ok(FunctionFamily { members })
    }

    /// Arcs of three widths, two cosines, the constant 1 and seeded random
    /// steps.
    pub fn standard(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let steps: Vec<f64> = (0..16).map(|_| rng.gen_range(0.0..1.0)).collect();
        let members = vec![
            ("arc_short".to_string(), SpaceFunction::arc(0.0, 1.0 / 64.0).expect("valid")),
            ("arc_eighth".to_string(), SpaceFunction::arc(0.0, 0.125).expect("valid")),
            ("arc_half".to_string(), SpaceFunction::arc(0.25, 0.75).expect("valid")),
            ("cos1".to_string(), SpaceFunction::cosine(1, 1.0, 0.0).expect("valid")),
            ("cos7".to_string(), SpaceFunction::cosine(7, 1.0, 0.5).expect("valid")),
            ("steps".to_string(), SpaceFunction::steps(steps).expect("valid")),
            ("const".to_string(), SpaceFunction::constant(1.0).expect("valid")),
        ];
        FunctionFamily { members }
    }

    pub fn members(&self) -> &[(String, SpaceFunction)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// First `n` members.
    pub fn take(&self, n: usize) -> Result<Self> {
        Self::new(self.members.iter().take(n).cloned().collect())
    }

    pub fn extended(&self, more: Vec<(String, SpaceFunction)>) -> Result<Self> {
        let mut members = self.members.clone();
        members.extend(more);
        Self::new(members)
    }
}

/// Named functions on the line.
#[derive(Debug, Clone, PartialEq)]
pub struct LineFamily {
    members: Vec<(String, SampledFunction)>,
}

impl LineFamily {
    pub fn new(members: Vec<(String, SampledFunction)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("function family is empty"));
        }
        Ok(LineFamily { members })
    }

    /// Indicators, a tent, seeded random steps, a cosine bump and a wide constant.
    pub fn standard(step: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let steps: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Self::new(vec![
            ("chi_unit".into(), SampledFunction::indicator(0.0, 1.0, step)?),
            ("chi_short".into(), SampledFunction::indicator(0.0, 1.0 / 16.0, step)?),
            ("tent".into(), SampledFunction::tent(0.5, 0.5, step)?),
            ("steps".into(), SampledFunction::steps(&steps, -2.0, 2.0, step)?),
            ("cosine".into(), SampledFunction::cosine(3.0, -1.0, 1.0, step)?),
            ("wide".into(), SampledFunction::constant(1.0, -4.0, 4.0, step)?),
        ])
    }

    pub fn members(&self) -> &[(String, SampledFunction)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Strong,
    /// Weight on both sides: `λ w{|T♯f| > λ}^{1/p} / ‖f‖_{L^p(w)}`.
    WeakTwoSided,
    /// Weight on the level set only: `λ w{|T♯f| > λ}^{1/p} / ‖f‖_{L^p}`.
    WeakLeftOnly,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Strong => "strong",
            Mode::WeakTwoSided => "weak_two_sided",
            Mode::WeakLeftOnly => "weak_left_only",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "strong" => Some(Mode::Strong),
            "weak_two_sided" => Some(Mode::WeakTwoSided),
            "weak_left_only" => Some(Mode::WeakLeftOnly),
            _ => None,
        }
    }

    pub fn is_weak(&self) -> bool {
        *self != Mode::Strong
    }
}

/// Levels at which the distribution function is probed.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaGrid {
    /// `points` geometric levels from `2^lo_log2 · M` up to just below `M`,
    /// `M` the largest output value for the function at hand.
    Relative { lo_log2: f64, points: usize },
    Absolute(Vec<f64>),
}

impl Default for LambdaGrid {
    fn default() -> Self {
        LambdaGrid::Relative {
            lo_log2: -8.0,
            points: 24,
        }
    }
}

impl LambdaGrid {
    pub fn validate(&self) -> Result<()> {
        match self {
            LambdaGrid::Relative { lo_log2, points } => {
                if *points < 2 || !(*lo_log2 < 0.0) {
                    return Err(Error::invalid("relative lambda grid needs >= 2 points and lo_log2 < 0"));
                }
            }
            LambdaGrid::Absolute(v) => {
                if v.is_empty() || v.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                    return Err(Error::invalid("lambda values must be positive"));
                }
            }
        }
        Ok(())
    }

    /// The grid as recorded in reports: factors for a relative grid.
    pub fn recorded(&self) -> Vec<f64> {
        self.levels(1.0)
    }

    pub fn is_relative(&self) -> bool {
        matches!(self, LambdaGrid::Relative { .. })
    }

    /// Levels for a function whose largest output is `scale`. The top level
    /// sits a hair below `scale`, otherwise the strict level set is empty.
    pub fn levels(&self, scale: f64) -> Vec<f64> {
        match self {
            LambdaGrid::Relative { lo_log2, points } => {
                if !(scale > 0.0) {
                    return Vec::new();
                }
                let n = *points;
                (0..n)
                    .map(|i| {
                        if i + 1 == n {
                            scale * (1.0 - 2f64.powi(-30))
                        } else {
                            scale * 2f64.powf(lo_log2 * (1.0 - i as f64 / (n - 1) as f64))
                        }
                    })
                    .collect()
            }
            LambdaGrid::Absolute(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionRatio {
    pub id: String,
    pub ratio: f64,
    /// Level attaining the ratio (weak modes).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub a: f64,
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingMeta {
    pub step: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub schema_version: String,
    /// `ergodic`, `line` or `matched_line`.
    pub side: String,
    pub operator: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub flow: Option<String>,
    pub p: f64,
    pub weight_w: String,
    pub weight_v: String,
    pub mode: Mode,
    pub per_function_ratios: Vec<FunctionRatio>,
    pub estimated_constant: f64,
    pub lambda_grid: Vec<f64>,
    pub lambda_relative: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub truncation_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pad: Option<f64>,
    pub truncation_sweep: Vec<SweepPoint>,
    /// Members whose denominator vanished.
    pub skipped: Vec<String>,
    pub sampling: SamplingMeta,
}

impl InequalityReport {
    fn finish(mut self) -> Self {
        self.estimated_constant = self
            .per_function_ratios
            .iter()
            .map(|r| r.ratio)
            .fold(0.0, f64::max);
        self
    }
}

/// `f` and `T♯f` at every base point, per family member.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicSample {
    pub points: Vec<Point>,
    pub f: Vec<Vec<f64>>,
    pub tf: Vec<Vec<f64>>,
}

/// Evaluates the family once so several `p` and modes can reuse it.
pub fn ergodic_sample(t: &TransferredOperator, family: &FunctionFamily, points: &[Point]) -> Result<ErgodicSample> {
    if points.is_empty() {
        return Err(Error::invalid("no base points"));
    }
    let n = points.len();
    let jobs: Vec<(usize, usize)> = (0..family.len())
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .collect();
    let values: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let f = &family.members[i].1;
            Ok((f.eval(&points[j]), t.apply(f, &points[j])?))
        })
        .collect::<Result<_>>()?;
    let mut fv = vec![Vec::with_capacity(n); family.len()];
    let mut tv = vec![Vec::with_capacity(n); family.len()];
    for (&(i, _), (a, b)) in jobs.iter().zip(values) {
        fv[i].push(a);
        tv[i].push(b);
    }
    Ok(ErgodicSample {
        points: points.to_vec(),
        f: fv,
        tf: tv,
    })
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::invalid(format!("p must lie in [1, ∞), got {p}")));
    }
    Ok(())
}

/// `(mean of |g|^p u)^{1/p}`.
fn mean_norm(g: &[f64], u: &[f64], p: f64) -> f64 {
    let s: f64 = g.iter().zip(u).map(|(a, b)| a.abs().powf(p) * b).sum();
    (s / g.len() as f64).powf(1.0 / p)
}

fn weight_values(w: &SpaceFunction, points: &[Point]) -> Result<Vec<f64>> {
    let vals: Vec<f64> = points.iter().map(|x| w.eval(x)).collect();
    if let Some(v) = vals.iter().find(|v| **v < 0.0) {
        return Err(Error::invalid(format!("weight takes negative value {v}")));
    }
    Ok(vals)
}

fn ergodic_report(t: &TransferredOperator, p: f64, w: &SpaceFunction, v: &SpaceFunction, mode: Mode, n: usize) -> InequalityReport {
    InequalityReport {
        schema_version: SCHEMA_VERSION.into(),
        side: "ergodic".into(),
        operator: t.line_op().descriptor(),
        flow: Some(t.flow().descriptor()),
        p,
        weight_w: w.descriptor(),
        weight_v: v.descriptor(),
        mode,
        per_function_ratios: Vec::new(),
        estimated_constant: 0.0,
        lambda_grid: Vec::new(),
        lambda_relative: false,
        truncation_a: Some(t.truncation_a()),
        pad: Some(t.pad()),
        truncation_sweep: Vec::new(),
        skipped: Vec::new(),
        sampling: SamplingMeta {
            step: t.step(),
            points: n,
        },
    }
}

/// `‖T♯f‖_{L^p(w)} / ‖f‖_{L^p(v)}` per member, from precomputed values.
pub fn strong_from_sample(
    t: &TransferredOperator,
    family: &FunctionFamily,
    sample: &ErgodicSample,
    p: f64,
    w: &SpaceFunction,
    v: &SpaceFunction,
) -> Result<InequalityReport> {
    check_p(p)?;
    let wv = weight_values(w, &sample.points)?;
    let vv = weight_values(v, &sample.points)?;
    let mut report = ergodic_report(t, p, w, v, Mode::Strong, sample.points.len());
    for (i, (id, _)) in family.members.iter().enumerate() {
        let den = mean_norm(&sample.f[i], &vv, p);
        if !(den > 0.0) {
            report.skipped.push(id.clone());
            continue;
        }
        let num = mean_norm(&sample.tf[i], &wv, p);
        report.per_function_ratios.push(FunctionRatio {
            id: id.clone(),
            ratio: num / den,
            lambda: None,
        });
    }
    Ok(report.finish())
}

/// Best `λ · mass(λ)^{1/p}` over the levels.
fn best_level(values: &[f64], mass: &[f64], levels: &[f64], p: f64) -> (f64, Option<f64>) {
    let mut best = (0.0, None);
    for &l in levels {
        let m: f64 = values
            .iter()
            .zip(mass)
            .filter(|(v, _)| v.abs() > l)
            .map(|(_, u)| *u)
            .sum();
        let r = l * m.powf(1.0 / p);
        if r > best.0 {
            best = (r, Some(l));
        }
    }
    best
}

/// `λ w{|T♯f| > λ}^{1/p} / ‖f‖`, maximized over the λ grid, per member.
pub fn weak_from_sample(
    t: &TransferredOperator,
    family: &FunctionFamily,
    sample: &ErgodicSample,
    p: f64,
    w: &SpaceFunction,
    lambda: &LambdaGrid,
    mode: Mode,
) -> Result<InequalityReport> {
    check_p(p)?;
    lambda.validate()?;
    if !mode.is_weak() {
        return Err(Error::invalid("weak estimate needs a weak mode"));
    }
    let n = sample.points.len() as f64;
    let wv = weight_values(w, &sample.points)?;
    let unit = SpaceFunction::Constant(1.0);
    let v = if mode == Mode::WeakTwoSided { w } else { &unit };
    let vv = weight_values(v, &sample.points)?;
    let mass: Vec<f64> = wv.iter().map(|u| u / n).collect();
    let mut report = ergodic_report(t, p, w, v, mode, sample.points.len());
    report.lambda_grid = lambda.recorded();
    report.lambda_relative = lambda.is_relative();
    for (i, (id, _)) in family.members.iter().enumerate() {
        let den = mean_norm(&sample.f[i], &vv, p);
        if !(den > 0.0) {
            report.skipped.push(id.clone());
            continue;
        }
        let scale = sample.tf[i].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (r, l) = best_level(&sample.tf[i], &mass, &lambda.levels(scale), p);
        report.per_function_ratios.push(FunctionRatio {
            id: id.clone(),
            ratio: r / den,
            lambda: l,
        });
    }
    Ok(report.finish())
}

pub fn estimate_strong_constant(
    t: &TransferredOperator,
    p: f64,
    w: &SpaceFunction,
    v: &SpaceFunction,
    family: &FunctionFamily,
    points: &[Point],
) -> Result<InequalityReport> {
    let sample = ergodic_sample(t, family, points)?;
    strong_from_sample(t, family, &sample, p, w, v)
}

pub fn estimate_weak_constant(
    t: &TransferredOperator,
    p: f64,
    w: &SpaceFunction,
    lambda: &LambdaGrid,
    family: &FunctionFamily,
    points: &[Point],
    mode: Mode,
) -> Result<InequalityReport> {
    let sample = ergodic_sample(t, family, points)?;
    weak_from_sample(t, family, &sample, p, w, lambda, mode)
}

/// Strong constant at each truncation `a`; the returned report is the one
/// for `t` itself with the sweep attached.
pub fn truncation_sweep(
    t: &TransferredOperator,
    p: f64,
    w: &SpaceFunction,
    v: &SpaceFunction,
    family: &FunctionFamily,
    points: &[Point],
    a_values: &[f64],
) -> Result<InequalityReport> {
    if a_values.is_empty() {
        return Err(Error::invalid("truncation sweep needs at least one a"));
    }
    if a_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("truncation values must increase"));
    }
    if let Some(a) = a_values.iter().find(|a| **a < t.pad()) {
        return Err(Error::invalid(format!("truncation {a} is below the pad {}", t.pad())));
    }
    let mut report = estimate_strong_constant(t, p, w, v, family, points)?;
    for &a in a_values {
        let ta = t.with_truncation(a)?;
        let r = estimate_strong_constant(&ta, p, w, v, family, points)?;
        report.truncation_sweep.push(SweepPoint {
            a,
            constant: r.estimated_constant,
        });
    }
    Ok(report)
}

/// `T(F_b(·, x))(0)` for each `b`: the raw effect of cutting the trace
/// before semilocality makes it irrelevant.
pub fn raw_truncation_profile(t: &TransferredOperator, f: &SpaceFunction, x: &Point, b_values: &[f64]) -> Result<Vec<f64>> {
    let reach = t.line_op().semilocal_radius().max(t.step());
    let h = t.step();
    let n = (reach / h).ceil() as i64 + 2;
    let full = orbit_cells(t.flow(), f, x, -n, n + 1, h)?;
    b_values
        .iter()
        .map(|&b| {
            if !(b > 0.0) {
                return Err(Error::invalid("truncation must be positive"));
            }
            let cut = full.map_indexed(|i, v| if full.centre(i).abs() < b { v } else { 0.0 });
            Ok(t.line_op().kernel_at(&cut, 0.0))
        })
        .collect()
}

/// The same estimates for an operator on the line.
pub fn line_baseline(
    op: &LineOperator,
    p: f64,
    w: &Weight,
    v: &Weight,
    family: &LineFamily,
    mode: Mode,
    lambda: &LambdaGrid,
) -> Result<InequalityReport> {
    check_p(p)?;
    lambda.validate()?;
    let unit = Weight::unit();
    let v = if mode == Mode::WeakLeftOnly {
        &unit
    } else if mode == Mode::WeakTwoSided {
        w
    } else {
        v
    };
    let outputs: Vec<SampledFunction> = family.members.par_iter().map(|(_, f)| op.apply(f)).collect();
    let mut report = InequalityReport {
        schema_version: SCHEMA_VERSION.into(),
        side: "line".into(),
        operator: op.descriptor(),
        flow: None,
        p,
        weight_w: w.descriptor(),
        weight_v: v.descriptor(),
        mode,
        per_function_ratios: Vec::new(),
        estimated_constant: 0.0,
        lambda_grid: if mode.is_weak() { lambda.recorded() } else { Vec::new() },
        lambda_relative: mode.is_weak() && lambda.is_relative(),
        truncation_a: None,
        pad: None,
        truncation_sweep: Vec::new(),
        skipped: Vec::new(),
        sampling: SamplingMeta {
            step: family.members[0].1.step(),
            points: family.members.iter().map(|(_, f)| f.len()).sum(),
        },
    };
    for ((id, f), tf) in family.members.iter().zip(&outputs) {
        let den = lp_norm_weighted(f, v, p);
        if !(den > 0.0) {
            report.skipped.push(id.clone());
            continue;
        }
        let (ratio, lambda_at) = if mode.is_weak() {
            let mut best = (0.0, None);
            for l in lambda.levels(tf.max_abs()) {
                let r = l * distribution_weighted(tf, w, l).powf(1.0 / p);
                if r > best.0 {
                    best = (r, Some(l));
                }
            }
            (best.0 / den, best.1)
        } else {
            (lp_norm_weighted(tf, w, p) / den, None)
        };
        report.per_function_ratios.push(FunctionRatio {
            id: id.clone(),
            ratio,
            lambda: lambda_at,
        });
    }
    Ok(report.finish())
}

/// Line-side constants on the truncated orbit traces of the same family: for
/// each member and base point,
/// `(∫_{|t|<a} |G_{a+ε}|^p w(U^t x) dt / ∫ |F_{a+ε}|^p v(U^t x) dt)^{1/p}`
/// (or the weak analogue), maximized over base points. This is exactly the
/// line inequality the transfer argument invokes, on matched data.
///
/// `scales` fixes each member's λ scale (use the ergodic maxima so both sides
/// probe the same levels).
#[allow(clippy::too_many_arguments)]
pub fn matched_line_baseline(
    t: &TransferredOperator,
    p: f64,
    w: &SpaceFunction,
    v: &SpaceFunction,
    family: &FunctionFamily,
    points: &[Point],
    mode: Mode,
    lambda: &LambdaGrid,
    scales: Option<&[f64]>,
) -> Result<InequalityReport> {
    check_p(p)?;
    lambda.validate()?;
    if points.is_empty() {
        return Err(Error::invalid("no base points"));
    }
    let unit = SpaceFunction::Constant(1.0);
    let v = match mode {
        Mode::Strong => v,
        Mode::WeakTwoSided => w,
        Mode::WeakLeftOnly => &unit,
    };
    let h = t.step();
    let a = t.truncation_a();
    let jobs: Vec<(usize, usize)> = (0..family.len())
        .flat_map(|i| (0..points.len()).map(move |j| (i, j)))
        .collect();
    // per job: numerator data (|G|, w·h over |t| < a) and denominator ∫|F|^p v
    let data: Vec<(Vec<f64>, Vec<f64>, f64)> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let f = &family.members[i].1;
            let x = &points[j];
            let (trace, out) = t.line_outputs(f, x)?;
            let k0 = (trace.origin() / h + 0.5).round() as i64;
            let vt = orbit_cells(t.flow(), v, x, k0, k0 + trace.len() as i64, h)?;
            let den: f64 = trace
                .samples()
                .iter()
                .zip(vt.samples())
                .map(|(g, u)| g.abs().powf(p) * u * h)
                .sum();
            let m = (a / h).ceil() as i64 - 1;
            let wt = orbit_cells(t.flow(), w, x, -m, m + 1, h)?;
            let off = (-m - (out.origin() / h + 0.5).round() as i64) as usize;
            let g = out.samples()[off..off + wt.len()].to_vec();
            let mass: Vec<f64> = wt.samples().iter().map(|u| u * h).collect();
            if let Some(bad) = wt.samples().iter().chain(vt.samples()).find(|u| **u < 0.0) {
                return Err(Error::invalid(format!("weight takes negative value {bad}")));
            }
            Ok((g, mass, den))
        })
        .collect::<Result<_>>()?;

    let mut report = InequalityReport {
        schema_version: SCHEMA_VERSION.into(),
        side: "matched_line".into(),
        operator: t.line_op().descriptor(),
        flow: Some(t.flow().descriptor()),
        p,
        weight_w: w.descriptor(),
        weight_v: v.descriptor(),
        mode,
        per_function_ratios: Vec::new(),
        estimated_constant: 0.0,
        lambda_grid: if mode.is_weak() { lambda.recorded() } else { Vec::new() },
        lambda_relative: mode.is_weak() && lambda.is_relative(),
        truncation_a: Some(a),
        pad: Some(t.pad()),
        truncation_sweep: Vec::new(),
        skipped: Vec::new(),
        sampling: SamplingMeta {
            step: h,
            points: points.len(),
        },
    };
    let np = points.len();
    for (i, (id, _)) in family.members.iter().enumerate() {
        let rows = &data[i * np..(i + 1) * np];
        let levels = if mode.is_weak() {
            let scale = match scales {
                Some(s) => s[i],
                None => rows
                    .iter()
                    .flat_map(|(g, _, _)| g.iter())
                    .fold(0.0f64, |m, v| m.max(v.abs())),
            };
            lambda.levels(scale)
        } else {
            Vec::new()
        };
        let mut best = (0.0f64, None);
        let mut any = false;
        for (g, mass, den) in rows {
            if !(*den > 0.0) {
                continue;
            }
            any = true;
            let (r, l) = if mode.is_weak() {
                let (r, l) = best_level(g, mass, &levels, p);
                (r / den.powf(1.0 / p), l)
            } else {
                let num: f64 = g.iter().zip(mass).map(|(a, u)| a.abs().powf(p) * u).sum();
                ((num / den).powf(1.0 / p), None)
            };
            if r > best.0 {
                best = (r, l);
            }
        }
        if !any {
            report.skipped.push(id.clone());
            continue;
        }
        report.per_function_ratios.push(FunctionRatio {
            id: id.clone(),
            ratio: best.0,
            lambda: best.1,
        });
    }
    Ok(report.finish())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub schema_version: String,
    pub operator: String,
    pub p: f64,
    pub mode: Mode,
    pub line_constant: f64,
    pub ergodic_constant: f64,
    /// `((a + ε)/a)^{1/p}`.
    pub slack: f64,
    pub tolerance: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Checks `ergodic ≤ line · ((a+ε)/a)^{1/p} · (1 + tolerance)`.
pub fn transfer_comparison(line: &InequalityReport, ergodic: &InequalityReport, tolerance: f64) -> Result<Comparison> {
    let mismatch = |what: &str| Err(Error::MismatchedConfig(what.to_string()));
    if line.p != ergodic.p {
        return mismatch(&format!("p differs: {} vs {}", line.p, ergodic.p));
    }
    if line.mode != ergodic.mode {
        return mismatch(&format!("mode differs: {} vs {}", line.mode.name(), ergodic.mode.name()));
    }
    if line.operator != ergodic.operator {
        return mismatch(&format!("operator differs: {} vs {}", line.operator, ergodic.operator));
    }
    if line.weight_w != ergodic.weight_w || line.weight_v != ergodic.weight_v {
        return mismatch("weights differ");
    }
    let (Some(a), Some(pad)) = (ergodic.truncation_a, ergodic.pad) else {
        return mismatch("ergodic report lacks truncation data");
    };
    if !(tolerance >= 0.0) {
        return Err(Error::invalid("tolerance must be nonnegative"));
    }
    let slack = ((a + pad) / a).powf(1.0 / ergodic.p);
    let bound = line.estimated_constant * slack * (1.0 + tolerance);
    Ok(Comparison {
        schema_version: SCHEMA_VERSION.into(),
        operator: ergodic.operator.clone(),
        p: ergodic.p,
        mode: ergodic.mode,
        line_constant: line.estimated_constant,
        ergodic_constant: ergodic.estimated_constant,
        slack,
        tolerance,
        bound,
        margin: bound - ergodic.estimated_constant,
        pass: ergodic.estimated_constant <= bound,
    })
}
