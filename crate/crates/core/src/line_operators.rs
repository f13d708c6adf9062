//! Sublinear, translation-commuting, semilocal operators on the line.
//!
//! Three kernels are provided, each evaluated with the cellwise-constant
//! integration rule of [`SampledFunction`]:
//!
//! * one-sided maximal function, forward windows `[t, t + s]` over a finite
//!   radius list;
//! * truncated Hilbert transform `∫_{ε ≤ |u| ≤ 1/ε} f(t+u)/u du`, no `1/π`;
//! * dyadic square function over scales `2^n`, `n_min ≤ n ≤ n_max`, with
//!   backward windows `[t - L, t]` (convolution with `χ_[0,L]`) by default.
//!
//! Every operator carries a semilocality radius: the output vanishes outside
//! that neighbourhood of the input's support.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sampled_line::SampledFunction;

/// Direction of the averaging windows used by the square function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowOrientation {
    /// `[t - L, t]`, i.e. `f * χ_[0,L]`.
    Backward,
    /// `[t, t + L]`.
    Forward,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    Identity,
    Maximal {
        radii: Vec<f64>,
    },
    Hilbert {
        eps: f64,
    },
    Square {
        n_min: i32,
        n_max: i32,
        orientation: WindowOrientation,
    },
    /// `sup_n |T_n f|` over a finite family.
    SupFamily(Vec<LineOperator>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineOperator {
    kind: OperatorKind,
    semilocal_radius: f64,
}

impl LineOperator {
    pub fn identity() -> Self {
        LineOperator {
            kind: OperatorKind::Identity,
            semilocal_radius: 0.0,
        }
    }

    pub fn maximal(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::invalid("maximal radii must be a nonempty list of positive numbers"));
        }
        let r = radii.iter().cloned().fold(0.0, f64::max);
        Ok(LineOperator {
            kind: OperatorKind::Maximal { radii },
            semilocal_radius: r,
        })
    }

    /// Radii `2^k` for `k_lo ≤ k ≤ k_hi`.
    pub fn maximal_dyadic(k_lo: i32, k_hi: i32) -> Result<Self> {
        if k_lo > k_hi {
            return Err(Error::invalid(format!("empty radius range {k_lo}..{k_hi}")));
        }
        Self::maximal((k_lo..=k_hi).map(|k| 2f64.powi(k)).collect())
    }

    pub fn hilbert(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid(format!("hilbert eps must lie in (0, 1), got {eps}")));
        }
        Ok(LineOperator {
            kind: OperatorKind::Hilbert { eps },
            semilocal_radius: 1.0 / eps,
        })
    }

    pub fn square(n_min: i32, n_max: i32) -> Result<Self> {
        Self::square_oriented(n_min, n_max, WindowOrientation::Backward)
    }

    pub fn square_oriented(n_min: i32, n_max: i32, orientation: WindowOrientation) -> Result<Self> {
        if n_min > n_max {
            return Err(Error::invalid(format!("square needs n_min <= n_max, got {n_min} > {n_max}")));
        }
        Ok(LineOperator {
            kind: OperatorKind::Square {
                n_min,
                n_max,
                orientation,
            },
            semilocal_radius: 2f64.powi(n_max),
        })
    }

    pub fn sup_family(members: Vec<LineOperator>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("sup family needs at least one member"));
        }
        let r = members.iter().map(|m| m.semilocal_radius).fold(0.0, f64::max);
        Ok(LineOperator {
            kind: OperatorKind::SupFamily(members),
            semilocal_radius: r,
        })
    }

    /// Radii `2^-6 .. 2^4`.
    pub fn default_maximal() -> Self {
        Self::maximal_dyadic(-6, 4).expect("valid defaults")
    }

    /// `eps = 2^-6`.
    pub fn default_hilbert() -> Self {
        Self::hilbert(1.0 / 64.0).expect("valid defaults")
    }

    /// Scales `2^-6 .. 2^4`.
    pub fn default_square() -> Self {
        Self::square(-6, 4).expect("valid defaults")
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    /// The `ε` of semilocality: `supp Tf ⊂ supp f + [-ε, ε]`.
    pub fn semilocal_radius(&self) -> f64 {
        self.semilocal_radius
    }

    /// Literal form, matching the config grammar.
    pub fn descriptor(&self) -> String {
        match &self.kind {
            OperatorKind::Identity => "identity".into(),
            OperatorKind::Maximal { radii } => {
                let ks: Option<Vec<i32>> = radii
                    .iter()
                    .map(|s| {
                        let k = s.log2().round();
                        (2f64.powi(k as i32) == *s).then_some(k as i32)
                    })
                    .collect();
                match ks {
                    Some(ks) if ks.windows(2).all(|w| w[1] == w[0] + 1) => {
                        format!("maximal {} {}", ks[0], ks[ks.len() - 1])
                    }
                    _ => {
                        let r: Vec<String> = radii.iter().map(|s| s.to_string()).collect();
                        format!("maximal_radii {}", r.join(" "))
                    }
                }
            }
            OperatorKind::Hilbert { eps } => format!("hilbert {eps}"),
            OperatorKind::Square {
                n_min,
                n_max,
                orientation,
            } => match orientation {
                WindowOrientation::Backward => format!("square {n_min} {n_max}"),
                WindowOrientation::Forward => format!("square {n_min} {n_max} forward"),
            },
            OperatorKind::SupFamily(members) => {
                let parts: Vec<String> = members.iter().map(|m| m.descriptor()).collect();
                format!("sup [{}]", parts.join(" | "))
            }
        }
    }

    /// `Tf(t)` at a single point.
    pub fn kernel_at(&self, f: &SampledFunction, t: f64) -> f64 {
        match &self.kind {
            OperatorKind::Identity => f.eval(t),
            OperatorKind::Maximal { radii } => maximal_kernel(f, radii, t),
            OperatorKind::Hilbert { eps } => hilbert_kernel(f, *eps, t),
            OperatorKind::Square {
                n_min,
                n_max,
                orientation,
            } => square_kernel_oriented(f, *n_min, *n_max, *orientation, t),
            OperatorKind::SupFamily(members) => members
                .iter()
                .map(|m| m.kernel_at(f, t).abs())
                .fold(0.0, f64::max),
        }
    }

    /// `Tf` on a grid covering `supp f` enlarged by the semilocality radius.
    pub fn apply(&self, f: &SampledFunction) -> SampledFunction {
        if self.kind == OperatorKind::Identity {
            return f.clone();
        }
        let pad = (self.semilocal_radius / f.step()).ceil() as usize;
        let values = self.apply_padded(f, pad);
        SampledFunction::new(f.origin() - pad as f64 * f.step(), f.step(), values)
            .expect("operator outputs are finite")
    }

    /// Values at the centres of `f`'s cells extended by `pad` cells each side.
    fn apply_padded(&self, f: &SampledFunction, pad: usize) -> Vec<f64> {
        let n_out = f.len() + 2 * pad;
        let h = f.step();
        // centre of output cell j, in input cell units
        let centre = |j: usize| j as f64 - pad as f64 + 0.5;
        match &self.kind {
            OperatorKind::Identity => {
                let mut out = vec![0.0; n_out];
                out[pad..pad + f.len()].copy_from_slice(f.samples());
                out
            }
            OperatorKind::Maximal { radii } => {
                let cum = f.cumulative(true);
                (0..n_out)
                    .map(|j| {
                        let u = centre(j);
                        radii
                            .iter()
                            .map(|s| cum.between(u, u + s / h) * h / s)
                            .fold(0.0, f64::max)
                    })
                    .collect()
            }
            OperatorKind::Square {
                n_min,
                n_max,
                orientation,
            } => {
                let cum = f.cumulative(false);
                let avg = |u: f64, len: f64| -> f64 {
                    let cells = len / h;
                    match orientation {
                        WindowOrientation::Backward => cum.between(u - cells, u) * h / len,
                        WindowOrientation::Forward => cum.between(u, u + cells) * h / len,
                    }
                };
                (0..n_out)
                    .map(|j| {
                        let u = centre(j);
                        (*n_min..=*n_max)
                            .map(|n| {
                                let d = avg(u, 2f64.powi(n)) - avg(u, 2f64.powi(n - 1));
                                d * d
                            })
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect()
            }
            OperatorKind::Hilbert { eps } => hilbert_on_centres(f, *eps, pad),
            OperatorKind::SupFamily(members) => {
                let mut out = vec![0.0f64; n_out];
                for m in members {
                    for (o, v) in out.iter_mut().zip(m.apply_padded(f, pad)) {
                        *o = o.max(v.abs());
                    }
                }
                out
            }
        }
    }
}

/// `max_{s ∈ radii} (1/s) ∫_0^s |f(t+u)| du`.
pub fn maximal_kernel(f: &SampledFunction, radii: &[f64], t: f64) -> f64 {
    radii
        .iter()
        .map(|s| f.integrate_abs_between(t, t + s) / s)
        .fold(0.0, f64::max)
}

/// `(Σ_n |A_{2^n} f(t) - A_{2^{n-1}} f(t)|²)^{1/2}` with backward averages
/// `A_L f(t) = (1/L) ∫_{t-L}^t f`.
pub fn square_kernel(f: &SampledFunction, n_min: i32, n_max: i32, t: f64) -> f64 {
    square_kernel_oriented(f, n_min, n_max, WindowOrientation::Backward, t)
}

pub fn square_kernel_oriented(
    f: &SampledFunction,
    n_min: i32,
    n_max: i32,
    orientation: WindowOrientation,
    t: f64,
) -> f64 {
    let avg = |len: f64| match orientation {
        WindowOrientation::Backward => f.integrate_between(t - len, t) / len,
        WindowOrientation::Forward => f.integrate_between(t, t + len) / len,
    };
    (n_min..=n_max)
        .map(|n| {
            let d = avg(2f64.powi(n)) - avg(2f64.powi(n - 1));
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// `∫_{[lo, hi] ∩ [eps, upper]} dv / v`.
fn log_weight(lo: f64, hi: f64, eps: f64, upper: f64) -> f64 {
    let a = lo.max(eps);
    let b = hi.min(upper);
    if b > a {
        ((b - a) / a).ln_1p()
    } else {
        0.0
    }
}

/// `∫_{eps ≤ |u| ≤ 1/eps} f(t+u)/u du`.
///
/// Each cell contributes its value times the exact integral of `1/u` over the
/// part of the cell inside the truncation. When `t` sits on a cell centre or
/// edge the cells at `t ± v` are paired, so locally even data cancels exactly.
pub fn hilbert_kernel(f: &SampledFunction, eps: f64, t: f64) -> f64 {
    let upper = 1.0 / eps;
    let h = f.step();
    let n = f.len() as isize;
    let x = (t - f.origin()) / h;
    let sample = |i: isize| -> f64 {
        if i >= 0 && i < n {
            f.samples()[i as usize]
        } else {
            0.0
        }
    };
    if (2.0 * x).fract() == 0.0 {
        let on_edge = x.fract() == 0.0;
        let base = x.floor() as isize;
        let mut acc = 0.0;
        let mut k: isize = if on_edge { 0 } else { 1 };
        loop {
            // right cell and its mirror cover the same distances [lo, hi]
            let (lo, hi, right, left) = if on_edge {
                (k as f64 * h, (k + 1) as f64 * h, base + k, base - 1 - k)
            } else {
                ((k as f64 - 0.5) * h, (k as f64 + 0.5) * h, base + k, base - k)
            };
            if lo >= upper || (right >= n && left < 0) {
                break;
            }
            let weight = log_weight(lo, hi, eps, upper);
            if weight > 0.0 {
                acc += (sample(right) - sample(left)) * weight;
            }
            k += 1;
        }
        return acc;
    }
    let lo = (((t - upper - f.origin()) / h).floor().max(0.0) as isize).min(n);
    let hi = (((t + upper - f.origin()) / h).ceil().max(0.0) as isize).min(n);
    let mut acc = 0.0;
    for i in lo..hi {
        let v = f.samples()[i as usize];
        if v == 0.0 {
            continue;
        }
        let (cl, ch) = f.cell(i as usize);
        if ch > t {
            acc += v * log_weight((cl - t).max(0.0), ch - t, eps, upper);
        }
        if cl < t {
            acc -= v * log_weight((t - ch).max(0.0), t - cl, eps, upper);
        }
    }
    acc
}

/// Hilbert transform at every output centre, direct for small problems and by
/// FFT correlation otherwise.
fn hilbert_on_centres(f: &SampledFunction, eps: f64, pad: usize) -> Vec<f64> {
    let h = f.step();
    let upper = 1.0 / eps;
    let n_out = f.len() + 2 * pad;
    let reach = ((upper / h) + 0.5).ceil() as usize;
    // centre-to-centre offset m ≥ 1 covers distances [(m-½)h, (m+½)h]
    let weights: Vec<f64> = (0..=reach)
        .map(|m| {
            if m == 0 {
                0.0
            } else {
                log_weight((m as f64 - 0.5) * h, (m as f64 + 0.5) * h, eps, upper)
            }
        })
        .collect();
    let mut g = vec![0.0; n_out];
    g[pad..pad + f.len()].copy_from_slice(f.samples());

    if (n_out as u64) * (reach as u64) <= 4_000_000 {
        let at = |i: isize| -> f64 {
            if i >= 0 && (i as usize) < n_out {
                g[i as usize]
            } else {
                0.0
            }
        };
        return (0..n_out as isize)
            .map(|c| {
                weights
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(m, w)| (at(c + m as isize) - at(c - m as isize)) * w)
                    .sum()
            })
            .collect();
    }

    // out[c] = Σ_d K[d] g[c + d] with K[d] = w_d (d > 0), -w_{-d} (d < 0);
    // as a convolution with r[e] = K[-e] stored at e + reach.
    let size = (n_out + 2 * reach + 1).next_power_of_two();
    let mut a: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); size];
    let mut b: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); size];
    for (i, v) in g.iter().enumerate() {
        a[i].re = *v;
    }
    for (m, w) in weights.iter().enumerate().skip(1) {
        // e = -m -> K[m] = w ; e = m -> K[-m] = -w
        b[reach - m].re = *w;
        b[reach + m].re = -*w;
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    (0..n_out).map(|c| a[c + reach].re * scale).collect()
}

/// How far the support of `Tf` extends beyond the support of `f`.
pub fn check_semilocality(op: &LineOperator, f: &SampledFunction) -> f64 {
    let Some(input) = f.support() else {
        return 0.0;
    };
    let out = op.apply(f);
    let threshold = 1e-12 * out.max_abs();
    let first = out.samples().iter().position(|v| v.abs() > threshold);
    let last = out.samples().iter().rposition(|v| v.abs() > threshold);
    match (first, last) {
        (Some(a), Some(b)) => {
            let lo = out.cell(a).0;
            let hi = out.cell(b).1;
            (input.left() - lo).max(hi - input.right()).max(0.0)
        }
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const H: f64 = 1.0 / 1024.0;

    fn chi01() -> SampledFunction {
        SampledFunction::indicator(0.0, 1.0, H).unwrap()
    }

    #[test]
    fn identity_and_singleton_family() {
        let f = SampledFunction::tent(0.3, 0.7, H).unwrap();
        assert_eq!(LineOperator::identity().apply(&f), f);
        let m = LineOperator::maximal(vec![0.5, 1.0]).unwrap();
        let fam = LineOperator::sup_family(vec![m.clone()]).unwrap();
        assert_eq!(fam.apply(&f).samples(), m.apply(&f).samples());
    }

    #[test]
    fn maximal_examples() {
        let f = chi01();
        let op = LineOperator::maximal(vec![1.0]).unwrap();
        assert_abs_diff_eq!(op.kernel_at(&f, 0.0), 1.0, epsilon = 1e-12);
        // windows [-1, 0], [-1, 1], [-1, 3] meet [0, 1] in 0, 1, 1
        assert_abs_diff_eq!(maximal_kernel(&f, &[1.0, 2.0, 4.0], -1.0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(maximal_kernel(&f, &[0.5], 0.5), 1.0, epsilon = 1e-12);
        let zero = SampledFunction::zeros(0.0, H, 8).unwrap();
        assert_eq!(maximal_kernel(&zero, &[1.0, 2.0], 0.0), 0.0);
    }

    #[test]
    fn hilbert_examples() {
        let f = chi01();
        let eps = 1.0 / 64.0;
        assert_abs_diff_eq!(hilbert_kernel(&f, eps, 2.0), 0.5f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(hilbert_kernel(&f, eps, -1.0), 2f64.ln(), epsilon = 1e-12);
        let even = SampledFunction::indicator(-1.0, 1.0, H).unwrap();
        assert_eq!(hilbert_kernel(&even, eps, 0.0), 0.0);
        // unaligned evaluation point
        let t = 2.0 + 0.3 * H;
        let exact = ((1.0 - t) / (0.0 - t)).abs().ln();
        assert_abs_diff_eq!(hilbert_kernel(&f, eps, t), exact, epsilon = 1e-12);
    }

    #[test]
    fn hilbert_interior_point_uses_truncation() {
        // t = 1/2 inside [0, 1]: ∫_{eps ≤ |u| ≤ 1/2} sign(u)/|u| cancels
        let f = chi01();
        assert_abs_diff_eq!(hilbert_kernel(&f, 1.0 / 64.0, 0.5), 0.0, epsilon = 1e-12);
        // t = 1/4: ∫_eps^{3/4} du/u - ∫_eps^{1/4} du/u = ln 3
        assert_abs_diff_eq!(hilbert_kernel(&f, 1.0 / 64.0, 0.25), 3f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn square_examples() {
        let f = chi01();
        assert_abs_diff_eq!(square_kernel(&f, 0, 0, 1.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(square_kernel(&f, 0, 0, 1.5), 0.5, epsilon = 1e-12);
        let wide = SampledFunction::constant(3.0, -40.0, 40.0, H).unwrap();
        assert_abs_diff_eq!(square_kernel(&wide, -6, 4, 0.0), 0.0, epsilon = 1e-9);
        let zero = SampledFunction::zeros(0.0, H, 8).unwrap();
        assert_eq!(square_kernel(&zero, -2, 2, 0.0), 0.0);
    }

    #[test]
    fn semilocality_examples() {
        let f = chi01();
        assert_eq!(check_semilocality(&LineOperator::identity(), &f), 0.0);
        let m = LineOperator::maximal(vec![1.0, 2.0]).unwrap();
        let excess = check_semilocality(&m, &f);
        assert!((2.0 - H..=2.0 + H).contains(&excess), "{excess}");
        let hil = LineOperator::hilbert(0.25).unwrap();
        assert!(check_semilocality(&hil, &f) <= 4.0 + H);
    }

    #[test]
    fn apply_matches_pointwise_kernels() {
        let f = SampledFunction::steps(&[1.0, -0.5, 2.0, 0.25], -1.0, 1.0, H).unwrap();
        let ops = [
            LineOperator::maximal_dyadic(-3, 1).unwrap(),
            LineOperator::square(-4, 1).unwrap(),
            LineOperator::square_oriented(-4, 1, WindowOrientation::Forward).unwrap(),
            LineOperator::hilbert(0.125).unwrap(),
        ];
        for op in &ops {
            let out = op.apply(&f);
            for j in (0..out.len()).step_by(97) {
                let t = out.centre(j);
                assert_abs_diff_eq!(out.samples()[j], op.kernel_at(&f, t), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn hilbert_fft_matches_direct() {
        // large enough to take the FFT path
        let step = 1.0 / 256.0;
        let f = SampledFunction::steps(&[1.0, -2.0, 0.5, 3.0], -8.0, 8.0, step).unwrap();
        let op = LineOperator::hilbert(1.0 / 32.0).unwrap();
        let out = op.apply(&f);
        assert!(out.len() as u64 * (32.0 / step) as u64 > 4_000_000);
        for j in (0..out.len()).step_by(211) {
            let t = out.centre(j);
            assert_abs_diff_eq!(out.samples()[j], hilbert_kernel(&f, 1.0 / 32.0, t), epsilon = 1e-9);
        }
    }

    #[test]
    fn constructors_validate() {
        assert!(LineOperator::maximal(vec![]).is_err());
        assert!(LineOperator::maximal(vec![1.0, -1.0]).is_err());
        assert!(LineOperator::hilbert(1.5).is_err());
        assert!(LineOperator::hilbert(0.0).is_err());
        assert!(LineOperator::square(2, 1).is_err());
        assert!(LineOperator::sup_family(vec![]).is_err());
    }

    #[test]
    fn descriptors() {
        assert_eq!(LineOperator::default_maximal().descriptor(), "maximal -6 4");
        assert_eq!(LineOperator::default_hilbert().descriptor(), "hilbert 0.015625");
        assert_eq!(LineOperator::default_square().descriptor(), "square -6 4");
        assert_eq!(LineOperator::identity().descriptor(), "identity");
    }
}
