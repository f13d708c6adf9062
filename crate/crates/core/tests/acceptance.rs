//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::PathBuf;
use std::time::Instant;

use weighted_transfer::config::LoadedConfig;
use weighted_transfer::flows::{equimeasurability_check, orbit_cells, stratified_points, Flow, Point, SpaceFunction};
use weighted_transfer::line_operators::{LineOperator, WindowOrientation};
use weighted_transfer::runner::{run, Command};
use weighted_transfer::sampled_line::SampledFunction;
use weighted_transfer::transfer::{ergodic_hilbert, ergodic_maximal, ergodic_square, TransferredOperator};
use weighted_transfer::verify::{
    ergodic_sample, estimate_weak_constant, matched_line_baseline, strong_from_sample, transfer_comparison,
    truncation_sweep, FunctionFamily, LambdaGrid, Mode,
};
use weighted_transfer::weights::{ap_constant, IntervalFamily, Weight};

const H: f64 = 1.0 / 1024.0;
const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn transfer_matches_direct() -> Outcome {
    let flow = Flow::golden();
    let family = FunctionFamily::standard(SEED).take(6).unwrap();
    let points = stratified_points(&flow, 64);
    let radii: Vec<f64> = (-6..=4).map(|k| 2f64.powi(k)).collect();
    let eps = 1.0 / 64.0;
    let start = Instant::now();
    let worst = single_thread(|| {
        let ops = [
            LineOperator::default_maximal(),
            LineOperator::default_hilbert(),
            LineOperator::square_oriented(-6, 4, WindowOrientation::Forward).unwrap(),
        ];
        let mut worst = [0.0f64; 3];
        for (k, op) in ops.into_iter().enumerate() {
            let t = TransferredOperator::new(op, flow, None, None, Some(H)).unwrap();
            for (_, f) in family.members() {
                for x in &points {
                    let direct = match k {
                        0 => ergodic_maximal(&flow, f, x, &radii, H),
                        1 => ergodic_hilbert(&flow, f, x, eps, H),
                        _ => ergodic_square(&flow, f, x, -6, 4, H),
                    }
                    .unwrap();
                    worst[k] = worst[k].max((t.apply(f, x).unwrap() - direct).abs());
                }
            }
        }
        worst
    });
    let secs = start.elapsed().as_secs_f64();
    let max = worst.iter().cloned().fold(0.0, f64::max);
    ensure(
        max <= 1e-9 && secs < 60.0,
        format!("max |diff| maximal {:.1e} hilbert {:.1e} square {:.1e}; {secs:.1} s on one thread", worst[0], worst[1], worst[2]),
    )
}

fn semilocality_plateau() -> Outcome {
    let flow = Flow::golden();
    let family = FunctionFamily::standard(SEED).take(4).unwrap();
    let points = stratified_points(&flow, 64);
    let one = SpaceFunction::constant(1.0).unwrap();
    let mut worst = 0.0f64;
    for op in [LineOperator::default_maximal(), LineOperator::default_hilbert(), LineOperator::default_square()] {
        let t = TransferredOperator::new(op, flow, None, None, Some(H)).unwrap();
        let reach = t.line_op().semilocal_radius();
        let a_values: Vec<f64> = [1.0, 2.0, 3.0, 5.0].iter().map(|m| t.pad() + m * reach).collect();
        let report = truncation_sweep(&t, 2.0, &one, &one, &family, &points, &a_values).unwrap();
        let c: Vec<f64> = report.truncation_sweep.iter().map(|s| s.constant).collect();
        for w in c.windows(2) {
            worst = worst.max(((w[1] - w[0]) / w[0]).abs());
        }
    }
    ensure(worst <= 1e-12, format!("max relative change {worst:.1e} over a >= pad + reach"))
}

fn comparison_lines(t: &TransferredOperator, ps: &[f64], w: &SpaceFunction) -> (bool, Vec<String>) {
    let flow = *t.flow();
    let family = FunctionFamily::standard(SEED);
    let points = stratified_points(&flow, 1024);
    let line_points = stratified_points(&flow, 16);
    let sample = ergodic_sample(t, &family, &points).unwrap();
    let lambda = LambdaGrid::default();
    let mut ok = true;
    let mut lines = Vec::new();
    for &p in ps {
        let ergodic = strong_from_sample(t, &family, &sample, p, w, w).unwrap();
        let line = matched_line_baseline(t, p, w, w, &family, &line_points, Mode::Strong, &lambda, None).unwrap();
        let cmp = transfer_comparison(&line, &ergodic, 0.05).unwrap();
        ok &= cmp.pass;
        lines.push(format!(
            "{} p={p}: {:.4} <= {:.4}·{:.4}·1.05",
            t.line_op().descriptor(),
            ergodic.estimated_constant,
            line.estimated_constant,
            cmp.slack
        ));
    }
    (ok, lines)
}

fn ergodic_below_line() -> Outcome {
    let flow = Flow::golden();
    let one = SpaceFunction::constant(1.0).unwrap();
    let cosine = SpaceFunction::cosine(1, 0.5, 1.0).unwrap();
    let maximal = TransferredOperator::new(LineOperator::default_maximal(), flow, None, None, Some(H)).unwrap();
    let square = TransferredOperator::new(LineOperator::default_square(), flow, None, None, Some(H)).unwrap();
    let (ok_m, mut lines) = comparison_lines(&maximal, &[1.5, 2.0, 3.0], &one);
    let (ok_s, more) = comparison_lines(&square, &[2.0], &cosine);
    lines.extend(more);
    ensure(ok_m && ok_s, lines.join("; "))
}

fn weak_type() -> Outcome {
    let flow = Flow::golden();
    let family = FunctionFamily::standard(SEED);
    let one = SpaceFunction::constant(1.0).unwrap();
    let lambda = LambdaGrid::default();
    let mut constants = Vec::new();
    for (step, n) in [(H, 512), (H / 2.0, 1024)] {
        let t = TransferredOperator::new(LineOperator::default_maximal(), flow, None, None, Some(step)).unwrap();
        let r = estimate_weak_constant(&t, 1.0, &one, &lambda, &family, &stratified_points(&flow, n), Mode::WeakTwoSided)
            .unwrap();
        constants.push(r.estimated_constant);
    }
    let (c0, c1) = (constants[0], constants[1]);
    let stable = ((c1 - c0) / c0).abs() <= 0.05;
    ensure(
        c0.is_finite() && c1.is_finite() && stable && c0.min(c1) >= 0.95,
        format!("constant {c0:.6} at h = 1/1024, {c1:.6} at h = 1/2048"),
    )
}

fn closed_forms() -> Outcome {
    let chi = SampledFunction::indicator(0.0, 1.0, H).unwrap();
    let hilbert = LineOperator::default_hilbert();
    let mut worst_h = 0.0f64;
    for t in [-1.0f64, 2.0, 3.0] {
        let exact = ((1.0 - t) / t).abs().ln();
        worst_h = worst_h.max((hilbert.kernel_at(&chi, t) - exact).abs());
    }
    let m = LineOperator::default_maximal().kernel_at(&chi, -1.0);
    let a2 = ap_constant(&Weight::power(0.5, 0.0).unwrap(), 2.0, &IntervalFamily::symmetric(-8, 8).unwrap()).unwrap();
    ensure(
        worst_h <= 1e-3 && (m - 0.5).abs() <= 1e-6 && (a2 - 4.0 / 3.0).abs() <= 1e-3,
        format!("hilbert err {worst_h:.1e}, M chi(-1) = {m}, A_2 = {a2:.9}"),
    )
}

fn flow_invariants() -> Outcome {
    let circle = Flow::golden();
    let torus = Flow::torus(2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0).unwrap();
    let mut group = true;
    for k in -40i64..40 {
        let (t, s) = (k as f64 * 0.37, (k * k) as f64 * H);
        for (flow, x) in [(circle, Point::circle(0.3)), (torus, Point::torus(0.3, 0.8))] {
            group &= flow.map(t + s, &x).unwrap() == flow.map(t, &flow.map(s, &x).unwrap()).unwrap();
        }
    }
    let mut worst = Vec::new();
    let mut equi = true;
    for n in [1usize << 10, 1 << 12] {
        let mut dev = 0.0f64;
        for (a, b) in [(0.0, 0.25), (0.1, 0.6), (0.5, 0.515625)] {
            let f = SpaceFunction::arc(a, b).unwrap();
            for t in [0.5, 3.7, -12.25] {
                dev = dev.max(equimeasurability_check(&circle, &f, 0.0, t, n, &[0.5]).unwrap());
            }
        }
        equi &= dev <= 2.0 / n as f64;
        worst.push(dev);
    }
    let f = SpaceFunction::cosine(3, 1.0, 0.25).unwrap();
    let x = Point::circle(0.2);
    let mut cocycle = true;
    for m in [-300i64, 7, 1024] {
        let shifted = circle.map(m as f64 * H, &x).unwrap();
        let lhs = orbit_cells(&circle, &f, &shifted, -200, 200, H).unwrap();
        let rhs = orbit_cells(&circle, &f, &x, -200 + m, 200 + m, H).unwrap();
        cocycle &= lhs.samples() == rhs.samples();
    }
    ensure(
        group && equi && cocycle,
        format!("group law {group}, equimeasurability {:.1e} / {:.1e}, cocycle {cocycle}", worst[0], worst[1]),
    )
}

fn power_characterization() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for alpha in [-0.5, 0.0, 0.5] {
        let w = Weight::power(alpha, 0.0).unwrap();
        let c: Vec<f64> = [2, 8, 32]
            .iter()
            .map(|&k| ap_constant(&w, 2.0, &IntervalFamily::symmetric(-k, k).unwrap()).unwrap())
            .collect();
        let bound = 1.0 / (1.0 - alpha * alpha);
        ok &= c.iter().all(|v| *v <= bound * (1.0 + 1e-9));
        lines.push(format!("alpha {alpha}: {:.6} under refinement", c[2]));
    }
    let family = IntervalFamily::symmetric(-48, 4).unwrap();
    for alpha in [-1.2, 1.5] {
        let c: Vec<f64> = [-8, -24, -40]
            .iter()
            .map(|&k| ap_constant(&Weight::power(alpha, 2f64.powi(k)).unwrap(), 2.0, &family).unwrap())
            .collect();
        ok &= c.windows(2).all(|w| w[1] > w[0]) && c[2] > 1e3;
        lines.push(format!("alpha {alpha}: {:.3e} at floor 2^-40", c[2]));
    }
    ensure(ok, lines.join("; "))
}

fn reproducibility() -> Outcome {
    let shipped = [
        ("check_weight", Command::CheckWeight),
        ("apply_line", Command::Apply),
        ("apply_orbit", Command::Apply),
        ("verify_maximal", Command::Verify),
        ("sweep_square", Command::Sweep),
    ];
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut mismatched = Vec::new();
    for (name, cmd) in shipped {
        let outputs: Vec<_> = [1, 3, 1]
            .iter()
            .map(|&n| {
                let mut cfg = LoadedConfig::load(&dir.join(format!("{name}.toml"))).unwrap();
                cfg.config.sampling.threads = Some(n);
                let out = run(cmd, &cfg).unwrap();
                (out.json, out.csv)
            })
            .collect();
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            mismatched.push(name);
        }
    }
    ensure(
        mismatched.is_empty(),
        format!("{} configs, mismatched: {mismatched:?}", shipped.len()),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("transfer equals direct ergodic operators", transfer_matches_direct),
        ("truncation plateau", semilocality_plateau),
        ("ergodic constants bounded by line constants", ergodic_below_line),
        ("weak type (1,1) of the ergodic maximal operator", weak_type),
        ("closed-form oracles", closed_forms),
        ("flow group law, equimeasurability, cocycle", flow_invariants),
        ("power weight A_2 characterization", power_characterization),
        ("reproducible shipped configs", reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.1} s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {detail} [{secs:.1} s]", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
