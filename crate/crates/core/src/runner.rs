//! Config-driven runs: weight checks, operator application, verification and
//! truncation sweeps. Each run yields a JSON report, a CSV table and a short
//! summary; the thread count never changes any of them.

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::LoadedConfig;
use crate::error::{Error, Result};
use crate::flows::{stratified_points, Flow, Point};
use crate::line_operators::LineOperator;
use crate::transfer::{a1_prime_per_point, ap_prime_per_point, TransferredOperator};
use crate::verify::{
    ergodic_sample, line_baseline, matched_line_baseline, strong_from_sample, transfer_comparison,
    truncation_sweep, weak_from_sample, Comparison, InequalityReport, Mode, SCHEMA_VERSION,
};
use crate::weights::{a1_constant, a_infty_check, ap_products, default_a_infty_subsets, IntervalFamily, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckWeight,
    Apply,
    Verify,
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckWeight => "check-weight",
            Command::Apply => "apply",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub json: String,
    pub csv: String,
    pub summary: String,
    /// 0 on success, 1 when a comparison fails.
    pub exit_code: i32,
}

/// Runs `cmd` on a pool of `threads` workers (`sampling.threads`, else rayon's default).
pub fn run(cmd: Command, cfg: &LoadedConfig) -> Result<RunOutput> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.config.sampling.threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::invalid(e.to_string()))?;
    pool.install(|| match cmd {
        Command::CheckWeight => check_weight(cfg),
        Command::Apply => apply(cfg),
        Command::Verify => verify(cfg),
        Command::Sweep => sweep(cfg),
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Shortest round-trip form; `inf`/`nan` spelled out.
fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        format!("{v}").to_lowercase()
    }
}

struct Table(csv::Writer<Vec<u8>>);

impl Table {
    fn new(header: &[&str]) -> Self {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        Table(w)
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) {
        self.0.write_record(fields.into_iter().collect::<Vec<_>>()).expect("in-memory write");
    }

    fn finish(self) -> String {
        String::from_utf8(self.0.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

fn point_cols(p: &Point) -> Vec<String> {
    p.coords().iter().map(|c| num(*c)).collect()
}

fn point_header(flow: &Flow) -> &'static [&'static str] {
    match flow {
        Flow::Circle { .. } => &["x", "value"],
        Flow::Torus { .. } => &["x", "y", "value"],
    }
}

fn section<'a, T>(cfg: &LoadedConfig, s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref()
        .ok_or_else(|| cfg.error_at(0..0, format!("missing [{name}] section")))
}

fn value_or_error(r: Result<f64>) -> Value {
    match r {
        Ok(v) if v.is_finite() => json!({ "constant": v }),
        Ok(v) => json!({ "constant": null, "error": format!("not finite ({v})") }),
        Err(e) => json!({ "constant": null, "error": e.to_string() }),
    }
}

fn check_weight(cfg: &LoadedConfig) -> Result<RunOutput> {
    let ws = section(cfg, &cfg.config.weight, "weight")?;
    if ws.line.is_none() && ws.orbit.is_none() {
        return Err(cfg.error_at(0..0, "[weight] needs `line` or `orbit`"));
    }
    let p_values = cfg.p_values(&ws.p, 1.0 + f64::EPSILON)?;
    let family = cfg.interval_family(ws.family.as_ref())?;
    let delta = *ws.delta.get_ref();
    if !(delta > 0.0 && delta < 1.0) {
        return Err(cfg.error_at(ws.delta.span(), "delta must lie in (0, 1)"));
    }
    let mut out = serde_json::Map::new();
    out.insert("schema_version".into(), json!(SCHEMA_VERSION));
    out.insert("command".into(), json!("check-weight"));
    let mut csv = Table::new(&["kind", "p", "left", "right", "x", "y", "value"]);
    let mut summary = String::new();

    if let Some(lit) = &ws.line {
        let w = cfg.weight(lit)?;
        let mut ap = Vec::new();
        for &p in &p_values {
            let products = ap_products(&w, p, &family);
            if let Ok(list) = &products {
                for (i, v) in list {
                    csv.row(["ap".into(), num(p), num(i.left()), num(i.right()), String::new(), String::new(), num(*v)]);
                }
            }
            let c = products.map(|l| l.into_iter().fold(0.0f64, |m, (_, v)| m.max(v)));
            summary.push_str(&format!("A_{p} = {}\n", c.as_ref().map_or_else(|e| e.to_string(), |v| num(*v))));
            let mut entry = value_or_error(c);
            entry["p"] = json!(p);
            ap.push(entry);
        }
        let a1 = a1_constant(&w, &family);
        summary.push_str(&format!("A_1 = {}\n", a1.as_ref().map_or_else(|e| e.to_string(), |v| num(*v))));
        let a_inf = if ws.a_infty { Some(a_infty_summary(&w, &family, delta, cfg.config.sampling.seed)) } else { None };
        if let Some(v) = &a_inf {
            summary.push_str(&format!("A_inf: {v}\n"));
        }
        out.insert(
            "line".into(),
            json!({
                "weight": w.descriptor(),
                "intervals": family.len(),
                "ap": ap,
                "a1": value_or_error(a1),
                "a_infty": a_inf,
            }),
        );
    }

    if let Some(lit) = &ws.orbit {
        let w = cfg.space_weight(lit)?;
        let flow = cfg.flow()?;
        let step = cfg.step()?;
        let n = cfg.count(&cfg.config.sampling.weight_points, "weight_points")?;
        let pts = stratified_points(&flow, n);
        let mut ap = Vec::new();
        for &p in &p_values {
            let per = ap_prime_per_point(&w, &flow, p, &pts, &family, step);
            if let Ok(list) = &per {
                for (x, v) in pts.iter().zip(list) {
                    let mut xy = point_cols(x);
                    xy.resize(2, String::new());
                    csv.row(["ap_prime".into(), num(p), String::new(), String::new(), xy[0].clone(), xy[1].clone(), num(*v)]);
                }
            }
            let c = per.map(|l| l.into_iter().fold(0.0, f64::max));
            summary.push_str(&format!("A_{p}' = {}\n", c.as_ref().map_or_else(|e| e.to_string(), |v| num(*v))));
            let mut entry = value_or_error(c);
            entry["p"] = json!(p);
            ap.push(entry);
        }
        let a1 = a1_prime_per_point(&w, &flow, &pts, &family, step).map(|l| l.into_iter().fold(0.0, f64::max));
        summary.push_str(&format!("A_1' = {}\n", a1.as_ref().map_or_else(|e| e.to_string(), |v| num(*v))));
        out.insert(
            "orbit".into(),
            json!({
                "weight": w.descriptor(),
                "flow": flow.descriptor(),
                "base_points": pts.len(),
                "step": step,
                "ap_prime": ap,
                "a1_prime": value_or_error(a1),
            }),
        );
    }
    Ok(RunOutput {
        json: to_json(&Value::Object(out)),
        csv: csv.finish(),
        summary,
        exit_code: 0,
    })
}

/// Worst `A_∞` margin over the family's intervals.
fn a_infty_summary(w: &Weight, family: &IntervalFamily, delta: f64, seed: u64) -> Value {
    let mut worst = f64::INFINITY;
    let mut holds = true;
    for (k, interval) in family.intervals().enumerate() {
        let r = default_a_infty_subsets(w, interval, delta, 64, 32, seed.wrapping_add(k as u64))
            .and_then(|s| a_infty_check(w, interval, delta, &s));
        match r {
            Ok(est) => {
                worst = worst.min(est.epsilon);
                holds &= est.holds;
            }
            Err(e) => return json!({ "holds": false, "epsilon": null, "error": e.to_string() }),
        }
    }
    json!({ "holds": holds, "epsilon": worst, "delta": delta })
}

fn apply(cfg: &LoadedConfig) -> Result<RunOutput> {
    let section = section(cfg, &cfg.config.apply, "apply")?;
    let op = cfg.operator()?;
    let mut values = Vec::new();
    if section.transferred {
        let flow = cfg.flow()?;
        let f = cfg.space_function(&section.function)?;
        let t = TransferredOperator::new(op.clone(), flow, None, None, Some(cfg.step()?))?;
        let mut pts = Vec::new();
        for s in &section.points {
            let p = match (s.get_ref(), &flow) {
                (crate::config::PointSpec::Scalar(x), Flow::Circle { .. }) => Point::circle(*x),
                (crate::config::PointSpec::Pair([x, y]), Flow::Torus { .. }) => Point::torus(*x, *y),
                _ => return Err(cfg.error_at(s.span(), "point does not match the flow's space")),
            };
            pts.push(p);
        }
        if pts.is_empty() {
            pts = stratified_points(&flow, cfg.count(&cfg.config.sampling.base_points, "base_points")?);
        }
        let out = t.apply_many(&f, &pts)?;
        let mut csv = Table::new(point_header(&flow));
        for (p, v) in pts.iter().zip(&out) {
            csv.row(point_cols(p).into_iter().chain([num(*v)]));
            values.push(json!({ "point": p.coords(), "value": v }));
        }
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "apply",
            "transferred": true,
            "operator": op.descriptor(),
            "flow": flow.descriptor(),
            "function": f.descriptor(),
            "truncation_a": t.truncation_a(),
            "pad": t.pad(),
            "step": t.step(),
            "values": values,
        });
        return Ok(RunOutput {
            json: to_json(&report),
            summary: format!("{} values of {}♯ written\n", out.len(), op.descriptor()),
            csv: csv.finish(),
            exit_code: 0,
        });
    }
    let f = cfg.line_function(&section.function)?;
    let mut csv = Table::new(&["t", "value"]);
    if section.points.is_empty() {
        let out = op.apply(&f);
        for (i, v) in out.samples().iter().enumerate() {
            csv.row([num(out.centre(i)), num(*v)]);
        }
        values.extend(out.samples().iter().map(|v| json!(v)));
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "apply",
            "transferred": false,
            "operator": op.descriptor(),
            "function": section.function.get_ref(),
            "origin": out.origin(),
            "step": out.step(),
            "samples": values,
        });
        return Ok(RunOutput {
            json: to_json(&report),
            summary: format!("{} output cells written\n", out.len()),
            csv: csv.finish(),
            exit_code: 0,
        });
    }
    for s in &section.points {
        let crate::config::PointSpec::Scalar(t) = s.get_ref() else {
            return Err(cfg.error_at(s.span(), "line points are scalars"));
        };
        let v = op.kernel_at(&f, *t);
        csv.row([num(*t), num(v)]);
        values.push(json!({ "point": [t], "value": v }));
    }
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "apply",
        "transferred": false,
        "operator": op.descriptor(),
        "function": section.function.get_ref(),
        "values": values,
    });
    Ok(RunOutput {
        json: to_json(&report),
        summary: format!("{} values written\n", section.points.len()),
        csv: csv.finish(),
        exit_code: 0,
    })
}

fn transferred(cfg: &LoadedConfig, a: Option<f64>, pad: Option<f64>) -> Result<TransferredOperator> {
    let op = cfg.operator()?;
    TransferredOperator::new(op, cfg.flow()?, a, pad, Some(cfg.step()?)).map_err(|e| cfg.error_at(0..0, e.to_string()))
}

fn ratio_rows(csv: &mut Table, r: &InequalityReport) {
    for fr in &r.per_function_ratios {
        csv.row([
            r.side.clone(),
            r.mode.name().into(),
            num(r.p),
            fr.id.clone(),
            num(fr.ratio),
            fr.lambda.map_or(String::new(), num),
        ]);
    }
}

#[derive(Serialize)]
struct VerifyOutput {
    schema_version: &'static str,
    command: &'static str,
    reports: Vec<InequalityReport>,
    matched_line_reports: Vec<InequalityReport>,
    comparisons: Vec<Comparison>,
    line_baselines: Vec<InequalityReport>,
    all_pass: bool,
}

fn verify(cfg: &LoadedConfig) -> Result<RunOutput> {
    let vs = section(cfg, &cfg.config.verify, "verify")?;
    let a = vs.truncation_a.as_ref().map(|s| cfg.positive(s, "truncation_a")).transpose()?;
    let pad = vs.pad.as_ref().map(|s| cfg.positive(s, "pad")).transpose()?;
    let t = transferred(cfg, a, pad)?;
    let w = cfg.space_weight(&vs.weight_w)?;
    let v = cfg.space_weight(&vs.weight_v)?;
    let p_values = cfg.p_values(&vs.p, 1.0)?;
    let modes = cfg.modes(&vs.modes)?;
    let lambda = cfg.lambda(vs.lambda.as_ref())?;
    let tolerance = *vs.tolerance.get_ref();
    if !(tolerance >= 0.0) {
        return Err(cfg.error_at(vs.tolerance.span(), "tolerance must be nonnegative"));
    }
    let family = cfg.function_family(vs.functions.as_ref())?;
    let flow = *t.flow();
    let pts = stratified_points(&flow, cfg.count(&cfg.config.sampling.base_points, "base_points")?);
    let line_pts = stratified_points(&flow, cfg.count(&cfg.config.sampling.line_base_points, "line_base_points")?);

    let sample = ergodic_sample(&t, &family, &pts)?;
    let scales: Vec<f64> = sample
        .tf
        .iter()
        .map(|vals| vals.iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .collect();
    let mut out = VerifyOutput {
        schema_version: SCHEMA_VERSION,
        command: "verify",
        reports: Vec::new(),
        matched_line_reports: Vec::new(),
        comparisons: Vec::new(),
        line_baselines: Vec::new(),
        all_pass: true,
    };
    let mut csv = Table::new(&["side", "mode", "p", "function", "ratio", "lambda"]);
    let mut summary = String::new();
    for &mode in &modes {
        for &p in &p_values {
            let report = match mode {
                Mode::Strong => strong_from_sample(&t, &family, &sample, p, &w, &v)?,
                _ => weak_from_sample(&t, &family, &sample, p, &w, &lambda, mode)?,
            };
            ratio_rows(&mut csv, &report);
            summary.push_str(&format!("{} p={p}: ergodic {}", mode.name(), num(report.estimated_constant)));
            if vs.compare {
                let line = matched_line_baseline(&t, p, &w, &v, &family, &line_pts, mode, &lambda, Some(&scales))?;
                ratio_rows(&mut csv, &line);
                let cmp = transfer_comparison(&line, &report, tolerance)?;
                summary.push_str(&format!(
                    ", line {} x slack {:.6} -> {}",
                    num(line.estimated_constant),
                    cmp.slack,
                    if cmp.pass { "pass" } else { "FAIL" }
                ));
                out.all_pass &= cmp.pass;
                out.matched_line_reports.push(line);
                out.comparisons.push(cmp);
            }
            summary.push('\n');
            out.reports.push(report);
        }
    }
    if let Some(list) = &vs.line_functions {
        let lf = cfg.line_family(Some(list))?;
        let unit = Weight::unit();
        let lw = vs.line_weight_w.as_ref().map(|s| cfg.weight(s)).transpose()?.unwrap_or_else(|| unit.clone());
        let lv = vs.line_weight_v.as_ref().map(|s| cfg.weight(s)).transpose()?.unwrap_or(unit);
        for &mode in &modes {
            for &p in &p_values {
                let r = line_baseline(t.line_op(), p, &lw, &lv, &lf, mode, &lambda)?;
                ratio_rows(&mut csv, &r);
                summary.push_str(&format!("line baseline {} p={p}: {}\n", mode.name(), num(r.estimated_constant)));
                out.line_baselines.push(r);
            }
        }
    }
    Ok(RunOutput {
        json: to_json(&out),
        csv: csv.finish(),
        summary,
        exit_code: if out.all_pass { 0 } else { 1 },
    })
}

/// Truncations `pad + m · reach` (or `1 + m` without reach).
pub fn sweep_values(op: &LineOperator, pad: f64, multiples: &[f64]) -> Vec<f64> {
    let reach = op.semilocal_radius();
    multiples
        .iter()
        .map(|m| if reach > 0.0 { pad + m * reach } else { pad + 1.0 + m })
        .collect()
}

fn sweep(cfg: &LoadedConfig) -> Result<RunOutput> {
    let ss = section(cfg, &cfg.config.sweep, "sweep")?;
    let pad = ss.pad.as_ref().map(|s| cfg.positive(s, "pad")).transpose()?;
    let t = transferred(cfg, None, pad)?;
    let p = *ss.p.get_ref();
    if !(p >= 1.0 && p.is_finite()) {
        return Err(cfg.error_at(ss.p.span(), "p must lie in [1, inf)"));
    }
    let w = cfg.space_weight(&ss.weight_w)?;
    let v = cfg.space_weight(&ss.weight_v)?;
    let family = cfg.function_family(ss.functions.as_ref())?;
    let a_values = match &ss.a_values {
        Some(list) => list.get_ref().clone(),
        None => sweep_values(t.line_op(), t.pad(), ss.reach_multiples.get_ref()),
    };
    let pts = stratified_points(t.flow(), cfg.count(&cfg.config.sampling.base_points, "base_points")?);
    let report = truncation_sweep(&t, p, &w, &v, &family, &pts, &a_values)
        .map_err(|e| cfg.error_at(ss.a_values.as_ref().map_or(0..0, |s| s.span()), e.to_string()))?;
    let plateau_from = t.pad() + t.line_op().semilocal_radius();
    let on_plateau: Vec<f64> = report
        .truncation_sweep
        .iter()
        .filter(|s| s.a >= plateau_from)
        .map(|s| s.constant)
        .collect();
    let max_rel_change = on_plateau
        .windows(2)
        .map(|w| ((w[1] - w[0]) / w[0].abs().max(f64::MIN_POSITIVE)).abs())
        .fold(0.0, f64::max);
    let mut csv = Table::new(&["a", "constant"]);
    let mut summary = String::new();
    for s in &report.truncation_sweep {
        csv.row([num(s.a), num(s.constant)]);
        summary.push_str(&format!("a = {}: {}\n", num(s.a), num(s.constant)));
    }
    summary.push_str(&format!("max relative change from a = {}: {:e}\n", num(plateau_from), max_rel_change));
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "sweep",
        "plateau_from": plateau_from,
        "max_relative_change": max_rel_change,
        "report": report,
    });
    Ok(RunOutput {
        json: to_json(&out),
        csv: csv.finish(),
        summary,
        exit_code: 0,
    })
}
