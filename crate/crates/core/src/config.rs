//! Experiment configs: TOML whose string values use the literal grammars of
//! [`crate::literals`].
//!
//! ```toml
//! flow = "circle golden"
//! operator = "maximal -6 4"
//!
//! [sampling]
//! step = 0.0009765625
//! base_points = 1024
//! line_base_points = 16
//! seed = 7
//!
//! [verify]
//! weight_w = "const 1"
//! weight_v = "const 1"
//! p = [1.5, 2.0, 3.0]
//! modes = ["strong", "weak_two_sided"]
//! ```
//!
//! Every diagnostic carries `path:line:col` of the offending value.

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::{Error, Result};
use crate::flows::{Flow, SpaceFunction};
use crate::line_operators::LineOperator;
use crate::literals::{
    parse_flow, parse_line_function, parse_number, parse_operator, parse_space_function, parse_weight,
};
use crate::sampled_line::{SampledFunction, DEFAULT_STEP};
use crate::verify::{FunctionFamily, LambdaGrid, LineFamily, Mode};
use crate::weights::{IntervalFamily, Weight};

pub const DEFAULT_SEED: u64 = 20_240_601;

fn spanned<T>(v: T) -> Spanned<T> {
    Spanned::new(0..0, v)
}

fn default_step() -> Spanned<f64> {
    spanned(DEFAULT_STEP)
}

fn default_base_points() -> Spanned<usize> {
    spanned(4096)
}

fn default_weight_points() -> Spanned<usize> {
    spanned(64)
}

fn default_line_points() -> Spanned<usize> {
    spanned(16)
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn default_p_list() -> Spanned<Vec<f64>> {
    spanned(vec![2.0])
}

fn default_verify_p() -> Spanned<Vec<f64>> {
    spanned(vec![1.0, 1.5, 2.0, 3.0])
}

fn default_modes() -> Vec<Spanned<String>> {
    vec![spanned("strong".to_string())]
}

fn default_unit() -> Spanned<String> {
    spanned("const 1".to_string())
}

fn default_tolerance() -> Spanned<f64> {
    spanned(crate::verify::DEFAULT_TOLERANCE)
}

fn default_true() -> bool {
    true
}

fn default_delta() -> Spanned<f64> {
    spanned(0.5)
}

fn default_sweep_p() -> Spanned<f64> {
    spanned(2.0)
}

fn default_multiples() -> Spanned<Vec<f64>> {
    spanned(vec![0.0, 1.0, 2.0, 4.0, 8.0])
}

fn is_default_seed(s: &u64) -> bool {
    *s == DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    /// Grid spacing on the line and along orbits.
    #[serde(default = "default_step")]
    pub step: Spanned<f64>,
    /// Stratified space points for integrals over the flow's space.
    #[serde(default = "default_base_points")]
    pub base_points: Spanned<usize>,
    /// Base points for orbit weight constants.
    #[serde(default = "default_weight_points")]
    pub weight_points: Spanned<usize>,
    /// Base points for the matched line-side constants.
    #[serde(default = "default_line_points")]
    pub line_base_points: Spanned<usize>,
    /// Worker threads; never affects results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default = "default_seed", skip_serializing_if = "is_default_seed")]
    pub seed: u64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            step: default_step(),
            base_points: default_base_points(),
            weight_points: default_weight_points(),
            line_base_points: default_line_points(),
            threads: None,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSection {
    /// Weight on the line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<Spanned<String>>,
    /// Weight on the flow's space, checked along orbits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit: Option<Spanned<String>>,
    #[serde(default = "default_p_list")]
    pub p: Spanned<Vec<f64>>,
    /// `symmetric k_lo k_hi` or `dyadic k_lo k_hi center_step radius`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Spanned<String>>,
    #[serde(default = "default_true")]
    pub a_infty: bool,
    #[serde(default = "default_delta")]
    pub delta: Spanned<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Scalar(f64),
    Pair([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplySection {
    /// Line function, or space function when `transferred`.
    pub function: Spanned<String>,
    /// Evaluation points; all output cells when empty (line only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Spanned<PointSpec>>,
    #[serde(default)]
    pub transferred: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Space functions; the standard family when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions: Option<Vec<Spanned<String>>>,
    /// Output weight.
    #[serde(default = "default_unit")]
    pub weight_w: Spanned<String>,
    /// Input weight.
    #[serde(default = "default_unit")]
    pub weight_v: Spanned<String>,
    #[serde(default = "default_verify_p")]
    pub p: Spanned<Vec<f64>>,
    #[serde(default = "default_modes")]
    pub modes: Vec<Spanned<String>>,
    /// `relative lo_log2 points` or `absolute l1 l2 ...`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_a: Option<Spanned<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<Spanned<f64>>,
    #[serde(default = "default_true")]
    pub compare: bool,
    #[serde(default = "default_tolerance")]
    pub tolerance: Spanned<f64>,
    /// Plain line baseline on these line functions, with line weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_functions: Option<Vec<Spanned<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_weight_w: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_weight_v: Option<Spanned<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Explicit truncations; otherwise `pad + m · reach` for each multiple.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_values: Option<Spanned<Vec<f64>>>,
    #[serde(default = "default_multiples")]
    pub reach_multiples: Spanned<Vec<f64>>,
    #[serde(default = "default_sweep_p")]
    pub p: Spanned<f64>,
    #[serde(default = "default_unit")]
    pub weight_w: Spanned<String>,
    #[serde(default = "default_unit")]
    pub weight_v: Spanned<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functions: Option<Vec<Spanned<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<Spanned<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<Spanned<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<Spanned<String>>,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apply: Option<ApplySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

/// A parsed config with its source, for positioned diagnostics.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: String,
    pub source: String,
    pub config: ExperimentConfig,
}

/// 1-based line and column of a byte offset.
pub fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(offset, |i| offset - i - 1) + 1;
    (line, col)
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let source = std::fs::read_to_string(path).map_err(|e| Error::Config {
            path: path.display().to_string(),
            line: 1,
            column: 1,
            message: e.to_string(),
        })?;
        Self::parse(&path.display().to_string(), &source)
    }

    pub fn parse(path: &str, source: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(source).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(source, s.start));
            Error::Config {
                path: path.to_string(),
                line,
                column,
                message: e.message().trim().to_string(),
            }
        })?;
        Ok(LoadedConfig {
            path: path.to_string(),
            source: source.to_string(),
            config,
        })
    }

    /// Error positioned at `span`.
    pub fn error_at(&self, span: Range<usize>, message: impl Into<String>) -> Error {
        let (line, column) = line_col(&self.source, span.start);
        Error::Config {
            path: self.path.clone(),
            line,
            column,
            message: message.into(),
        }
    }

    fn at<T>(&self, span: Range<usize>, r: Result<T>) -> Result<T> {
        r.map_err(|e| self.error_at(span, e.to_string()))
    }

    pub fn flow(&self) -> Result<Flow> {
        match &self.config.flow {
            Some(s) => self.at(s.span(), parse_flow(s.get_ref())),
            None => Ok(Flow::golden()),
        }
    }

    pub fn operator(&self) -> Result<LineOperator> {
        match &self.config.operator {
            Some(s) => self.at(s.span(), parse_operator(s.get_ref())),
            None => Err(self.error_at(0..0, "missing `operator`")),
        }
    }

    pub fn step(&self) -> Result<f64> {
        let s = &self.config.sampling.step;
        if !(*s.get_ref() > 0.0 && s.get_ref().is_finite()) {
            return Err(self.error_at(s.span(), "step must be positive"));
        }
        Ok(*s.get_ref())
    }

    pub fn count(&self, v: &Spanned<usize>, what: &str) -> Result<usize> {
        if *v.get_ref() == 0 {
            return Err(self.error_at(v.span(), format!("{what} must be at least 1")));
        }
        Ok(*v.get_ref())
    }

    pub fn weight(&self, s: &Spanned<String>) -> Result<Weight> {
        self.at(s.span(), parse_weight(s.get_ref()))
    }

    pub fn space_function(&self, s: &Spanned<String>) -> Result<SpaceFunction> {
        self.at(s.span(), parse_space_function(s.get_ref(), self.config.sampling.seed))
    }

    /// Space weight: a space-function literal that must be nonnegative.
    pub fn space_weight(&self, s: &Spanned<String>) -> Result<SpaceFunction> {
        let f = self.space_function(s)?;
        if f.lower_bound() < 0.0 {
            return Err(self.error_at(s.span(), format!("weight `{}` takes negative values", s.get_ref())));
        }
        Ok(f)
    }

    pub fn line_function(&self, s: &Spanned<String>) -> Result<SampledFunction> {
        self.at(s.span(), parse_line_function(s.get_ref(), self.step()?))
    }

    pub fn p_values(&self, v: &Spanned<Vec<f64>>, min: f64) -> Result<Vec<f64>> {
        if v.get_ref().is_empty() {
            return Err(self.error_at(v.span(), "p list is empty"));
        }
        for p in v.get_ref() {
            if !(*p >= min && p.is_finite()) {
                return Err(self.error_at(v.span(), format!("p = {p} is out of range (need {min} <= p < inf)")));
            }
        }
        Ok(v.get_ref().clone())
    }

    pub fn positive(&self, v: &Spanned<f64>, what: &str) -> Result<f64> {
        if !(*v.get_ref() > 0.0 && v.get_ref().is_finite()) {
            return Err(self.error_at(v.span(), format!("{what} must be positive")));
        }
        Ok(*v.get_ref())
    }

    pub fn interval_family(&self, s: Option<&Spanned<String>>) -> Result<IntervalFamily> {
        let Some(s) = s else {
            return Ok(IntervalFamily::symmetric(-8, 8).expect("valid default"));
        };
        let bad = |m: &str| self.error_at(s.span(), format!("bad family `{}`: {m}", s.get_ref()));
        let parts: Vec<&str> = s.get_ref().split_whitespace().collect();
        let int = |t: &str| t.parse::<i32>().map_err(|_| bad(&format!("`{t}` is not an integer")));
        let num = |t: &str| parse_number(t).ok_or_else(|| bad(&format!("`{t}` is not a number")));
        match parts.as_slice() {
            ["symmetric", lo, hi] => IntervalFamily::symmetric(int(lo)?, int(hi)?).map_err(|e| bad(&e.to_string())),
            ["dyadic", lo, hi, cs, r] => {
                IntervalFamily::dyadic(int(lo)?, int(hi)?, num(cs)?, num(r)?).map_err(|e| bad(&e.to_string()))
            }
            _ => Err(bad("expected `symmetric k_lo k_hi` or `dyadic k_lo k_hi center_step radius`")),
        }
    }

    pub fn lambda(&self, s: Option<&Spanned<String>>) -> Result<LambdaGrid> {
        let Some(s) = s else {
            return Ok(LambdaGrid::default());
        };
        let bad = |m: String| self.error_at(s.span(), format!("bad lambda grid `{}`: {m}", s.get_ref()));
        let parts: Vec<&str> = s.get_ref().split_whitespace().collect();
        let grid = match parts.as_slice() {
            ["relative", lo, n] => LambdaGrid::Relative {
                lo_log2: parse_number(lo).ok_or_else(|| bad(format!("`{lo}` is not a number")))?,
                points: n.parse().map_err(|_| bad(format!("`{n}` is not a count")))?,
            },
            ["absolute", rest @ ..] => LambdaGrid::Absolute(
                rest.iter()
                    .map(|t| parse_number(t).ok_or_else(|| bad(format!("`{t}` is not a number"))))
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(bad("expected `relative lo_log2 points` or `absolute l1 l2 ...`".into())),
        };
        grid.validate().map_err(|e| bad(e.to_string()))?;
        Ok(grid)
    }

    pub fn modes(&self, v: &[Spanned<String>]) -> Result<Vec<Mode>> {
        if v.is_empty() {
            return Err(self.error_at(0..0, "modes list is empty"));
        }
        v.iter()
            .map(|m| {
                Mode::parse(m.get_ref()).ok_or_else(|| {
                    self.error_at(
                        m.span(),
                        format!("unknown mode `{}` (strong, weak_two_sided, weak_left_only)", m.get_ref()),
                    )
                })
            })
            .collect()
    }

    /// Named space functions; the standard family when `None`.
    pub fn function_family(&self, v: Option<&Vec<Spanned<String>>>) -> Result<FunctionFamily> {
        match v {
            None => Ok(FunctionFamily::standard(self.config.sampling.seed)),
            Some(list) => {
                let members = list
                    .iter()
                    .map(|s| Ok((s.get_ref().clone(), self.space_function(s)?)))
                    .collect::<Result<Vec<_>>>()?;
                FunctionFamily::new(members).map_err(|e| self.error_at(0..0, e.to_string()))
            }
        }
    }

    pub fn line_family(&self, v: Option<&Vec<Spanned<String>>>) -> Result<LineFamily> {
        match v {
            None => LineFamily::standard(self.step()?, self.config.sampling.seed),
            Some(list) => {
                let members = list
                    .iter()
                    .map(|s| Ok((s.get_ref().clone(), self.line_function(s)?)))
                    .collect::<Result<Vec<_>>>()?;
                LineFamily::new(members)
            }
        }
    }
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
flow = "circle golden"
operator = "maximal -6 4"

[sampling]
step = 0.0009765625
base_points = 256
seed = 9

[weight]
line = "power 0.5 0"
p = [2.0, 3.0]
family = "symmetric -6 6"

[verify]
weight_w = "cosine 1 0.5 1"
p = [2.0]
modes = ["strong", "weak_left_only"]
lambda = "relative -6 12"
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = LoadedConfig::parse("sample.toml", SAMPLE).unwrap();
        assert_eq!(c.flow().unwrap(), Flow::golden());
        assert_eq!(c.operator().unwrap().descriptor(), "maximal -6 4");
        assert_eq!(*c.config.sampling.base_points.get_ref(), 256);
        let again = LoadedConfig::parse("again.toml", &c.config.to_toml()).unwrap();
        assert_eq!(again.config, c.config);
        let v = c.config.verify.as_ref().unwrap();
        assert_eq!(c.modes(&v.modes).unwrap(), vec![Mode::Strong, Mode::WeakLeftOnly]);
    }

    #[test]
    fn literal_errors_are_positioned() {
        let src = "operator = \"maximal -6 4\"\n[weight]\nline = \"power abc 0\"\n";
        let c = LoadedConfig::parse("bad.toml", src).unwrap();
        let line = c.config.weight.as_ref().unwrap().line.as_ref().unwrap();
        let err = c.weight(line).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("bad.toml:3:8: "), "{msg}");
        assert!(msg.contains("`abc`"), "{msg}");
    }

    #[test]
    fn syntax_and_unknown_keys_are_positioned() {
        let err = LoadedConfig::parse("x.toml", "operator = \"identity\"\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().starts_with("x.toml:2:1: "), "{err}");
        let err = LoadedConfig::parse("x.toml", "operator = [\n").unwrap_err();
        assert!(err.to_string().starts_with("x.toml:"), "{err}");
    }

    #[test]
    fn line_col_counts_from_one() {
        assert_eq!(line_col("ab\ncd", 0), (1, 1));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }
}
