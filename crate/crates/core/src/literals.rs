//! Text literals for functions, weights, operators and flows.
//!
//! ```text
//! line function   indicator a b | tent c r | steps v1 .. vk a b | cos k a b | const c a b
//! weight          const c | power alpha floor | piecewise (a,b,v);(a,b,v);...
//! operator        identity | maximal k_lo k_hi | maximal_radii r1 .. rk
//!                 | hilbert eps | square n_min n_max [forward]
//! flow            circle alpha | circle golden | torus alpha1 alpha2
//! space function  arc a b | cosine k [amp [offset]] | const c | steps v1 .. vk
//!                 | grid v1 .. vk | random k
//! ```
//!
//! Numbers may be written as decimals, `p/q` or `2^k`.

use crate::error::{Error, Result};
use crate::flows::{Flow, SpaceFunction};
use crate::line_operators::{LineOperator, WindowOrientation};
use crate::sampled_line::{Interval, SampledFunction};
use crate::weights::Weight;

struct Tokens<'a> {
    literal: &'a str,
    parts: Vec<&'a str>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(literal: &'a str) -> Self {
        Tokens {
            literal,
            parts: literal.split_whitespace().collect(),
            pos: 0,
        }
    }

    fn err(&self, token: &str, message: impl Into<String>) -> Error {
        Error::Literal {
            literal: self.literal.to_string(),
            token: token.to_string(),
            message: message.into(),
        }
    }

    fn head(&mut self) -> Result<&'a str> {
        self.next_raw().ok_or_else(|| self.err("", "empty literal"))
    }

    fn next_raw(&mut self) -> Option<&'a str> {
        let t = self.parts.get(self.pos).copied();
        self.pos += 1;
        t
    }

    fn number(&mut self, what: &str) -> Result<f64> {
        match self.next_raw() {
            Some(t) => parse_number(t).ok_or_else(|| self.err(t, format!("expected a number for {what}"))),
            None => Err(self.err("<end>", format!("missing {what}"))),
        }
    }

    fn integer(&mut self, what: &str) -> Result<i32> {
        match self.next_raw() {
            Some(t) => t
                .parse::<i32>()
                .map_err(|_| self.err(t, format!("expected an integer for {what}"))),
            None => Err(self.err("<end>", format!("missing {what}"))),
        }
    }

    fn rest_numbers(&mut self, what: &str) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        while let Some(t) = self.next_raw() {
            out.push(parse_number(t).ok_or_else(|| self.err(t, format!("expected a number for {what}")))?);
        }
        Ok(out)
    }

    fn finish(&mut self) -> Result<()> {
        match self.parts.get(self.pos) {
            Some(t) => Err(self.err(t, "unexpected trailing token")),
            None => Ok(()),
        }
    }

    /// Attaches the literal to an error raised while building the value.
    fn wrap<T>(&self, head: &str, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Literal { .. } => e,
            other => self.err(head, other.to_string()),
        })
    }
}

/// Decimal, `p/q` or `2^k`.
pub fn parse_number(t: &str) -> Option<f64> {
    let v = if let Some((p, q)) = t.split_once('/') {
        p.parse::<f64>().ok()? / q.parse::<f64>().ok()?
    } else if let Some(k) = t.strip_prefix("2^") {
        2f64.powf(k.parse::<f64>().ok()?)
    } else {
        t.parse::<f64>().ok()?
    };
    v.is_finite().then_some(v)
}

pub fn parse_line_function(literal: &str, step: f64) -> Result<SampledFunction> {
    let mut t = Tokens::new(literal);
    let head = t.head()?;
    let f = match head {
        "indicator" => {
            let a = t.number("a")?;
            let b = t.number("b")?;
            t.finish()?;
            SampledFunction::indicator(a, b, step)
        }
        "tent" => {
            let c = t.number("centre")?;
            let r = t.number("radius")?;
            t.finish()?;
            SampledFunction::tent(c, r, step)
        }
        "cos" => {
            let k = t.number("frequency")?;
            let a = t.number("a")?;
            let b = t.number("b")?;
            t.finish()?;
            SampledFunction::cosine(k, a, b, step)
        }
        "const" => {
            let c = t.number("value")?;
            let a = t.number("a")?;
            let b = t.number("b")?;
            t.finish()?;
            SampledFunction::constant(c, a, b, step)
        }
        "steps" => {
            let mut v = t.rest_numbers("steps")?;
            if v.len() < 3 {
                return Err(t.err(head, "steps needs at least one value and an interval a b"));
            }
            let b = v.pop().expect("length checked");
            let a = v.pop().expect("length checked");
            SampledFunction::steps(&v, a, b, step)
        }
        other => return Err(t.err(other, "unknown function kind")),
    };
    t.wrap(head, f)
}

pub fn parse_weight(literal: &str) -> Result<Weight> {
    let mut t = Tokens::new(literal);
    let head = t.head()?;
    let w = match head {
        "const" => {
            let c = t.number("value")?;
            t.finish()?;
            Weight::constant(c)
        }
        "power" => {
            let alpha = t.number("alpha")?;
            let floor = t.number("floor")?;
            t.finish()?;
            Weight::power(alpha, floor)
        }
        "piecewise" => {
            let body: String = t.parts[1..].concat();
            t.pos = t.parts.len();
            let mut pieces = Vec::new();
            for piece in body.split(';').filter(|p| !p.is_empty()) {
                let inner = piece
                    .strip_prefix('(')
                    .and_then(|p| p.strip_suffix(')'))
                    .ok_or_else(|| t.err(piece, "expected (a,b,v)"))?;
                let nums: Vec<&str> = inner.split(',').collect();
                if nums.len() != 3 {
                    return Err(t.err(piece, "expected three numbers (a,b,v)"));
                }
                let mut vals = [0.0; 3];
                for (slot, n) in vals.iter_mut().zip(&nums) {
                    *slot = parse_number(n).ok_or_else(|| t.err(n, "expected a number"))?;
                }
                let interval = Interval::new(vals[0], vals[1]).map_err(|e| t.err(piece, e.to_string()))?;
                pieces.push((interval, vals[2]));
            }
            if pieces.is_empty() {
                return Err(t.err(head, "piecewise needs at least one piece"));
            }
            Weight::piecewise(pieces)
        }
        other => return Err(t.err(other, "unknown weight kind")),
    };
    t.wrap(head, w)
}

pub fn parse_operator(literal: &str) -> Result<LineOperator> {
    let mut t = Tokens::new(literal);
    let head = t.head()?;
    let op = match head {
        "identity" => {
            t.finish()?;
            Ok(LineOperator::identity())
        }
        "maximal" => {
            let lo = t.integer("k_lo")?;
            let hi = t.integer("k_hi")?;
            t.finish()?;
            LineOperator::maximal_dyadic(lo, hi)
        }
        "maximal_radii" => {
            let radii = t.rest_numbers("radius")?;
            LineOperator::maximal(radii)
        }
        "hilbert" => {
            let eps = t.number("eps")?;
            t.finish()?;
            LineOperator::hilbert(eps)
        }
        "square" => {
            let lo = t.integer("n_min")?;
            let hi = t.integer("n_max")?;
            let orientation = match t.next_raw() {
                None => WindowOrientation::Backward,
                Some("forward") => WindowOrientation::Forward,
                Some("backward") => WindowOrientation::Backward,
                Some(other) => return Err(t.err(other, "expected `forward` or `backward`")),
            };
            t.finish()?;
            LineOperator::square_oriented(lo, hi, orientation)
        }
        other => return Err(t.err(other, "unknown operator kind")),
    };
    t.wrap(head, op)
}

pub fn parse_flow(literal: &str) -> Result<Flow> {
    let mut t = Tokens::new(literal);
    let head = t.head()?;
    let flow = match head {
        "circle" => {
            let alpha = match t.parts.get(1) {
                Some(&"golden") => {
                    t.pos += 1;
                    (5f64.sqrt() - 1.0) / 2.0
                }
                _ => t.number("alpha")?,
            };
            t.finish()?;
            Flow::circle(alpha)
        }
        "torus" => {
            let a1 = t.number("alpha1")?;
            let a2 = t.number("alpha2")?;
            t.finish()?;
            Flow::torus(a1, a2)
        }
        other => return Err(t.err(other, "unknown flow kind")),
    };
    t.wrap(head, flow)
}

/// `seed` drives `random k`.
pub fn parse_space_function(literal: &str, seed: u64) -> Result<SpaceFunction> {
    let mut t = Tokens::new(literal);
    let head = t.head()?;
    let f = match head {
        "arc" => {
            let a = t.number("a")?;
            let b = t.number("b")?;
            t.finish()?;
            SpaceFunction::arc(a, b)
        }
        "cosine" => {
            let k = t.integer("frequency")?;
            let rest = t.rest_numbers("amplitude and offset")?;
            if rest.len() > 2 {
                return Err(t.err(t.parts[4], "unexpected trailing token"));
            }
            let amp = rest.first().copied().unwrap_or(1.0);
            let offset = rest.get(1).copied().unwrap_or(0.0);
            SpaceFunction::cosine(k, amp, offset)
        }
        "const" => {
            let c = t.number("value")?;
            t.finish()?;
            SpaceFunction::constant(c)
        }
        "steps" => SpaceFunction::steps(t.rest_numbers("steps")?),
        "grid" => SpaceFunction::grid(t.rest_numbers("grid")?),
        "random" => {
            let k = t.integer("degree")?;
            t.finish()?;
            if k < 1 {
                return Err(t.err(t.parts[1], "degree must be at least 1"));
            }
            SpaceFunction::random_trig(k as usize, seed)
        }
        other => return Err(t.err(other, "unknown space function kind")),
    };
    t.wrap(head, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::ap_constant;

    #[test]
    fn numbers() {
        assert_eq!(parse_number("1/64"), Some(1.0 / 64.0));
        assert_eq!(parse_number("2^-6"), Some(1.0 / 64.0));
        assert_eq!(parse_number("0.5"), Some(0.5));
        assert_eq!(parse_number("x"), None);
        assert_eq!(parse_number("1/0"), None);
    }

    #[test]
    fn operators_round_trip() {
        for lit in ["identity", "maximal -6 4", "hilbert 0.015625", "square -6 4", "square -3 2 forward"] {
            assert_eq!(parse_operator(lit).unwrap().descriptor(), lit);
        }
        let m = parse_operator("maximal_radii 1 2 4").unwrap();
        assert_eq!(m.descriptor(), "maximal 0 2");
    }

    #[test]
    fn weights_round_trip() {
        for lit in ["const 1", "power 0.5 0", "piecewise (0,1,2);(2,3,0.5)"] {
            let w = parse_weight(lit).unwrap();
            assert_eq!(parse_weight(&w.descriptor()).unwrap(), w);
        }
        let w = parse_weight("power 0.5 0").unwrap();
        let fam = crate::weights::IntervalFamily::symmetric(-4, 4).unwrap();
        assert!((ap_constant(&w, 2.0, &fam).unwrap() - 4.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn errors_name_the_token() {
        match parse_weight("power abc 0") {
            Err(Error::Literal { token, .. }) => assert_eq!(token, "abc"),
            other => panic!("{other:?}"),
        }
        match parse_operator("hilbret 0.1") {
            Err(Error::Literal { token, .. }) => assert_eq!(token, "hilbret"),
            other => panic!("{other:?}"),
        }
        match parse_operator("square 1 2 sideways") {
            Err(Error::Literal { token, .. }) => assert_eq!(token, "sideways"),
            other => panic!("{other:?}"),
        }
        assert!(parse_flow("circle").is_err());
        assert!(parse_weight("const 1 2").is_err());
        assert!(parse_operator("hilbert 2").is_err());
        assert!(parse_weight("").is_err());
    }

    #[test]
    fn flows_and_space_functions() {
        let f = parse_flow("circle golden").unwrap();
        assert_eq!(f, Flow::golden());
        let t = parse_flow("torus 0.5 1/3").unwrap();
        assert_eq!(parse_flow(&t.descriptor()).unwrap(), t);
        for lit in ["arc 0 0.5", "cosine 1 0.5 1", "const 2", "steps 1 2 3"] {
            let s = parse_space_function(lit, 0).unwrap();
            assert_eq!(parse_space_function(&s.descriptor(), 0).unwrap(), s);
        }
        assert_eq!(
            parse_space_function("cosine 3", 0).unwrap(),
            SpaceFunction::cosine(3, 1.0, 0.0).unwrap()
        );
        assert_ne!(
            parse_space_function("random 4", 1).unwrap(),
            parse_space_function("random 4", 2).unwrap()
        );
    }

    #[test]
    fn line_functions() {
        let step = 1.0 / 1024.0;
        let f = parse_line_function("indicator 0 1", step).unwrap();
        assert!((f.integrate_between(-1.0, 2.0) - 1.0).abs() < 1e-12);
        let s = parse_line_function("steps 1 2 0 1", step).unwrap();
        assert!((s.integrate_between(0.0, 1.0) - 1.5).abs() < 1e-12);
        assert!(parse_line_function("tent 0", step).is_err());
        assert!(parse_line_function("blob 1", step).is_err());
    }
}
