//! The mini-language that names test functions on the command line.
//!
//! ```text
//! product:<factor>[,<factor>...]     one factor per coordinate
//! additive:<factor>[,<factor>...]    sum of factors
//! rect:eps=<list>[,offset=<list>]    indicator of a box
//! gfunction:a=<list>                 Sobol' g-function
//! grid:<path>                        JSON {"levels": [...], "values": [...]}
//! extern:<command>                   HOSI/1 child process
//!
//! <factor> = linear(tau) | linear(mu,tau) | cosine(tau) | cosine(mu,tau)
//!          | indicator(eps) | indicator(eps,offset) | g(a) | table(v;v;...)
//! ```

use std::path::Path;
use std::time::Duration;

use super::external::ExternalEvaluator;
use crate::error::{Error, Result};
use crate::model::BlackBox;
use crate::oracles::{AdditiveFunction, Factor, GridFunction, IndexOracle, ProductFunction};

pub enum FunctionSpec {
    Product(ProductFunction),
    Additive(AdditiveFunction),
    Grid(GridFunction),
    External(ExternalEvaluator),
}

impl FunctionSpec {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_timeout(text, Duration::from_secs(60))
    }

    pub fn parse_with_timeout(text: &str, timeout: Duration) -> Result<Self> {
        let (family, body) = text
            .split_once(':')
            .ok_or_else(|| parse_err(0, "expected `<family>:<arguments>`"))?;
        let at = family.len() + 1;
        match family.trim() {
            "product" => Ok(FunctionSpec::Product(ProductFunction::new(parse_factors(body, at)?)?)),
            "additive" => Ok(FunctionSpec::Additive(AdditiveFunction::new(parse_factors(body, at)?)?)),
            "rect" => {
                let args = parse_keyed(body, at, &["eps", "offset"])?;
                let eps = required(&args, "eps", at)?;
                let offset = args
                    .iter()
                    .find(|(k, _, _)| k == "offset")
                    .map(|(_, v, _)| v.clone())
                    .unwrap_or_else(|| vec![0.0; eps.len()]);
                if offset.len() != eps.len() {
                    return Err(parse_err(
                        at,
                        &format!("{} offsets given for {} widths", offset.len(), eps.len()),
                    ));
                }
                let factors = eps
                    .iter()
                    .zip(&offset)
                    .map(|(&eps, &offset)| Factor::Indicator { eps, offset })
                    .collect();
                Ok(FunctionSpec::Product(ProductFunction::new(factors)?))
            }
            "gfunction" => {
                let args = parse_keyed(body, at, &["a"])?;
                Ok(FunctionSpec::Product(ProductFunction::g_function(&required(&args, "a", at)?)?))
            }
            "grid" => Ok(FunctionSpec::Grid(GridFunction::from_json_file(Path::new(body.trim()))?)),
            "extern" => {
                if body.trim().is_empty() {
                    return Err(parse_err(at, "missing command"));
                }
                Ok(FunctionSpec::External(ExternalEvaluator::spawn(body, timeout)?))
            }
            other => Err(parse_err(0, &format!("unknown function family `{other}`"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.black_box().dim()
    }

    pub fn black_box(&self) -> &dyn BlackBox {
        match self {
            FunctionSpec::Product(f) => f,
            FunctionSpec::Additive(f) => f,
            FunctionSpec::Grid(f) => f,
            FunctionSpec::External(f) => f,
        }
    }

    /// Exact reference values, when the family has them.
    pub fn oracle(&self) -> Option<&dyn IndexOracle> {
        match self {
            FunctionSpec::Product(f) => Some(f),
            FunctionSpec::Additive(f) => Some(f),
            FunctionSpec::Grid(f) => Some(f),
            FunctionSpec::External(_) => None,
        }
    }
}

fn parse_err(pos: usize, msg: &str) -> Error {
    Error::Parse {
        pos,
        msg: msg.to_string(),
    }
}

fn number(text: &str, pos: usize) -> Result<f64> {
    let t = text.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(pos, &format!("`{t}` is not a finite number")))
}

/// Splits on `sep` outside parentheses, returning `(piece, offset)`.
fn split_top(text: &str, sep: char, base: usize) -> Result<Vec<(&str, usize)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(parse_err(base + i, "unbalanced `)`"));
                }
            }
            c if c == sep && depth == 0 => {
                out.push((&text[start..i], base + start));
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(parse_err(base + text.len(), "unclosed `(`"));
    }
    out.push((&text[start..], base + start));
    Ok(out)
}

fn parse_factors(body: &str, base: usize) -> Result<Vec<Factor>> {
    split_top(body, ',', base)?
        .into_iter()
        .map(|(piece, pos)| parse_factor(piece, pos))
        .collect()
}

fn parse_factor(text: &str, pos: usize) -> Result<Factor> {
    let lead = text.len() - text.trim_start().len();
    let t = text.trim();
    let pos = pos + lead;
    let open = t
        .find('(')
        .ok_or_else(|| parse_err(pos, &format!("expected `name(args)`, got `{t}`")))?;
    if !t.ends_with(')') {
        return Err(parse_err(pos + t.len(), "expected `)` at end of factor"));
    }
    let name = &t[..open];
    let inner = &t[open + 1..t.len() - 1];
    let arg_pos = pos + open + 1;
    let sep = if name == "table" { ';' } else { ',' };
    let args: Vec<f64> = split_top(inner, sep, arg_pos)?
        .into_iter()
        .map(|(a, p)| number(a, p))
        .collect::<Result<_>>()?;
    let wrong = |expected: &str| {
        parse_err(
            arg_pos,
            &format!("`{name}` takes {expected}, got {} arguments", args.len()),
        )
    };
    let factor = match (name, args.as_slice()) {
        ("linear", [tau]) => Factor::Linear { mu: 1.0, tau: *tau },
        ("linear", [mu, tau]) => Factor::Linear { mu: *mu, tau: *tau },
        ("linear", _) => return Err(wrong("(tau) or (mu,tau)")),
        ("cosine", [tau]) => Factor::Cosine { mu: 1.0, tau: *tau },
        ("cosine", [mu, tau]) => Factor::Cosine { mu: *mu, tau: *tau },
        ("cosine", _) => return Err(wrong("(tau) or (mu,tau)")),
        ("indicator", [eps]) => Factor::Indicator { eps: *eps, offset: 0.0 },
        ("indicator", [eps, offset]) => Factor::Indicator { eps: *eps, offset: *offset },
        ("indicator", _) => return Err(wrong("(eps) or (eps,offset)")),
        ("g", [a]) => Factor::GFunction { a: *a },
        ("g", _) => return Err(wrong("(a)")),
        ("table", vals) if !vals.is_empty() => Factor::Table { values: vals.to_vec() },
        ("table", _) => return Err(wrong("at least one value")),
        _ => return Err(parse_err(pos, &format!("unknown factor `{name}`"))),
    };
    factor
        .validate()
        .map_err(|e| parse_err(pos, &e.to_string()))?;
    Ok(factor)
}

/// `key=v,v,...[,key=v,...]` with keys from `allowed`.
fn parse_keyed(body: &str, base: usize, allowed: &[&str]) -> Result<Vec<(String, Vec<f64>, usize)>> {
    let mut out: Vec<(String, Vec<f64>, usize)> = Vec::new();
    for (piece, pos) in split_top(body, ',', base)? {
        let lead = piece.len() - piece.trim_start().len();
        let piece_t = piece.trim();
        let value_text = match piece_t.split_once('=') {
            Some((key, value)) => {
                let key = key.trim();
                if !allowed.contains(&key) {
                    return Err(parse_err(pos + lead, &format!("unknown key `{key}`")));
                }
                if out.iter().any(|(k, _, _)| k == key) {
                    return Err(parse_err(pos + lead, &format!("duplicate key `{key}`")));
                }
                out.push((key.to_string(), Vec::new(), pos + lead));
                (value, pos + lead + key.len() + 1)
            }
            None => (piece_t, pos + lead),
        };
        let entry = out
            .last_mut()
            .ok_or_else(|| parse_err(pos, &format!("expected `{}=`", allowed[0])))?;
        entry.1.push(number(value_text.0, value_text.1)?);
    }
    Ok(out)
}

fn required(args: &[(String, Vec<f64>, usize)], key: &str, pos: usize) -> Result<Vec<f64>> {
    args.iter()
        .find(|(k, _, _)| k == key)
        .map(|(_, v, _)| v.clone())
        .ok_or_else(|| parse_err(pos, &format!("missing `{key}=`")))
}
