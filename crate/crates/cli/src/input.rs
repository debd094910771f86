//! Spec files: a single JSON document describing one process.

use std::fmt;
use std::path::Path;

use kemeny_core::ctmc::{bd_generator, mrp_from_generator, BirthDeathParams, Generator};
use kemeny_core::nalgebra::{DMatrix, DVector};
use kemeny_core::prelude::*;
use serde::Deserialize;
use std::result::Result;

pub const BUILTINS: [&str; 4] = ["dtmc2", "mrp2", "ctmc2", "bd3"];

/// Canonical spec text of a built-in example.
pub fn builtin(name: &str) -> Option<&'static str> {
    Some(match name {
        "dtmc2" => "{\n  \"kind\": \"dtmc\",\n  \"P\": [\n    [0.0, 1.0],\n    [1.0, 0.0]\n  ]\n}\n",
        "mrp2" => "{\n  \"kind\": \"mrp\",\n  \"P\": [\n    [0.5, 0.5],\n    [0.25, 0.75]\n  ],\n  \"mu\": [2.0, 4.0]\n}\n",
        "ctmc2" => "{\n  \"kind\": \"ctmc\",\n  \"Q\": [\n    [-1.0, 1.0],\n    [2.0, -2.0]\n  ]\n}\n",
        "bd3" => "{\n  \"kind\": \"bd\",\n  \"alpha\": [1.0, 2.0],\n  \"beta\": [1.0, 2.0]\n}\n",
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Dtmc,
    Mrp,
    Ctmc,
    Bd,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Dtmc => "dtmc",
            Kind::Mrp => "mrp",
            Kind::Ctmc => "ctmc",
            Kind::Bd => "bd",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    kind: Kind,
    #[serde(rename = "P")]
    p: Option<Vec<Vec<f64>>>,
    mu: Option<Vec<f64>>,
    #[serde(rename = "P1")]
    p1: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Q")]
    q: Option<Vec<Vec<f64>>>,
    alpha: Option<Vec<f64>>,
    beta: Option<Vec<f64>>,
    tol: Option<f64>,
    seed: Option<u64>,
}

/// A loaded process. Continuous-time inputs keep their generator.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub source: String,
    pub kind: Kind,
    pub spec: MrpSpec,
    pub generator: Option<Generator>,
    pub seed: Option<u64>,
}

/// Input errors; all map to exit code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub source: String,
    pub line: Option<usize>,
    /// Taxonomy name, e.g. `RowSumViolation`.
    pub category: &'static str,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(
                f,
                "{}:{}: {}: {}",
                self.source, line, self.category, self.message
            ),
            None => write!(f, "{}: {}: {}", self.source, self.category, self.message),
        }
    }
}

/// Reads a spec from a file, falling back to a built-in of the same name.
pub fn load(arg: &str, tol_override: Option<f64>) -> Result<Loaded, InputError> {
    if Path::new(arg).exists() {
        let text = std::fs::read_to_string(arg).map_err(|e| InputError {
            source: arg.to_string(),
            line: None,
            category: "Io",
            message: e.to_string(),
        })?;
        return parse(arg, &text, tol_override);
    }
    match builtin(arg) {
        Some(text) => parse(arg, text, tol_override),
        None => Err(InputError {
            source: arg.to_string(),
            line: None,
            category: "Io",
            message: format!(
                "no such file, and not a built-in example ({})",
                BUILTINS.join(", ")
            ),
        }),
    }
}

pub fn parse(source: &str, text: &str, tol_override: Option<f64>) -> Result<Loaded, InputError> {
    let err = |line: Option<usize>, category: &'static str, message: String| InputError {
        source: source.to_string(),
        line,
        category,
        message,
    };
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| {
        let category = if e.is_syntax() || e.is_eof() {
            "Syntax"
        } else {
            "Schema"
        };
        // serde_json appends " at line L column C"; the line is reported separately
        let msg = e.to_string();
        let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
        err(Some(e.line()), category, msg)
    })?;

    let present = [
        ("P", raw.p.is_some()),
        ("mu", raw.mu.is_some()),
        ("P1", raw.p1.is_some()),
        ("Q", raw.q.is_some()),
        ("alpha", raw.alpha.is_some()),
        ("beta", raw.beta.is_some()),
    ];
    let (required, optional): (&[&str], &[&str]) = match raw.kind {
        Kind::Dtmc => (&["P"], &[]),
        Kind::Mrp => (&["P"], &["mu", "P1"]),
        Kind::Ctmc => (&["Q"], &[]),
        Kind::Bd => (&["alpha", "beta"], &[]),
    };
    for (field, is_present) in present {
        if is_present && !required.contains(&field) && !optional.contains(&field) {
            return Err(err(
                key_line(text, field),
                "Schema",
                format!(
                    "field `{field}` is not allowed for kind `{}`",
                    raw.kind.name()
                ),
            ));
        }
    }
    for field in required {
        if !present.iter().any(|(f, p)| f == field && *p) {
            return Err(err(
                key_line(text, "kind"),
                "Schema",
                format!("kind `{}` requires field `{field}`", raw.kind.name()),
            ));
        }
    }
    if raw.kind == Kind::Mrp && raw.mu.is_some() == raw.p1.is_some() {
        return Err(err(
            key_line(text, "kind"),
            "Schema",
            "kind `mrp` requires exactly one of `mu` or `P1`".into(),
        ));
    }
    let tol = tol_override.or(raw.tol).unwrap_or(DEFAULT_VALIDATION_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(err(
            key_line(text, "tol"),
            "Schema",
            format!("tol must be positive, got {tol}"),
        ));
    }

    let core = |key: &str, e: Error| -> InputError {
        let line = match &e {
            Error::RowSumViolation { row, .. }
            | Error::NegativeEntry { row, .. }
            | Error::NonFinite { row, .. } => row_line(text, key, *row).or(key_line(text, key)),
            Error::NonpositiveSojourn { .. } => key_line(text, "mu").or(key_line(text, key)),
            _ => key_line(text, key),
        };
        err(line, category(&e), describe(&e))
    };

    let matrix = |key: &str, rows: &[Vec<f64>]| -> Result<DMatrix<f64>, InputError> {
        let m = rows.len();
        if m == 0 {
            return Err(core(key, Error::Empty));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(err(
                    row_line(text, key, i).or(key_line(text, key)),
                    "NotSquare",
                    format!(
                        "`{key}` row {} has {} entries, expected {m}",
                        i + 1,
                        r.len()
                    ),
                ));
            }
        }
        Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
    };

    let (spec, generator) = match raw.kind {
        Kind::Dtmc | Kind::Mrp => {
            let p = matrix("P", raw.p.as_deref().unwrap_or_default())?;
            let chain = StochasticMatrix::new(p, tol).map_err(|e| core("P", e))?;
            let spec = match (raw.kind, &raw.mu, &raw.p1) {
                (Kind::Dtmc, _, _) => MrpSpec::dtmc(chain),
                (_, Some(mu), _) => {
                    if mu.len() != chain.dim() {
                        return Err(core(
                            "mu",
                            Error::DimensionMismatch {
                                expected: chain.dim(),
                                found: mu.len(),
                            },
                        ));
                    }
                    MrpSpec::with_means(chain, DVector::from_vec(mu.clone()))
                        .map_err(|e| core("mu", e))?
                }
                (_, None, Some(p1)) => {
                    let p1 = matrix("P1", p1)?;
                    if p1.nrows() != chain.dim() {
                        return Err(core(
                            "P1",
                            Error::DimensionMismatch {
                                expected: chain.dim(),
                                found: p1.nrows(),
                            },
                        ));
                    }
                    MrpSpec::with_moment_matrix(chain, p1).map_err(|e| core("P1", e))?
                }
                _ => unreachable!("field presence checked above"),
            };
            (spec, None)
        }
        Kind::Ctmc => {
            let q = matrix("Q", raw.q.as_deref().unwrap_or_default())?;
            let gen = Generator::new(q, tol).map_err(|e| core("Q", e))?;
            let spec = mrp_from_generator(&gen).map_err(|e| core("Q", e))?;
            (spec, Some(gen))
        }
        Kind::Bd => {
            let alpha = raw.alpha.clone().unwrap_or_default();
            let beta = raw.beta.clone().unwrap_or_default();
            let params = BirthDeathParams::new(alpha, beta).map_err(|e| {
                let key = match &e {
                    Error::InvalidRate { name, .. } if name.starts_with("beta") => "beta",
                    _ => "alpha",
                };
                core(key, e)
            })?;
            let gen = bd_generator(&params);
            let spec = mrp_from_generator(&gen).map_err(|e| core("alpha", e))?;
            (spec, Some(gen))
        }
    };

    Ok(Loaded {
        source: source.to_string(),
        kind: raw.kind,
        spec,
        generator,
        seed: raw.seed,
    })
}

/// Taxonomy name of a library error.
pub fn category(e: &Error) -> &'static str {
    match e {
        Error::NotSquare { .. } => "NotSquare",
        Error::Empty => "Empty",
        Error::NonFinite { .. } => "NonFinite",
        Error::NegativeEntry { .. } => "NegativeEntry",
        Error::RowSumViolation { .. } => "RowSumViolation",
        Error::Reducible => "Reducible",
        Error::NonpositiveSojourn { .. } => "NonpositiveSojourn",
        Error::InvalidMoments(_) => "InvalidMoments",
        Error::DimensionMismatch { .. } => "DimensionMismatch",
        Error::Singular { .. } => "Singular",
        Error::DegenerateU(_) => "DegenerateU",
        Error::NoConvergence(_) => "NoConvergence",
        Error::RouteMismatch => "RouteMismatch",
        Error::ZeroDiagonal { .. } => "ZeroDiagonal",
        Error::InvalidRate { .. } => "InvalidRate",
        Error::StateOutOfRange { .. } => "StateOutOfRange",
        Error::InvalidArgument(_) => "InvalidArgument",
    }
}

/// Library error text with states and rows numbered from 1.
pub fn describe(e: &Error) -> String {
    match e {
        Error::NonFinite { row, col } => format!("non-finite entry at ({}, {})", row + 1, col + 1),
        Error::NegativeEntry { row, col } => {
            format!("negative entry at ({}, {})", row + 1, col + 1)
        }
        Error::RowSumViolation { row, sum } => {
            format!("row {} sums to {sum}, outside tolerance", row + 1)
        }
        Error::NonpositiveSojourn { state, value } => {
            format!(
                "mean sojourn time of state {} is not positive ({value})",
                state + 1
            )
        }
        Error::ZeroDiagonal { state, value } => {
            format!(
                "generator diagonal entry of state {} is not strictly negative ({value})",
                state + 1
            )
        }
        other => other.to_string(),
    }
}

/// 1-based line of the first occurrence of `"key"`.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let pos = text.find(&format!("\"{key}\""))?;
    Some(line_at(text, pos))
}

/// 1-based line where row `row` of the matrix under `key` begins.
fn row_line(text: &str, key: &str, row: usize) -> Option<usize> {
    let start = text.find(&format!("\"{key}\""))?;
    let mut depth = 0usize;
    let mut seen = 0usize;
    for (offset, c) in text[start..].char_indices() {
        match c {
            '[' => {
                depth += 1;
                if depth == 2 {
                    if seen == row {
                        return Some(line_at(text, start + offset));
                    }
                    seen += 1;
                }
            }
            ']' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return None;
                }
            }
            _ => {}
        }
    }
    None
}

fn line_at(text: &str, pos: usize) -> usize {
    text[..pos].matches('\n').count() + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse() {
        for name in BUILTINS {
            parse(name, builtin(name).unwrap(), None).unwrap();
        }
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn row_errors_point_at_the_row() {
        let text =
            "{\n  \"kind\": \"dtmc\",\n  \"P\": [\n    [0.5, 0.5],\n    [0.5, 0.6]\n  ]\n}\n";
        let e = parse("x.json", text, None).unwrap_err();
        assert_eq!(e.category, "RowSumViolation");
        assert_eq!(e.line, Some(5));
        assert!(e.message.contains("row 2"));
    }

    #[test]
    fn reducible_points_at_matrix() {
        let text = "{\"kind\": \"dtmc\",\n\"P\": [[1, 0], [0, 1]]}";
        let e = parse("x.json", text, None).unwrap_err();
        assert_eq!(e.category, "Reducible");
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn schema_errors() {
        let cases = [
            ("{\"kind\": \"dtmc\", \"P\": [[1]], \"Q\": [[1]]}", "Schema"),
            ("{\"kind\": \"mrp\", \"P\": [[1]]}", "Schema"),
            ("{\"kind\": \"ctmc\"}", "Schema"),
            ("{\"kind\": \"weird\", \"P\": [[1]]}", "Schema"),
            ("{\"kind\": \"dtmc\", \"P\": [[1]], \"extra\": 1}", "Schema"),
            ("{\"kind\": \"dtmc\", \"P\": [[1]]", "Syntax"),
            ("{\"kind\": \"dtmc\", \"P\": [[0.5, 0.5]]}", "NotSquare"),
            ("{\"kind\": \"dtmc\", \"P\": []}", "Empty"),
            (
                "{\"kind\": \"mrp\", \"P\": [[1]], \"mu\": [0]}",
                "NonpositiveSojourn",
            ),
            (
                "{\"kind\": \"bd\", \"alpha\": [1], \"beta\": [-1]}",
                "InvalidRate",
            ),
            (
                "{\"kind\": \"ctmc\", \"Q\": [[0, 0], [1, -1]]}",
                "ZeroDiagonal",
            ),
        ];
        for (text, cat) in cases {
            let e = parse("x.json", text, None).unwrap_err();
            assert_eq!(e.category, cat, "{text}: {e}");
        }
    }

    #[test]
    fn tolerance_override() {
        let text = "{\"kind\": \"dtmc\", \"P\": [[0.5, 0.5001], [0.5, 0.5]], \"tol\": 1e-3}";
        assert!(parse("x", text, None).is_ok());
        assert!(parse("x", text, Some(1e-9)).is_err());
    }
}
