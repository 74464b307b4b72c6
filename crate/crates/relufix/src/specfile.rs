//! Line-oriented text format for specifications.
//!
//! ```text
//! # ACAS-style property: weak alert stays bounded far away.
//! property phi1
//! box 55947.691 inf -inf inf -inf inf 1145 inf 0 60
//! y1 <= 1500
//!
//! property reversal
//! box 0 1 0 1
//! clause -1*y1 + 1*y2 + 0.5 >= 0 | y3 > 0
//! ```
//!
//! A `property` line opens a property, `box` gives its input box as
//! lower/upper pairs (`inf` and `-inf` are accepted), and every following
//! line adds clauses until the next `property`. `#` starts a comment.
//!
//! A constraint line is either a comparison between simple expressions —
//! outputs like `y1` (1-based), numbers, or `min(...)`/`max(...)` over
//! outputs — or a raw linear atom such as `2*y1 - y2 + 3 >= 0`. Comparisons
//! are desugared into clauses of linear atoms; `<` and `>` are strict.
//! Alternatives can be joined with `|` into a single clause, as long as each
//! alternative desugars to exactly one clause (so conjunction-producing forms
//! like `min(y1,y2) >= 0` cannot appear inside a `|`).
//!
//! [`format_specification`] prints the desugared canonical form (full
//! coefficient lists, `clause`-prefixed lines); parsing it back reproduces
//! the specification structurally, including exact float values.

use std::path::Path;

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::spec::{le_clauses, Atom, Clause, Property, Specification, Term};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line: Some(line), message: message.into() }
}

/// Parses the text format described in the module documentation.
pub fn parse_specification(text: &str) -> Result<Specification> {
    struct Open {
        name: String,
        line: usize,
        input_box: Option<Bounds>,
        clauses: Vec<Clause>,
    }

    let mut properties = Vec::new();
    let mut open: Option<Open> = None;

    let close = |open: Option<Open>, properties: &mut Vec<Property>| -> Result<()> {
        if let Some(p) = open {
            let input_box = p
                .input_box
                .ok_or_else(|| parse_err(p.line, format!("property {:?} has no box line", p.name)))?;
            if p.clauses.is_empty() {
                return Err(parse_err(p.line, format!("property {:?} has no clauses", p.name)));
            }
            properties.push(Property::new(&p.name, input_box, p.clauses)?);
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix("property") {
            if name.starts_with(char::is_whitespace) || name.is_empty() {
                let name = name.trim();
                if name.is_empty() {
                    return Err(parse_err(line_no, "property line needs a name"));
                }
                close(open.take(), &mut properties)?;
                open = Some(Open {
                    name: name.to_string(),
                    line: line_no,
                    input_box: None,
                    clauses: Vec::new(),
                });
                continue;
            }
        }
        let current = open
            .as_mut()
            .ok_or_else(|| parse_err(line_no, "expected a property line first"))?;
        if let Some(rest) = line.strip_prefix("box") {
            if rest.starts_with(char::is_whitespace) {
                if current.input_box.is_some() {
                    return Err(parse_err(line_no, "duplicate box line"));
                }
                current.input_box = Some(parse_box(rest.trim(), line_no)?);
                continue;
            }
        }
        if current.input_box.is_none() {
            return Err(parse_err(line_no, "the box line must precede clauses"));
        }
        let constraint = line.strip_prefix("clause").map(str::trim).unwrap_or(line);
        current.clauses.extend(parse_constraint(constraint, line_no)?);
    }
    close(open, &mut properties)?;
    if properties.is_empty() {
        return Err(Error::Parse { line: None, message: "no properties found".into() });
    }
    Specification::new(properties)
}

fn parse_box(rest: &str, line_no: usize) -> Result<Bounds> {
    let values: Vec<f64> = rest
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| parse_err(line_no, format!("invalid bound {tok:?}")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() || values.len() % 2 != 0 {
        return Err(parse_err(
            line_no,
            format!("box needs lower/upper pairs, got {} values", values.len()),
        ));
    }
    let (lower, upper): (Vec<f64>, Vec<f64>) =
        values.chunks(2).map(|pair| (pair[0], pair[1])).unzip();
    Bounds::new(lower, upper).map_err(|e| parse_err(line_no, e.to_string()))
}

/// Parses one constraint line into clauses; `|` joins single-clause
/// alternatives into one disjunctive clause.
fn parse_constraint(text: &str, line_no: usize) -> Result<Vec<Clause>> {
    let segments: Vec<&str> = text.split('|').collect();
    if segments.len() == 1 {
        return parse_comparison(segments[0], line_no);
    }
    let mut merged: Clause = Vec::new();
    for segment in segments {
        let mut clauses = parse_comparison(segment, line_no)?;
        if clauses.len() != 1 {
            return Err(parse_err(
                line_no,
                format!(
                    "{:?} expands to {} clauses and cannot be an | alternative",
                    segment.trim(),
                    clauses.len()
                ),
            ));
        }
        merged.append(&mut clauses.pop().expect("length checked"));
    }
    Ok(vec![merged])
}

fn parse_comparison(text: &str, line_no: usize) -> Result<Vec<Clause>> {
    let (lhs, op, rhs) = split_comparison(text, line_no)?;
    let strict = matches!(op, "<" | ">");
    // min/max force the expression form; everything else is linear algebra.
    if text.contains("min(") || text.contains("max(") {
        let a = parse_term(lhs, line_no)?;
        let b = parse_term(rhs, line_no)?;
        let clauses = match op {
            "<" | "<=" => le_clauses(&a, &b, strict),
            ">" | ">=" => le_clauses(&b, &a, strict),
            _ => unreachable!(),
        };
        return Ok(clauses);
    }
    let (a_coeffs, a_off) = parse_linear(lhs, line_no)?;
    let (b_coeffs, b_off) = parse_linear(rhs, line_no)?;
    // a <= b becomes the single atom b - a >= 0 (shifted when strict).
    let (mut lo_c, lo_o, mut hi_c, hi_o) = match op {
        "<" | "<=" => (a_coeffs, a_off, b_coeffs, b_off),
        ">" | ">=" => (b_coeffs, b_off, a_coeffs, a_off),
        _ => unreachable!(),
    };
    let dim = lo_c.len().max(hi_c.len());
    lo_c.resize(dim, 0.0);
    hi_c.resize(dim, 0.0);
    let coeffs: Vec<f64> = hi_c.iter().zip(&lo_c).map(|(h, l)| h - l).collect();
    if coeffs.iter().all(|c| *c == 0.0) {
        return Err(parse_err(line_no, "constraint references no outputs"));
    }
    Ok(vec![vec![Atom::new(coeffs, hi_o - lo_o, strict)]])
}

/// Splits at the unique top-level comparison operator.
fn split_comparison<'t>(text: &'t str, line_no: usize) -> Result<(&'t str, &'t str, &'t str)> {
    let bytes = text.as_bytes();
    let mut depth = 0usize;
    let mut found: Option<(usize, usize)> = None; // (start, len)
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'(' => depth += 1,
            b')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| parse_err(line_no, "unbalanced parentheses"))?;
            }
            b'<' | b'>' if depth == 0 => {
                let len = if bytes.get(i + 1) == Some(&b'=') { 2 } else { 1 };
                if found.is_some() {
                    return Err(parse_err(line_no, "more than one comparison operator"));
                }
                found = Some((i, len));
                i += len;
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    if depth != 0 {
        return Err(parse_err(line_no, "unbalanced parentheses"));
    }
    let (start, len) =
        found.ok_or_else(|| parse_err(line_no, "expected a comparison operator"))?;
    Ok((&text[..start], &text[start..start + len], &text[start + len..]))
}

/// Parses a simple expression: `y<k>`, a number, or `min`/`max` of outputs.
fn parse_term(text: &str, line_no: usize) -> Result<Term> {
    let text = text.trim();
    for prefix in ["min(", "max("] {
        if let Some(inner) = text.strip_prefix(prefix).and_then(|t| t.strip_suffix(')')) {
            let indices: Vec<usize> = inner
                .split(',')
                .map(|arg| parse_output_ref(arg.trim(), line_no))
                .collect::<Result<_>>()?;
            if indices.is_empty() {
                return Err(parse_err(line_no, format!("{prefix}...) needs arguments")));
            }
            return Ok(if prefix == "min(" { Term::Min(indices) } else { Term::Max(indices) });
        }
    }
    if let Ok(index) = parse_output_ref(text, line_no) {
        return Ok(Term::Out(index));
    }
    text.parse::<f64>()
        .map(Term::Const)
        .map_err(|_| parse_err(line_no, format!("cannot parse expression {text:?}")))
}

/// Parses a 1-based output reference `y<k>` into its 0-based index.
fn parse_output_ref(text: &str, line_no: usize) -> Result<usize> {
    let digits = text
        .strip_prefix('y')
        .ok_or_else(|| parse_err(line_no, format!("expected an output like y1, got {text:?}")))?;
    let k: usize = digits
        .parse()
        .map_err(|_| parse_err(line_no, format!("invalid output reference {text:?}")))?;
    if k == 0 {
        return Err(parse_err(line_no, "output references are 1-based"));
    }
    Ok(k - 1)
}

/// Parses a linear combination of outputs and constants into coefficients
/// (indexed by output) and an offset.
fn parse_linear(text: &str, line_no: usize) -> Result<(Vec<f64>, f64)> {
    let mut coeffs: Vec<f64> = Vec::new();
    let mut offset = 0.0;
    for chunk in split_linear_chunks(text) {
        let chunk = chunk.trim();
        if chunk.is_empty() || chunk == "+" {
            continue;
        }
        let (sign, body) = match chunk.strip_prefix('-') {
            Some(rest) => (-1.0, rest.trim_start()),
            None => (1.0, chunk.strip_prefix('+').unwrap_or(chunk).trim_start()),
        };
        let (value, target) = match body.split_once('*') {
            Some((num, yref)) => {
                let v: f64 = num.trim().parse().map_err(|_| {
                    parse_err(line_no, format!("invalid coefficient {:?}", num.trim()))
                })?;
                (v, Some(parse_output_ref(yref.trim(), line_no)?))
            }
            None if body.starts_with('y') => (1.0, Some(parse_output_ref(body, line_no)?)),
            None => {
                let v: f64 = body
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("invalid term {body:?}")))?;
                (v, None)
            }
        };
        match target {
            Some(index) => {
                if coeffs.len() <= index {
                    coeffs.resize(index + 1, 0.0);
                }
                coeffs[index] += sign * value;
            }
            None => offset += sign * value,
        }
    }
    if coeffs.is_empty() && offset == 0.0 && text.trim() != "0" && !text.trim().is_empty() {
        return Err(parse_err(line_no, format!("cannot parse linear expression {text:?}")));
    }
    Ok((coeffs, offset))
}

/// Splits a linear expression at top-level `+`/`-` signs, keeping the sign
/// with the following chunk and never splitting inside exponents like `1e-6`.
fn split_linear_chunks(text: &str) -> Vec<String> {
    let mut chunks = Vec::new();
    let mut current = String::new();
    let mut prev_meaningful: Option<char> = None;
    for c in text.chars() {
        let is_sign = c == '+' || c == '-';
        let glued = matches!(prev_meaningful, Some('e') | Some('E') | Some('*') | Some('+') | Some('-') | None);
        if is_sign && !glued {
            chunks.push(std::mem::take(&mut current));
        }
        current.push(c);
        if !c.is_whitespace() {
            prev_meaningful = Some(c);
        }
    }
    chunks.push(current);
    chunks
}

/// Prints the canonical desugared form; parsing it back reproduces the
/// specification structurally.
pub fn format_specification(spec: &Specification) -> String {
    let mut out = String::new();
    for prop in &spec.properties {
        out.push_str(&format!("property {}\n", prop.name));
        out.push_str("box");
        for (l, u) in prop.input_box.lower.iter().zip(&prop.input_box.upper) {
            out.push_str(&format!(" {l} {u}"));
        }
        out.push('\n');
        for clause in &prop.clauses {
            out.push_str("clause ");
            let atoms: Vec<String> = clause.iter().map(format_atom).collect();
            out.push_str(&atoms.join(" | "));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

fn format_atom(atom: &Atom) -> String {
    let mut terms: Vec<String> = atom
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{c}*y{}", i + 1))
        .collect();
    terms.push(format!("{}", atom.offset));
    let op = if atom.strict { ">" } else { ">=" };
    format!("{} {op} 0", terms.join(" + "))
}

/// Reads and parses a specification file.
pub fn load_specification(path: impl AsRef<Path>) -> Result<Specification> {
    parse_specification(&std::fs::read_to_string(path)?)
}

/// Writes the canonical form of a specification.
pub fn save_specification(spec: &Specification, path: impl AsRef<Path>) -> Result<()> {
    Ok(std::fs::write(path, format_specification(spec))?)
}
