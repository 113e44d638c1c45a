//! Matrix and vector text formats and JSON-lines traces.
//!
//! A matrix file starts with the size `n` followed by `n` rows of `n`
//! whitespace-separated entries. Entries are decimals or rationals `p/q`.
//! Blank lines and text after `#` are ignored.

use std::fmt::Write as _;

use serde_json::json;

use crate::error::{Error, Result};
use crate::iteration::IterationTrace;
use crate::linalg::Matrix;

pub fn parse_number(tok: &str) -> std::result::Result<f64, String> {
    let value = match tok.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in {tok:?}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in {tok:?}"))?;
            if q == 0.0 {
                return Err(format!("zero denominator in {tok:?}"));
            }
            p / q
        }
        None => tok.parse().map_err(|_| format!("bad number {tok:?}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("non-finite number {tok:?}"))
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut lines = content_lines(text);
    let (line, head) = lines.next().ok_or(Error::Parse { line: 0, message: "empty input".into() })?;
    let n: usize = head
        .parse()
        .map_err(|_| Error::Parse { line, message: format!("expected matrix size, got {head:?}") })?;
    if n == 0 {
        return Err(Error::Parse { line, message: "size must be positive".into() });
    }
    let mut rows = Vec::with_capacity(n);
    for (line, l) in lines {
        if rows.len() == n {
            return Err(Error::Parse { line, message: "more rows than declared".into() });
        }
        let row = l
            .split_whitespace()
            .map(parse_number)
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|message| Error::Parse { line, message })?;
        if row.len() != n {
            return Err(Error::Parse { line, message: format!("expected {n} entries, got {}", row.len()) });
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::Parse { line: 0, message: format!("expected {n} rows, got {}", rows.len()) });
    }
    Matrix::from_rows(rows)
}

/// Shortest representation that reads back to the same value.
pub fn format_matrix(m: &Matrix) -> String {
    let mut s = format!("{}\n", m.dim());
    for i in 0..m.dim() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x}")).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (line, l) in content_lines(text) {
        for tok in l.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            out.push(parse_number(tok).map_err(|message| Error::Parse { line, message })?);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse { line: 0, message: "empty vector".into() });
    }
    Ok(out)
}

/// One JSON object per step: `{"k", "z", "residual", "flags"}`.
pub fn trace_to_json_lines(trace: &IterationTrace) -> String {
    let mut s = String::new();
    for step in &trace.steps {
        let _ = writeln!(
            s,
            "{}",
            json!({"k": step.k, "z": step.z, "residual": step.residual, "flags": step.flags()})
        );
    }
    s
}
