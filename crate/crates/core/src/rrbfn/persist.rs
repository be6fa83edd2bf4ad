//! Versioned text format for trained parameters.
//!
//! ```text
//! rrbfn-params v1 input_width=8 hidden_width=32
//! # free-form metadata lines
//! recurrent_weights <input_width values>
//! centers <hidden_width * input_width values>
//! widths <hidden_width values>
//! output_weights <hidden_width values>
//! output_bias <1 value>
//! ```
//!
//! Values use the shortest exponent form that round-trips exactly.

use std::fmt::Write as _;

use super::network::RrbfnParams;
use crate::error::{CacError, Result};

const MAGIC: &str = "rrbfn-params";
const VERSION: &str = "v1";
const GROUPS: [&str; 5] = ["recurrent_weights", "centers", "widths", "output_weights", "output_bias"];

pub fn write_params(params: &RrbfnParams, metadata: &[String]) -> String {
    let mut out =
        format!("{MAGIC} {VERSION} input_width={} hidden_width={}\n", params.input_width(), params.hidden_width());
    for line in metadata {
        let _ = writeln!(out, "# {line}");
    }
    let groups: [&[f64]; 5] = [
        &params.recurrent_weights,
        &params.centers,
        &params.widths,
        &params.output_weights,
        std::slice::from_ref(&params.output_bias),
    ];
    for (name, values) in GROUPS.iter().zip(groups) {
        out.push_str(name);
        for v in values {
            let _ = write!(out, " {v:e}");
        }
        out.push('\n');
    }
    out
}

fn bad(line: usize, reason: impl Into<String>) -> CacError {
    CacError::ParamFormat { line, reason: reason.into() }
}

fn size_field(token: Option<&str>, key: &str, line: usize) -> Result<usize> {
    token
        .and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad(line, format!("expected {key}=<count>")))
}

pub fn read_params(text: &str) -> Result<RrbfnParams> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (hl, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(bad(hl, "missing rrbfn-params header"));
    }
    match tokens.next() {
        Some(VERSION) => {}
        other => return Err(bad(hl, format!("unsupported version {other:?}"))),
    }
    let input_width = size_field(tokens.next(), "input_width", hl)?;
    let hidden_width = size_field(tokens.next(), "hidden_width", hl)?;
    let expected = [input_width, hidden_width * input_width, hidden_width, hidden_width, 1];

    let mut groups: Vec<Vec<f64>> = Vec::with_capacity(GROUPS.len());
    for (lineno, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let k = groups.len();
        if k == GROUPS.len() {
            return Err(bad(lineno, "unexpected trailing record"));
        }
        let mut parts = line.split_whitespace();
        let name = parts.next().unwrap_or_default();
        if name != GROUPS[k] {
            return Err(bad(lineno, format!("expected record {}, found {name}", GROUPS[k])));
        }
        let values = parts
            .map(|t| t.parse::<f64>().map_err(|_| bad(lineno, format!("bad number {t:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != expected[k] {
            return Err(bad(lineno, format!("{name} has {} values, expected {}", values.len(), expected[k])));
        }
        groups.push(values);
    }
    if groups.len() != GROUPS.len() {
        return Err(bad(text.lines().count(), format!("missing record {}", GROUPS[groups.len()])));
    }
    let bias = groups[4][0];
    let mut it = groups.into_iter();
    let (r, c, w, o) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
    RrbfnParams::new(input_width, hidden_width, r, c, w, o, bias).map_err(|e| bad(0, e.to_string()))
}
