//! Plain-text embedding export: a `<vocab_size> <dim>` header, then one
//! `token v_1 … v_d` line per token with 6 significant digits.

use std::io::Write;
use std::path::Path;

use crate::model::Model;
use crate::{Error, Real, Result};

pub fn write_embeddings<W: Write>(model: &Model, mut out: W) -> std::io::Result<()> {
    let input = &model.embeddings.input;
    writeln!(out, "{} {}", model.vocab.len(), input.cols())?;
    let mut line = String::new();
    for (i, token) in model.vocab.tokens().iter().enumerate() {
        line.clear();
        line.push_str(token);
        for &v in input.row(i) {
            line.push(' ');
            line.push_str(&format_g6(v));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()
}

pub fn export_embeddings(model: &Model, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_embeddings(model, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Formats like C's `%g`: 6 significant digits, trailing zeros dropped,
/// scientific notation outside `[1e-4, 1e6)`.
pub fn format_g6(v: Real) -> String {
    let v = v as f64;
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Parses an export back into `(tokens, row-major values, dim)`.
pub fn read_embeddings(text: &str) -> Result<(Vec<String>, Vec<Real>, usize)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse("export:1", "missing header"))?;
    let mut parts = header.split_whitespace().map(str::parse::<usize>);
    let (Some(Ok(n)), Some(Ok(dim)), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(Error::parse("export:1", "expected `<vocab_size> <dim>`"));
    };
    let mut tokens = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n * dim);
    for (i, line) in lines.enumerate() {
        let loc = format!("export:{}", i + 2);
        let mut fields = line.split(' ');
        let token = fields.next().filter(|t| !t.is_empty()).ok_or_else(|| Error::parse(&loc, "missing token"))?;
        let row: Vec<Real> = fields
            .map(|f| f.parse::<Real>().map_err(|_| Error::parse(&loc, format!("bad value {f:?}"))))
            .collect::<Result<_>>()?;
        if row.len() != dim {
            return Err(Error::parse(&loc, format!("expected {dim} values, got {}", row.len())));
        }
        tokens.push(token.to_string());
        values.extend(row);
    }
    if tokens.len() != n {
        return Err(Error::parse("export", format!("header declares {n} rows, found {}", tokens.len())));
    }
    Ok((tokens, values, dim))
}
