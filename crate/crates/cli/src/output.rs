//! Output records and their three renderings.
//!
//! Every `jsonl` line is one [`Record`] carrying `"schema": "sheffer-cli/1"`
//! and a `"command"` tag. Exact values are decimal strings (`"p/q"` for
//! non-integral rationals); floating-point values are decimal strings in
//! scientific notation next to a `precision_bits` field.

use std::io::{self, Write};

use serde::Serialize;
use sheffer_core::{HpReal, TruncationCertificate};

use crate::Format;

pub const SCHEMA: &str = "sheffer-cli/1";

#[derive(Serialize, Debug)]
pub struct Certificate {
    pub terms_used: usize,
    pub tail_bound: String,
    pub rounding_bound: String,
    pub target_epsilon: String,
}

impl From<&TruncationCertificate> for Certificate {
    fn from(c: &TruncationCertificate) -> Self {
        Certificate {
            terms_used: c.terms_used,
            tail_bound: c.tail_bound.to_sci(6),
            rounding_bound: c.rounding_bound.to_sci(6),
            target_epsilon: c.target_epsilon.to_sci(6),
        }
    }
}

#[derive(Serialize, Debug)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Body {
    Seq {
        spec: String,
        y: String,
        n: usize,
        value: String,
    },
    Triangle {
        spec: String,
        n: usize,
        row: Vec<String>,
    },
    Dobinski {
        spec: String,
        y: String,
        n: usize,
        value: String,
        precision_bits: usize,
        exact: String,
        error: String,
        certificate: Certificate,
        passed: bool,
    },
    Verify {
        weight: String,
        y: String,
        n: usize,
        reference: String,
        computed: String,
        precision_bits: usize,
        relative_error: String,
        tolerance: String,
        certificate: Certificate,
        passed: bool,
    },
}

#[derive(Serialize, Debug)]
pub struct Record<'a> {
    pub schema: &'static str,
    #[serde(flatten)]
    pub body: &'a Body,
}

/// Significant decimal digits carried by `bits` of binary precision.
pub fn digits(bits: usize) -> usize {
    ((bits as f64) * std::f64::consts::LOG10_2).floor().max(1.0) as usize
}

pub fn hp_string(v: &HpReal) -> String {
    v.to_sci(digits(v.precision()))
}

/// Writes records in `format`. Plain output is a one-line sequence for
/// `seq`, one row per line for `triangle` and a table otherwise. The
/// b-file index runs from 1 over all emitted values, triangle rows read
/// left to right.
pub fn emit(format: Format, records: &[Body], out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Jsonl => {
            for body in records {
                let line = serde_json::to_string(&Record { schema: SCHEMA, body })?;
                writeln!(out, "{line}")?;
            }
        }
        Format::Bfile => {
            let mut index = 1;
            for body in records {
                for v in bfile_values(body) {
                    write!(out, "{index} {v}\n")?;
                    index += 1;
                }
            }
        }
        Format::Plain => plain(records, out)?,
    }
    Ok(())
}

fn bfile_values(body: &Body) -> Vec<&str> {
    match body {
        Body::Seq { value, .. } => vec![value],
        Body::Triangle { row, .. } => row.iter().map(String::as_str).collect(),
        Body::Dobinski { value, .. } => vec![value],
        Body::Verify { computed, .. } => vec![computed],
    }
}

fn plain(records: &[Body], out: &mut dyn Write) -> io::Result<()> {
    let values: Vec<&str> = records
        .iter()
        .filter_map(|b| match b {
            Body::Seq { value, .. } => Some(value.as_str()),
            _ => None,
        })
        .collect();
    if !values.is_empty() {
        writeln!(out, "{}", values.join(" "))?;
    }
    for body in records {
        match body {
            Body::Seq { .. } => {}
            Body::Triangle { row, .. } => writeln!(out, "{}", row.join(" "))?,
            Body::Dobinski { spec, y, n, value, exact, error, certificate, passed, .. } => {
                writeln!(out, "{spec} n={n} y={y}")?;
                writeln!(out, "  value  {value}")?;
                writeln!(out, "  exact  {exact}")?;
                writeln!(out, "  error  {error} (bound {}, eps {})", bound(certificate), certificate.target_epsilon)?;
                writeln!(out, "  terms  {}", certificate.terms_used)?;
                writeln!(out, "  {}", if *passed { "PASS" } else { "FAIL" })?;
            }
            Body::Verify { weight, y, n, reference, computed, relative_error, passed, .. } => {
                writeln!(
                    out,
                    "{weight} y={y} n={n:<3} reference={reference} computed={computed} rel.err={relative_error} {}",
                    if *passed { "PASS" } else { "FAIL" }
                )?;
            }
        }
    }
    Ok(())
}

fn bound(c: &Certificate) -> String {
    format!("tail {} + rounding {}", c.tail_bound, c.rounding_bound)
}
