use std::fmt;
use std::io::{self, Write};

use sheffer_core::dobinski::dobinski as dobinski_sum;
use sheffer_core::exact::{bell_poly, sequence, triangle as stirling_triangle};
use sheffer_core::moments::{verify_moment_problem, WeightSpec};
use sheffer_core::{Error, ExactRational, GeneratorSpec, HpReal};

use crate::output::{emit, hp_string, Body};
use crate::Global;

#[derive(Debug)]
pub enum CliError {
    /// Unparseable or out-of-domain input.
    Input(String),
    /// Requested order above `--order-cap`.
    Cap(String),
    /// A series or quadrature could not reach the tolerance.
    Numeric(String),
    Internal(String),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Internal(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Cap(m) | CliError::Numeric(m) | CliError::Internal(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "write failed: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Parse(_) | Error::Domain(_) | Error::Unsupported(_) | Error::Dimension { .. } => CliError::Input(msg),
            Error::Precision { .. } | Error::Convergence(_) => CliError::Numeric(msg),
            Error::Invariant(_) => CliError::Internal(msg),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

type Outcome = Result<bool, CliError>;

fn check_cap(what: &str, n: usize, g: &Global) -> Result<(), CliError> {
    if n > g.order_cap {
        return Err(CliError::Cap(format!("{what} = {n} exceeds --order-cap {}", g.order_cap)));
    }
    Ok(())
}

/// Accepts `p`, `p/q` and plain decimals such as `-0.25`.
pub fn parse_rational(s: &str) -> Result<ExactRational, CliError> {
    let t = s.trim();
    let bad = || CliError::Input(format!("cannot parse {s:?} as a rational number"));
    let text = match t.split_once('.') {
        Some((int, frac)) if !t.contains('/') => {
            if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            format!("{int}{frac}/1{}", "0".repeat(frac.len()))
        }
        Some(_) => return Err(bad()),
        None => t.to_string(),
    };
    if text.ends_with("/0") || text.contains("/-") {
        return Err(bad());
    }
    text.parse::<ExactRational>().map_err(|_| bad())
}

fn parse_y(y: Option<&str>) -> Result<ExactRational, CliError> {
    y.map(parse_rational).unwrap_or_else(|| parse_rational("1"))
}

fn parse_spec(s: &str) -> Result<GeneratorSpec, CliError> {
    Ok(s.parse::<GeneratorSpec>()?)
}

fn eps(g: &Global) -> Result<HpReal, CliError> {
    if !(g.eps.is_finite() && g.eps > 0.0) {
        return Err(CliError::Input(format!("--eps must be a positive number, got {}", g.eps)));
    }
    if g.precision_bits < 16 {
        return Err(CliError::Input("--precision-bits must be at least 16".into()));
    }
    Ok(HpReal::from_f64(g.eps, g.precision_bits))
}

pub fn seq(g: &Global, spec: &str, n: usize, y: Option<&str>, out: &mut dyn Write) -> Outcome {
    let spec = parse_spec(spec)?;
    let y = parse_y(y)?;
    check_cap("n", n, g)?;
    let values = sequence(&spec, n, &y)?;
    let records: Vec<Body> = values
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| Body::Seq { spec: spec.to_string(), y: y.to_string(), n: k, value: v.to_string() })
        .collect();
    emit(g.format, &records, out)?;
    Ok(true)
}

pub fn triangle(g: &Global, spec: &str, order: usize, out: &mut dyn Write) -> Outcome {
    let spec = parse_spec(spec)?;
    check_cap("order", order, g)?;
    let t = stirling_triangle(&spec, order)?;
    let records: Vec<Body> = t
        .rows()
        .iter()
        .enumerate()
        .map(|(i, row)| Body::Triangle {
            spec: spec.to_string(),
            n: i + 1,
            row: row.iter().map(|v| v.to_string()).collect(),
        })
        .collect();
    emit(g.format, &records, out)?;
    Ok(true)
}

pub fn dobinski(g: &Global, spec: &str, n: usize, y: Option<&str>, out: &mut dyn Write) -> Outcome {
    let spec = parse_spec(spec)?;
    let y = parse_y(y)?;
    let eps = eps(g)?;
    check_cap("n", n, g)?;
    let p = g.precision_bits;
    let (value, cert) = dobinski_sum(&spec, n, &HpReal::from_rational(&y, p), &eps)?;
    let exact = bell_poly(&spec, n, &y)?;
    let error = (&value - &HpReal::from_rational(&exact, p)).abs();
    let passed = error <= eps;
    let record = Body::Dobinski {
        spec: spec.to_string(),
        y: y.to_string(),
        n,
        value: hp_string(&value),
        precision_bits: p,
        exact: exact.to_string(),
        error: error.to_sci(3),
        certificate: (&cert).into(),
        passed,
    };
    emit(g.format, &[record], out)?;
    Ok(passed)
}

pub fn verify(g: &Global, spec: &str, n_max: usize, y: Option<&str>, out: &mut dyn Write) -> Outcome {
    let spec: WeightSpec = spec.parse()?;
    let y = parse_y(y)?;
    let eps = eps(g)?;
    check_cap("n-max", n_max, g)?;
    let report = verify_moment_problem(spec, n_max, &y, &eps)?;
    let records: Vec<Body> = report
        .checks
        .iter()
        .map(|c| Body::Verify {
            weight: spec.to_string(),
            y: y.to_string(),
            n: c.n,
            reference: c.reference.to_string(),
            computed: hp_string(&c.computed),
            precision_bits: g.precision_bits,
            relative_error: c.relative_error.to_sci(3),
            tolerance: eps.to_sci(3),
            certificate: (&c.certificate).into(),
            passed: c.passed,
        })
        .collect();
    emit(g.format, &records, out)?;
    Ok(report.passed())
}
