//! End-to-end acceptance checks. Runs without the libtest harness and prints
//! one PASS/FAIL line per criterion; exits non-zero if any fails.

use std::process::ExitCode;

use sheffer_core::dobinski::{closed_form, series_for, ClosedForm};
use sheffer_core::exact::{bell_polynomials, compose_triangles, integer_sequence, triangle};
use sheffer_core::moments::{
    positivity_violation, sheffer_negative_control, verify_moment_problem, weight, zeroth_moment, WeightSpec,
};
use sheffer_core::series::{egf_generator, egf_generator_power_variant, extract_triangle, ps_exp, sequence_egf};
use sheffer_core::{dobinski::dobinski_r, ExactRational, GeneratorSpec, HpReal};

type Check = Result<(), String>;

fn spec(s: &str) -> GeneratorSpec {
    s.parse().expect("spec parses")
}

fn q(s: &str) -> ExactRational {
    s.parse().expect("rational parses")
}

fn hp(x: f64, p: usize) -> HpReal {
    HpReal::from_f64(x, p)
}

/// Published integer lists: spec, first index, values.
const SEQUENCES: [(&str, usize, &[u64]); 7] = [
    ("B(B)", 0, &[1, 1, 3, 12, 60, 358, 2471, 19302]),
    ("B(B(B))", 0, &[1, 1, 4, 22, 154, 1304, 12915, 146115]),
    ("L", 1, &[1, 3, 13, 73, 501, 4051]),
    ("L(L)", 1, &[1, 5, 37, 361, 4361, 62701]),
    ("B(L)", 1, &[1, 4, 23, 171, 1552, 16583]),
    ("L(B)", 1, &[1, 4, 23, 173, 1602, 17575]),
    ("O(B)", 1, &[1, 4, 23, 175, 1662, 18937]),
];

fn sequences_exact() -> Check {
    for (text, first, expect) in SEQUENCES {
        let s = spec(text);
        let last = first + expect.len() - 1;
        let expect: Vec<String> = expect.iter().map(u64::to_string).collect();
        let matrix: Vec<String> = integer_sequence(&s, last).map_err(|e| e.to_string())?[first..]
            .iter()
            .map(|v| v.to_string())
            .collect();
        if matrix != expect {
            return Err(format!("{text} via triangles: {matrix:?}"));
        }
        let egf = sequence_egf(&s, last, &ExactRational::from_integer(1.into())).map_err(|e| e.to_string())?;
        let series: Vec<String> =
            egf.integer_coeffs().map_err(|e| e.to_string())?[first..].iter().map(|v| v.to_string()).collect();
        if series != expect {
            return Err(format!("{text} via series: {series:?}"));
        }
    }
    Ok(())
}

fn closed_forms() -> Check {
    let ll = bell_polynomials(&spec("L(L)"), 8).map_err(|e| e.to_string())?;
    for y in ["1", "1/2", "2"].map(q) {
        for n in 1..=8 {
            let c = closed_form(ClosedForm::LL, n, &y).map_err(|e| e.to_string())?;
            if c != ll[n].eval(&y) {
                return Err(format!("L(L) n={n} y={y}: {c} vs {}", ll[n].eval(&y)));
            }
        }
    }
    for p in 1..=3u32 {
        let nested = GeneratorSpec::nest(GeneratorSpec::lah(), p as usize);
        let polys = bell_polynomials(&nested, 6).map_err(|e| e.to_string())?;
        // Matrix product of p Lah triangles, then the row polynomials.
        let lah = triangle(&GeneratorSpec::lah(), 6).map_err(|e| e.to_string())?;
        let mut t = lah.clone();
        for _ in 1..p {
            t = compose_triangles(&lah, &t).map_err(|e| e.to_string())?;
        }
        for n in 1..=6 {
            for y in ["1", "1/3", "5/2"].map(q) {
                let from_matrix: ExactRational = t
                    .row(n)
                    .iter()
                    .enumerate()
                    .map(|(k, s)| ExactRational::from_integer(s.clone()) * num_traits::pow(y.clone(), k + 1))
                    .sum();
                let c = closed_form(ClosedForm::Lp(p), n, &y).map_err(|e| e.to_string())?;
                if c != from_matrix || c != polys[n].eval(&y) {
                    return Err(format!("p={p} n={n} y={y}: closed {c}, matrix {from_matrix}"));
                }
            }
        }
    }
    Ok(())
}

fn dobinski_rounds_to_exact() -> Check {
    let p = 256;
    let eps = hp(1e-10, p);
    let one = HpReal::one(p);
    for (text, first, expect) in SEQUENCES {
        let s = spec(text);
        for (i, &v) in expect.iter().enumerate() {
            let n = first + i;
            let series = series_for(&s, n, &one, &eps).map_err(|e| format!("{text} n={n}: {e}"))?;
            let (value, cert) = series.evaluate().map_err(|e| format!("{text} n={n}: {e}"))?;
            if value.round_to_bigint().to_string() != v.to_string() || (&value - hp(v as f64, p)).abs() > eps {
                return Err(format!("{text} n={n}: {} vs {v}", value.to_sci(20)));
            }
            let observed = series.remainder(cert.terms_used, 50).map_err(|e| e.to_string())?.abs();
            if observed > cert.tail_bound {
                return Err(format!(
                    "{text} n={n}: tail bound {} below observed remainder {}",
                    cert.tail_bound.to_sci(3),
                    observed.to_sci(3)
                ));
            }
        }
    }
    Ok(())
}

fn dual_path_triangles() -> Check {
    let order = 12;
    for f in [GeneratorSpec::bell(), GeneratorSpec::lah()] {
        for g in [GeneratorSpec::bell(), GeneratorSpec::lah()] {
            let fg = GeneratorSpec::compose(f.clone(), g.clone());
            let series = extract_triangle(&egf_generator(&fg, order).map_err(|e| e.to_string())?, order)
                .map_err(|e| e.to_string())?;
            let matrix = compose_triangles(
                &triangle(&g, order).map_err(|e| e.to_string())?,
                &triangle(&f, order).map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?;
            if series.rows() != matrix.rows() {
                return Err(format!("{fg}: series and matrix triangles differ"));
            }
        }
    }
    Ok(())
}

fn moment_problems() -> Check {
    let p = 128;
    let grid: Vec<HpReal> = (1..=60).map(|i| hp(0.05 * (i * i) as f64, p)).collect();
    let specs = [WeightSpec::W1, WeightSpec::W2, WeightSpec::BB, WeightSpec::LL, WeightSpec::BL, WeightSpec::LB];
    for s in specs {
        let tol = if s.is_comb() { 1e-8 } else { 1e-6 };
        for y in ["1", "2"].map(q) {
            let report = verify_moment_problem(s, 5, &y, &hp(tol, p)).map_err(|e| format!("{s} y={y}: {e}"))?;
            if !report.passed() {
                return Err(format!("{report}"));
            }
            let yh = HpReal::from_rational(&y, p);
            if let Some(x) = positivity_violation(&weight(s), &yh, &grid).map_err(|e| e.to_string())? {
                return Err(format!("{s} y={y} negative at {}", x.to_sci(6)));
            }
        }
    }
    let m0 = zeroth_moment(WeightSpec::W2, &HpReal::one(p));
    if (&m0 - HpReal::one(p)).abs() <= hp(1e-3, p) {
        return Err(format!("W2 mass at y=1 is {}", m0.to_sci(6)));
    }
    Ok(())
}

fn negative_control() -> Check {
    let nc = sheffer_negative_control(6).map_err(|e| e.to_string())?;
    match nc.first_negative {
        Some(4) if nc.values[4].to_string() == "-5" => Ok(()),
        other => Err(format!("first negative {other:?}, values {:?}", nc.values)),
    }
}

fn third_order_generator() -> Check {
    let order = 8;
    let p = 192;
    let r3 = GeneratorSpec::BellR(3);
    let exact = ps_exp(&egf_generator(&r3, order).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let variant = ps_exp(&egf_generator_power_variant(3, order).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let one = HpReal::one(p);
    let mut variant_fails = false;
    for n in 0..=order {
        let (d, _) = dobinski_r(n, &one, 3, &hp(1e-30, p)).map_err(|e| e.to_string())?;
        let rel = |c: &ExactRational| ((HpReal::from_rational(c, p) - &d).abs() / d.abs()).to_f64();
        if rel(exact.coeff(n)) > 1e-9 {
            return Err(format!("n={n}: {} vs {}", exact.coeff(n), d.to_sci(15)));
        }
        if rel(variant.coeff(n)) > 1e-9 {
            variant_fails = true;
        }
    }
    if !variant_fails {
        return Err("the x^(r-1) variant unexpectedly agrees".into());
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 7] = [
        ("1 exact sequences, matrix and series paths", sequences_exact),
        ("2 Laguerre closed forms", closed_forms),
        ("3 Dobinski sums round to exact values", dobinski_rounds_to_exact),
        ("4 dual-path triangle identity", dual_path_triangles),
        ("5 moment problems", moment_problems),
        ("6 negative control", negative_control),
        ("7 third-order generator", third_order_generator),
    ];
    let mut ok = true;
    for (name, check) in criteria {
        let start = std::time::Instant::now();
        match check() {
            Ok(()) => println!("PASS criterion {name} ({:.1?})", start.elapsed()),
            Err(e) => {
                ok = false;
                println!("FAIL criterion {name}: {e}");
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
