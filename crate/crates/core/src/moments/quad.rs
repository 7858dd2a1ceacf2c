//! Composite Gauss–Legendre quadrature on `[0, ∞)`.
//!
//! Several integrands `g_j` are integrated together, from one evaluation
//! per node that returns all of them. The range is cut at a point `X` where a caller
//! supplied tail bound is below half the tolerance. On `[0, X]` the
//! substitution `x = t^2` removes `x^{-1/2}` endpoint behaviour, and the
//! `t` range is split into equal panels that are doubled until two
//! consecutive panel counts agree to within half the tolerance. That
//! difference is an estimate, not a proof, and is reported as such in the
//! certificate's rounding field.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::exec;
use crate::hp::HpReal;
use crate::sum::TruncationCertificate;

const POINTS: usize = 20;
const FIRST_PANELS: usize = 4;
const MAX_PANELS: usize = 2048;
const MAX_CUTOFF: f64 = 1e7;

type Rule = Arc<Vec<(HpReal, HpReal)>>;

fn rule_cache() -> &'static Mutex<HashMap<(usize, usize), Rule>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Rule>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Nodes and weights of the `points`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(points: usize, prec: usize) -> Rule {
    let key = (points, prec);
    if let Some(r) = rule_cache().lock().expect("rule cache poisoned").get(&key) {
        return r.clone();
    }
    let work = prec + 32;
    let one = HpReal::one(work);
    let stop = one.ldexp(-(prec as i32) - 8);
    let nodes: Vec<(HpReal, HpReal)> = (0..points)
        .map(|i| {
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (points as f64 + 0.5)).cos();
            let mut x = HpReal::from_f64(guess, work);
            let mut deriv = one.clone();
            for _ in 0..100 {
                let (pn, dn) = legendre_with_derivative(points, &x);
                let dx = &pn / &dn;
                x = &x - &dx;
                deriv = dn;
                if dx.abs() <= stop {
                    break;
                }
            }
            let (_, dn) = legendre_with_derivative(points, &x);
            if !dn.is_zero() {
                deriv = dn;
            }
            let w = HpReal::from_u64(2, work) / ((&one - &x * &x) * &deriv * &deriv);
            (&x * &HpReal::one(prec), &w * &HpReal::one(prec))
        })
        .collect();
    let rule = Arc::new(nodes);
    rule_cache().lock().expect("rule cache poisoned").insert(key, rule.clone());
    rule
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: &HpReal) -> (HpReal, HpReal) {
    let p = x.precision();
    let mut prev = HpReal::one(p);
    let mut cur = x.clone();
    for k in 1..n {
        let kk = HpReal::from_u64(k as u64, p);
        let next = (HpReal::from_u64(2 * k as u64 + 1, p) * x * &cur - &kk * &prev) / HpReal::from_u64(k as u64 + 1, p);
        prev = cur;
        cur = next;
    }
    let d = HpReal::from_u64(n as u64, p) * (x * &cur - &prev) / (x * x - HpReal::one(p));
    (cur, d)
}

/// A family of integrands `g_j(x)`, `j = 0..count`, on `[0, ∞)`.
pub struct Integrand<'a> {
    /// All `g_j(x)` at once, each with a bound on its absolute error.
    pub eval: &'a (dyn Fn(&HpReal) -> Result<Vec<(HpReal, HpReal)>> + Sync),
    pub count: usize,
    /// Bound on `∫_X^∞ |g_j|`, valid for `X >= start`.
    pub tail: &'a (dyn Fn(usize, &HpReal) -> Result<HpReal> + Sync),
    pub start: f64,
}

struct Level {
    sums: Vec<HpReal>,
    abs_sums: Vec<HpReal>,
    eval_err: Vec<HpReal>,
    nodes: usize,
}

fn cutoff(f: &Integrand, eps: &[HpReal], p: usize) -> Result<HpReal> {
    let mut x = f.start.max(1.0);
    loop {
        let xx = HpReal::from_f64(x, p);
        let mut ok = true;
        for (j, e) in eps.iter().enumerate() {
            if (f.tail)(j, &xx)? > e.ldexp(-1) {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(xx);
        }
        x *= 1.25;
        if x > MAX_CUTOFF {
            return Err(Error::convergence("no quadrature cutoff satisfies the tail bound"));
        }
    }
}

fn level(f: &Integrand, t_max: &HpReal, panels: usize, p: usize) -> Result<Level> {
    let rule = gauss_legendre(POINTS, p);
    let h = t_max / &HpReal::from_u64(panels as u64, p);
    let half_h = h.ldexp(-1);
    let evals = exec::try_map_range(0..panels * POINTS, |idx| {
        let (xi, wi) = &rule[idx % POINTS];
        let left = &h * &HpReal::from_u64((idx / POINTS) as u64, p);
        let t = left + &half_h * &(xi + &HpReal::one(p));
        let x = &t * &t;
        let vals = (f.eval)(&x)?;
        if vals.len() != f.count {
            return Err(Error::Dimension { expected: f.count, found: vals.len() });
        }
        if vals.iter().any(|(v, _)| !v.is_finite()) {
            return Err(Error::convergence("integrand is not finite at a quadrature node"));
        }
        // dx = 2 t dt
        let jac = wi * &half_h * &t.ldexp(1);
        Ok(vals.into_iter().map(|(v, e)| (v * &jac, e * &jac)).collect::<Vec<_>>())
    })?;
    let mut sums = vec![HpReal::zero(p); f.count];
    let mut abs_sums = vec![HpReal::zero(p); f.count];
    let mut eval_err = vec![HpReal::zero(p); f.count];
    for node in &evals {
        for (j, (v, e)) in node.iter().enumerate() {
            abs_sums[j] = &abs_sums[j] + v.abs();
            sums[j] = &sums[j] + v;
            eval_err[j] = &eval_err[j] + e;
        }
    }
    Ok(Level { sums, abs_sums, eval_err, nodes: evals.len() })
}

/// Integrates every member of `f` to the matching absolute tolerance in
/// `eps`. The working precision is that of `eps[0]`.
pub fn integrate(f: &Integrand, eps: &[HpReal]) -> Result<Vec<(HpReal, TruncationCertificate)>> {
    if eps.len() != f.count || eps.is_empty() {
        return Err(Error::Dimension { expected: f.count, found: eps.len() });
    }
    let p = eps[0].precision();
    let x_max = cutoff(f, eps, p)?;
    let t_max = x_max.sqrt();
    let u = HpReal::one(p).ldexp(1 - p as i32);
    let mut panels = FIRST_PANELS;
    let mut coarse = level(f, &t_max, panels, p)?;
    loop {
        panels *= 2;
        let fine = level(f, &t_max, panels, p)?;
        let rounding_factor = HpReal::from_u64(8 * fine.nodes as u64 + 8, p) * &u;
        let mut errs = Vec::with_capacity(f.count);
        let mut ok = true;
        for j in 0..f.count {
            let err = (&fine.sums[j] - &coarse.sums[j]).abs() + &fine.eval_err[j] + &rounding_factor * &fine.abs_sums[j];
            if err > eps[j].ldexp(-1) {
                ok = false;
            }
            errs.push(err);
        }
        if ok {
            return (0..f.count)
                .map(|j| {
                    let cert = TruncationCertificate {
                        terms_used: fine.nodes,
                        tail_bound: (f.tail)(j, &x_max)?,
                        rounding_bound: errs[j].clone(),
                        target_epsilon: eps[j].clone(),
                    };
                    Ok((fine.sums[j].clone(), cert))
                })
                .collect();
        }
        if panels >= MAX_PANELS {
            return Err(Error::convergence(format!("quadrature did not settle with {panels} panels")));
        }
        coarse = fine;
    }
}

/// Upper incomplete gamma function `Γ(m+1, t) = m! e^{-t} Σ_{j<=m} t^j/j!`
/// for integer `m` and `t >= 0`.
pub fn upper_gamma_int(m: u32, t: &HpReal) -> HpReal {
    let p = t.precision();
    let mut term = HpReal::one(p);
    let mut sum = HpReal::one(p);
    for j in 1..=m {
        term = term * t / HpReal::from_u64(j as u64, p);
        sum = sum + &term;
    }
    let fact = (1..=m as u64).fold(HpReal::one(p), |acc, j| acc * HpReal::from_u64(j, p));
    fact * (-t).exp() * sum
}
