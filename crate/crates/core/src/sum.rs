//! Certified summation of infinite series.
//!
//! A series is summed term by term until a tail rule proves that everything
//! not yet added is below the requested tolerance. Two rules are available:
//!
//! * [`TailRule::Halving`]: the caller has proved `|t_{k+1}| <= |t_k| / 2`
//!   for every `k >= from`. The tail after the last added index `K` is then
//!   at most `|t_{K+1}| (1 + 1/2 + 1/4 + ...) = 2 |t_{K+1}|`.
//! * [`TailRule::Majorants`]: the caller has proved `|t_k| <= c k^d q^k` for
//!   every `k >= 1` for each listed majorant. Its consecutive ratio
//!   `(1 + 1/k)^d q` decreases in `k`, so for `ρ = (1 + 1/(K+1))^d q < 1`
//!   the tail after `K` is at most `c (K+1)^d q^{K+1} / (1 - ρ)`. The
//!   smallest bound over all majorants is used.
//!
//! Terms are evaluated in blocks, in parallel when the `parallel` feature is
//! on, and always added in index order so the result does not depend on the
//! thread count.
//!
//! Rounding is accounted for with a first-order model: every term is assumed
//! to carry at most `work(k)` roundings of relative size `u = 2^{1-p}` and the
//! running sum adds one more per term. The resulting bound must stay below
//! half of the tolerance or the sum fails with a precision error.

use std::fmt;

use crate::error::{Error, Result};
use crate::exec;
use crate::hp::HpReal;

const BLOCK: usize = 16;
pub const DEFAULT_MAX_TERMS: usize = 20_000;

/// Bookkeeping for a truncated series.
#[derive(Clone, Debug)]
pub struct TruncationCertificate {
    /// Number of terms actually added.
    pub terms_used: usize,
    /// Proven upper bound on the absolute value of the omitted tail.
    pub tail_bound: HpReal,
    /// Bound on accumulated rounding error.
    pub rounding_bound: HpReal,
    /// Tolerance the caller asked for.
    pub target_epsilon: HpReal,
}

impl TruncationCertificate {
    /// Total certified error, tail plus rounding.
    pub fn total_bound(&self) -> HpReal {
        &self.tail_bound + &self.rounding_bound
    }

    /// Multiplies all bounds by `factor >= 0`.
    pub fn scaled(&self, factor: &HpReal) -> Self {
        TruncationCertificate {
            terms_used: self.terms_used,
            tail_bound: &self.tail_bound * factor,
            rounding_bound: &self.rounding_bound * factor,
            target_epsilon: &self.target_epsilon * factor,
        }
    }

    /// Combines two certificates for a sum of two certified quantities.
    pub fn combine(&self, other: &Self) -> Self {
        TruncationCertificate {
            terms_used: self.terms_used + other.terms_used,
            tail_bound: &self.tail_bound + &other.tail_bound,
            rounding_bound: &self.rounding_bound + &other.rounding_bound,
            target_epsilon: &self.target_epsilon + &other.target_epsilon,
        }
    }
}

impl fmt::Display for TruncationCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "terms={} tail<={} rounding<={} eps={}",
            self.terms_used,
            self.tail_bound.to_sci(3),
            self.rounding_bound.to_sci(3),
            self.target_epsilon.to_sci(3)
        )
    }
}

/// `|t_k| <= coeff * k^degree * ratio^k` for all `k >= 1`.
#[derive(Clone, Debug)]
pub struct Majorant {
    pub coeff: HpReal,
    pub degree: u32,
    pub ratio: HpReal,
}

impl Majorant {
    pub fn new(coeff: HpReal, degree: u32, ratio: HpReal) -> Self {
        Majorant { coeff, degree, ratio }
    }

    /// Bound on `Σ_{k > last} |t_k|`, or `None` if the geometric argument does
    /// not apply yet at this index.
    pub fn tail_after(&self, last: usize) -> Option<HpReal> {
        if !self.coeff.is_finite() || !self.ratio.is_finite() {
            return None;
        }
        let p = self.ratio.precision();
        let next = HpReal::from_u64(last as u64 + 1, p);
        let growth = (HpReal::one(p) + next.recip()).powi(self.degree);
        let rho = &growth * &self.ratio;
        let one = HpReal::one(p);
        if rho >= one {
            return None;
        }
        let lead = &self.coeff * next.powi(self.degree) * pow_u(&self.ratio, last as u64 + 1);
        Some(lead / (one - rho))
    }

    /// `Σ_{k>=1} c k^d q^k`, the total mass the majorant allows.
    pub fn total(&self) -> Option<HpReal> {
        let q = &self.ratio;
        if !q.is_finite() || *q >= HpReal::one(q.precision()) {
            return None;
        }
        Some(&self.coeff * crate::specfun::polylog_neg(self.degree, q).ok()?)
    }

    /// Product of two majorants: `c1 c2 k^{d1+d2} (q1 q2)^k`.
    pub fn times(&self, other: &Majorant) -> Majorant {
        Majorant {
            coeff: &self.coeff * &other.coeff,
            degree: self.degree + other.degree,
            ratio: &self.ratio * &other.ratio,
        }
    }

    /// Multiplies the bounded terms by `k^extra`.
    pub fn with_extra_degree(&self, extra: u32) -> Majorant {
        Majorant { coeff: self.coeff.clone(), degree: self.degree + extra, ratio: self.ratio.clone() }
    }

    pub fn scaled(&self, factor: &HpReal) -> Majorant {
        Majorant { coeff: &self.coeff * factor, degree: self.degree, ratio: self.ratio.clone() }
    }
}

/// `x^n` for a possibly large integer exponent.
pub fn pow_u(x: &HpReal, n: u64) -> HpReal {
    let mut result = HpReal::one(x.precision());
    let mut base = x.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

#[derive(Clone, Debug)]
pub enum TailRule {
    Halving { from: usize },
    Majorants(Vec<Majorant>),
}

impl TailRule {
    fn bound(&self, last: usize, next_term: &HpReal) -> Option<HpReal> {
        match self {
            TailRule::Halving { from } => {
                (last + 1 >= *from).then(|| next_term.abs() + next_term.abs())
            }
            TailRule::Majorants(ms) => ms
                .iter()
                .filter_map(|m| m.tail_after(last))
                .reduce(|a, b| a.min(b)),
        }
    }
}

/// Terms of a series, indexed from [`TermSource::first_index`].
pub trait TermSource: Sync {
    fn term(&self, k: usize) -> Result<HpReal>;

    fn first_index(&self) -> usize {
        0
    }

    /// Upper bound on the number of roundings incurred by `term(k)`.
    fn work(&self, _k: usize) -> usize {
        64
    }

    /// Whether every term is known to be nonnegative; enforced while summing.
    fn nonnegative(&self) -> bool {
        true
    }

    fn precision(&self) -> usize;
}

/// Plain partial sum of the first `count` terms.
pub fn partial_sum<S: TermSource + ?Sized>(src: &S, count: usize) -> Result<HpReal> {
    let first = src.first_index();
    let terms = exec::try_map_range(first..first + count, |k| src.term(k))?;
    Ok(terms.iter().fold(HpReal::zero(src.precision()), |acc, t| acc + t))
}

/// Sum of `count` terms starting `skip` terms after the first index.
pub fn range_sum<S: TermSource + ?Sized>(src: &S, skip: usize, count: usize) -> Result<HpReal> {
    let first = src.first_index() + skip;
    let terms = exec::try_map_range(first..first + count, |k| src.term(k))?;
    Ok(terms.iter().fold(HpReal::zero(src.precision()), |acc, t| acc + t))
}

/// Sums until the tail bound drops below `eps / 2` and checks that the
/// rounding bound stays below `eps / 2`.
pub fn sum_certified<S: TermSource + ?Sized>(
    src: &S,
    rule: &TailRule,
    eps: &HpReal,
    max_terms: usize,
) -> Result<(HpReal, TruncationCertificate)> {
    let p = src.precision();
    let half_eps = eps.ldexp(-1);
    let first = src.first_index();
    let mut sum = HpReal::zero(p);
    let mut abs_sum = HpReal::zero(p);
    let mut max_work = 0usize;
    let mut start = first;
    let mut pending: Option<HpReal> = None;

    loop {
        let block = exec::try_map_range(start..start + BLOCK, |k| src.term(k))?;
        for (offset, t) in block.into_iter().enumerate() {
            let k = start + offset;
            if src.nonnegative() && t.is_negative() {
                return Err(Error::invariant(format!("term {k} of a nonnegative series is negative")));
            }
            if !t.is_finite() {
                return Err(Error::convergence(format!("term {k} is not finite")));
            }
            // `pending` holds t_{k-1}, not yet added; decide whether t_{k-1}
            // is the last term we need, using t_k as the "next" term.
            if let Some(prev) = pending.take() {
                let prev_sum = sum.clone();
                sum = &sum + &prev;
                abs_sum = &abs_sum + prev.abs();
                if src.nonnegative() && sum < prev_sum {
                    return Err(Error::invariant("partial sums of a nonnegative series decreased"));
                }
                max_work = max_work.max(src.work(k - 1));
                let used = k - first;
                if let Some(tail) = rule.bound(k - 1, &t) {
                    if tail <= half_eps {
                        return finish(sum, abs_sum, tail, used, max_work, eps, p);
                    }
                }
            }
            pending = Some(t);
        }
        start += BLOCK;
        if start - first > max_terms {
            return Err(Error::convergence(format!(
                "no certified tail within {max_terms} terms (eps = {})",
                eps.to_sci(3)
            )));
        }
    }
}

fn finish(
    sum: HpReal,
    abs_sum: HpReal,
    tail: HpReal,
    used: usize,
    max_work: usize,
    eps: &HpReal,
    p: usize,
) -> Result<(HpReal, TruncationCertificate)> {
    let u = HpReal::one(p).ldexp(1 - p as i32);
    let rounding = HpReal::from_u64(2 * (used + max_work) as u64 + 2, p) * u * &abs_sum;
    if rounding > eps.ldexp(-1) {
        return Err(Error::Precision { bits: p, eps: eps.to_sci(3) });
    }
    let cert = TruncationCertificate {
        terms_used: used,
        tail_bound: tail,
        rounding_bound: rounding,
        target_epsilon: eps.clone(),
    };
    Ok((sum, cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Geometric {
        q: f64,
        p: usize,
    }

    impl TermSource for Geometric {
        fn term(&self, k: usize) -> Result<HpReal> {
            Ok(pow_u(&HpReal::from_f64(self.q, self.p), k as u64))
        }
        fn precision(&self) -> usize {
            self.p
        }
    }

    #[test]
    fn geometric_series_with_majorant() {
        let src = Geometric { q: 0.5, p: 128 };
        let rule = TailRule::Majorants(vec![Majorant::new(
            HpReal::one(128),
            0,
            HpReal::from_f64(0.5, 128),
        )]);
        let eps = HpReal::from_f64(1e-20, 128);
        let (s, cert) = sum_certified(&src, &rule, &eps, 1000).unwrap();
        assert!((s - HpReal::from_u64(2, 128)).abs() <= cert.total_bound());
        assert!(cert.tail_bound <= eps);
        // Honesty: the observed remainder never exceeds the bound.
        let more = partial_sum(&src, cert.terms_used + 50).unwrap();
        let s2 = partial_sum(&src, cert.terms_used).unwrap();
        assert!(more - s2 <= cert.tail_bound);
    }

    #[test]
    fn halving_rule() {
        let src = Geometric { q: 0.25, p: 128 };
        let eps = HpReal::from_f64(1e-30, 128);
        let (s, cert) = sum_certified(&src, &TailRule::Halving { from: 0 }, &eps, 1000).unwrap();
        let exact = HpReal::from_u64(4, 128) / HpReal::from_u64(3, 128);
        assert!((s - exact).abs() <= cert.total_bound());
    }

    #[test]
    fn reports_precision_and_convergence_failures() {
        let src = Geometric { q: 0.5, p: 64 };
        let rule = TailRule::Halving { from: 0 };
        let tiny = HpReal::from_f64(1e-30, 64);
        assert!(matches!(sum_certified(&src, &rule, &tiny, 10_000), Err(Error::Precision { .. })));
        let slow = Geometric { q: 0.999, p: 64 };
        let eps = HpReal::from_f64(1e-10, 64);
        assert!(matches!(sum_certified(&slow, &rule, &eps, 100), Err(Error::Convergence(_))));
    }

    #[test]
    fn majorant_tail_requires_contraction() {
        let m = Majorant::new(HpReal::one(64), 3, HpReal::from_f64(0.5, 64));
        assert!(m.tail_after(1).is_none());
        assert!(m.tail_after(10).is_some());
    }

    #[test]
    fn pow_u_matches_powi() {
        let x = HpReal::from_f64(1.1, 128);
        let rel = (pow_u(&x, 37) - x.powi(37)).abs() / x.powi(37);
        assert!(rel < HpReal::from_f64(1e-35, 128));
    }
}
