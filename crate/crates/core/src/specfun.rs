//! Special functions: modified Bessel `I_1`, `pFq`, generalized Laguerre
//! polynomials and polylogarithms of nonpositive order.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{factorial, ExactRational};
use crate::hp::HpReal;
use crate::sum::{partial_sum, pow_u, sum_certified, TailRule, TermSource, TruncationCertificate};

/// `binom(m, j)` for an arbitrary integer `m`.
pub fn gen_binomial(m: i64, j: u64) -> BigInt {
    let mut num = BigInt::one();
    for i in 0..j as i64 {
        num *= BigInt::from(m - i);
    }
    num / factorial(j)
}

/// Coefficients of `L_n^{(alpha)}(x)` in powers of `x`.
pub fn laguerre_coeffs(n: usize, alpha: i64) -> Vec<ExactRational> {
    (0..=n as u64)
        .map(|k| {
            let c = gen_binomial(n as i64 + alpha, n as u64 - k);
            let sign = if k % 2 == 0 { c } else { -c };
            ExactRational::new(sign, factorial(k))
        })
        .collect()
}

/// `L_n^{(alpha)}(x) = Σ_k binom(n+alpha, n-k) (-x)^k / k!`, exactly.
pub fn laguerre(n: usize, alpha: i64, x: &ExactRational) -> ExactRational {
    laguerre_coeffs(n, alpha)
        .iter()
        .rev()
        .fold(ExactRational::zero(), |acc, c| acc * x + c)
}

/// `L_n^{(alpha)}(x)` at a high-precision argument.
pub fn laguerre_hp(n: usize, alpha: i64, x: &HpReal) -> HpReal {
    let p = x.precision();
    laguerre_coeffs(n, alpha)
        .iter()
        .rev()
        .fold(HpReal::zero(p), |acc, c| acc * x + HpReal::from_rational(c, p))
}

/// Next Eulerian row: `A(m, j) = (j+1) A(m-1, j) + (m-j) A(m-1, j-1)`,
/// where `row` holds `A(m-1, ·)`.
pub fn eulerian_next(row: &[BigInt]) -> Vec<BigInt> {
    let m = row.len() + 1;
    (0..m)
        .map(|j| {
            let left = row.get(j).map(|a| a * BigInt::from(j + 1)).unwrap_or_default();
            let right = if j >= 1 { &row[j - 1] * BigInt::from(m - j) } else { BigInt::zero() };
            left + right
        })
        .collect()
}

/// Row `k` of the Eulerian triangle, `A(k, j)` for `j = 0..k-1`
/// (`[1]` for `k = 0`).
pub fn eulerian_row(k: usize) -> Vec<BigInt> {
    (2..=k).fold(vec![BigInt::one()], |row, _| eulerian_next(&row))
}

/// `Li_{-k}(y)` from a precomputed Eulerian row `A(k, ·)`; `y` must lie in
/// `[0, 1)`.
pub fn polylog_neg_with_row(k: u32, row: &[BigInt], y: &HpReal) -> HpReal {
    let p = y.precision();
    let num = if k == 0 {
        y.clone()
    } else {
        row.iter().rev().fold(HpReal::zero(p), |acc, c| acc * y + HpReal::from_bigint(c, p)) * y
    };
    num / pow_u(&(HpReal::one(p) - y), k as u64 + 1)
}

/// `Li_{-k}(y) = Σ_{m>=1} m^k y^m` for `0 <= y < 1`, via the Eulerian closed
/// form.
pub fn polylog_neg(k: u32, y: &HpReal) -> Result<HpReal> {
    if y.is_negative() || *y >= HpReal::one(y.precision()) {
        return Err(Error::domain("polylog_neg needs 0 <= y < 1"));
    }
    Ok(polylog_neg_with_row(k, &eulerian_row(k as usize), y))
}

/// Exact `Li_{-k}(y)` for rational `0 <= y < 1`.
pub fn polylog_neg_exact(k: u32, y: &ExactRational) -> Result<ExactRational> {
    if y.is_negative() || *y >= ExactRational::one() {
        return Err(Error::domain("polylog_neg needs 0 <= y < 1"));
    }
    let num = if k == 0 {
        y.clone()
    } else {
        eulerian_row(k as usize)
            .iter()
            .rev()
            .fold(ExactRational::zero(), |acc, c| acc * y + ExactRational::from(c.clone()))
            * y
    };
    let den = num_traits::pow(ExactRational::one() - y, k as usize + 1);
    Ok(num / den)
}

struct BesselI1 {
    half: HpReal,
}

impl TermSource for BesselI1 {
    fn term(&self, m: usize) -> Result<HpReal> {
        let p = self.half.precision();
        let den = factorial(m as u64) * factorial(m as u64 + 1);
        Ok(pow_u(&self.half, 2 * m as u64 + 1) / HpReal::from_bigint(&den, p))
    }
    fn work(&self, m: usize) -> usize {
        2 * (64 - (m as u64 + 1).leading_zeros() as usize) + 8
    }
    fn precision(&self) -> usize {
        self.half.precision()
    }
}

/// `I_1(z) = Σ_m (z/2)^{2m+1} / (m! (m+1)!)` for `z >= 0`.
///
/// Consecutive terms have ratio `(z/2)^2 / ((m+1)(m+2))`, which decreases in
/// `m`; once it is at most `1/2` the halving tail rule applies.
pub fn bessel_i1(z: &HpReal, eps: &HpReal) -> Result<(HpReal, TruncationCertificate)> {
    if z.is_negative() {
        return Err(Error::domain("bessel_i1 needs z >= 0"));
    }
    let src = BesselI1 { half: z.ldexp(-1) };
    let h2 = (z.ldexp(-1)).to_f64().powi(2);
    let mut from = 0usize;
    while ((from + 1) * (from + 2)) as f64 * 0.5 < h2 * (1.0 + 1e-12) {
        from += 1;
    }
    sum_certified(&src, &TailRule::Halving { from }, eps, crate::sum::DEFAULT_MAX_TERMS)
}

/// `I_1(2h)/h = Σ_m h^{2m} / (m! (m+1)!)` as a function of `s = h^2 >= 0`.
///
/// `rel` is a relative tolerance; the certificate holds absolute bounds.
/// Terms come from the recurrence `t_{m+1} = t_m s / ((m+1)(m+2))`, summed sequentially;
/// this is the cheap path used inside quadrature loops.
pub fn bessel_i1_scaled(s: &HpReal, rel: &HpReal) -> Result<(HpReal, TruncationCertificate)> {
    if s.is_negative() {
        return Err(Error::domain("bessel_i1_scaled needs s >= 0"));
    }
    let p = s.precision();
    let mut t = HpReal::one(p);
    let mut sum = HpReal::zero(p);
    let sf = s.to_f64();
    for m in 0..crate::sum::DEFAULT_MAX_TERMS {
        sum = &sum + &t;
        let d = ((m + 1) * (m + 2)) as u64;
        t = &t * s / HpReal::from_u64(d, p);
        // t now holds t_{m+1}; the ratio after it is s/((m+2)(m+3)).
        let settled = sf * (1.0 + 1e-12) <= 0.5 * ((m + 2) * (m + 3)) as f64;
        let tail = t.ldexp(1);
        let eps = rel * &sum;
        let half_eps = eps.ldexp(-1);
        if settled && tail <= half_eps {
            let used = m + 1;
            let u = HpReal::one(p).ldexp(1 - p as i32);
            let rounding = HpReal::from_u64(6 * used as u64 + 4, p) * u * &sum;
            if rounding > half_eps {
                return Err(Error::Precision { bits: p, eps: eps.to_sci(3) });
            }
            let cert = TruncationCertificate {
                terms_used: used,
                tail_bound: tail,
                rounding_bound: rounding,
                target_epsilon: eps,
            };
            return Ok((sum, cert));
        }
    }
    Err(Error::convergence("I_1 series did not settle"))
}

/// Plain partial sum of the first `terms` terms of the `I_1` series.
pub fn bessel_i1_terms(z: &HpReal, terms: usize) -> Result<HpReal> {
    partial_sum(&BesselI1 { half: z.ldexp(-1) }, terms)
}

struct Hypergeometric {
    upper: Vec<HpReal>,
    lower: Vec<HpReal>,
    z: HpReal,
    nonneg: bool,
}

impl TermSource for Hypergeometric {
    fn term(&self, k: usize) -> Result<HpReal> {
        let p = self.z.precision();
        let mut t = HpReal::one(p);
        for i in 0..k {
            let fi = HpReal::from_u64(i as u64, p);
            for a in &self.upper {
                t = t * (a + &fi);
            }
            for b in &self.lower {
                t = t / (b + &fi);
            }
            t = t * &self.z / HpReal::from_u64(i as u64 + 1, p);
        }
        Ok(t)
    }
    fn work(&self, k: usize) -> usize {
        k * (self.upper.len() + self.lower.len() + 3) + 4
    }
    fn nonnegative(&self) -> bool {
        self.nonneg
    }
    fn precision(&self) -> usize {
        self.z.precision()
    }
}

/// Generalized hypergeometric series `pFq(upper; lower; z)` for `p <= q`.
///
/// For `k > max|b_j|` the term ratio is bounded by
/// `|z| Π_i (k+|a_i|)/(k-|b_i|) · Π_{j>p} 1/(k-|b_j|) · 1/(k+1)`, a product of
/// factors that are each nonincreasing in `k`. The first `k` where that bound
/// drops to `1/2` starts the halving tail rule.
pub fn hyper_pfq(
    upper: &[ExactRational],
    lower: &[ExactRational],
    z: &HpReal,
    eps: &HpReal,
) -> Result<(HpReal, TruncationCertificate)> {
    let src = hyper_source(upper, lower, z)?;
    let max_b = lower.iter().map(|b| b.abs()).max().unwrap_or_else(ExactRational::zero);
    let mut k = max_b.floor().to_integer() + BigInt::one();
    let zr = z.abs().to_rational();
    let half = ExactRational::new(1.into(), 2.into());
    let from = loop {
        let kk = ExactRational::from(k.clone());
        let mut bound = zr.clone() / (kk.clone() + ExactRational::one());
        for (i, b) in lower.iter().enumerate() {
            let mut f = ExactRational::one() / (kk.clone() - b.abs());
            if let Some(a) = upper.get(i) {
                f *= kk.clone() + a.abs();
            }
            bound *= f;
        }
        if bound <= half {
            break k;
        }
        k += 1;
        if k > BigInt::from(crate::sum::DEFAULT_MAX_TERMS) {
            return Err(Error::convergence("hypergeometric ratio bound never reaches 1/2"));
        }
    };
    let from: usize = from.try_into().map_err(|_| Error::convergence("start index too large"))?;
    sum_certified(&src, &TailRule::Halving { from }, eps, crate::sum::DEFAULT_MAX_TERMS)
}

/// Plain partial sum of the first `terms` terms of `pFq`.
pub fn hyper_pfq_terms(
    upper: &[ExactRational],
    lower: &[ExactRational],
    z: &HpReal,
    terms: usize,
) -> Result<HpReal> {
    partial_sum(&hyper_source(upper, lower, z)?, terms)
}

fn hyper_source(upper: &[ExactRational], lower: &[ExactRational], z: &HpReal) -> Result<Hypergeometric> {
    if upper.len() > lower.len() {
        return Err(Error::unsupported("pFq is only summed for p <= q"));
    }
    if lower.iter().any(|b| b.is_integer() && !b.is_positive()) {
        return Err(Error::domain("lower pFq parameter is a nonpositive integer"));
    }
    let p = z.precision();
    let nonneg = !z.is_negative()
        && upper.iter().all(|a| !a.is_negative())
        && lower.iter().all(|b| b.is_positive());
    Ok(Hypergeometric {
        upper: upper.iter().map(|a| HpReal::from_rational(a, p)).collect(),
        lower: lower.iter().map(|b| HpReal::from_rational(b, p)).collect(),
        z: z.clone(),
        nonneg,
    })
}
