//! Dobiński-type series for Bell-type numbers and polynomials, evaluated at
//! high precision with certified truncation.
//!
//! The working precision is the precision of the `eps` argument. The series
//! sum `S` is certified to `eps / (2 c)` where `c` is the prefactor, so the
//! scaled value carries at most `eps / 2` from the outer series. Inexact inner
//! sums (only for `O(B(B))`) are budgeted another `eps / 4`.
//!
//! Tail rules:
//!
//! * Bell, `F_r` and `B(L)` series: the term ratio is at most
//!   `(1 + 1/k)^n y / (k + 1)` (with `y = 1` for `B(L)`). For
//!   `k >= max(2n, ⌈2ey⌉)` this is at most `e^{1/2} / (2e) < 1/2`, so the
//!   halving rule applies.
//! * Composed series `Σ_k k^n a_k / k!`: if `A(x) = Σ a_k x^k / k!` has
//!   nonnegative coefficients and converges at `R > 1`, Cauchy's estimate
//!   gives `a_k / k! <= A(R) / R^k`, hence the majorant `A(R) k^n R^{-k}`.
//!   Several radii are tried and the smallest tail bound is kept.

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{factorial, lah, ExactRational};
use crate::hp::HpReal;
use crate::spec::GeneratorSpec;
use crate::specfun::{eulerian_next, laguerre, laguerre_coeffs, polylog_neg_with_row};
use crate::sum::{
    partial_sum, pow_u, range_sum, sum_certified, Majorant, TailRule, TermSource, TruncationCertificate,
    DEFAULT_MAX_TERMS,
};

/// Roundings charged for forming a prefactor and multiplying by it.
const PREFACTOR_WORK: u64 = 64;

/// Values computed in index order on first use and kept for later calls.
pub(crate) struct Memo<T> {
    items: Mutex<Vec<T>>,
    next: Box<dyn Fn(&[T]) -> T + Send + Sync>,
}

impl<T> Memo<T> {
    pub(crate) fn new(next: impl Fn(&[T]) -> T + Send + Sync + 'static) -> Self {
        Memo { items: Mutex::new(Vec::new()), next: Box::new(next) }
    }

    pub(crate) fn with<R>(&self, i: usize, f: impl FnOnce(&T) -> R) -> R {
        let mut items = self.items.lock().expect("memo lock poisoned");
        while items.len() <= i {
            let v = (self.next)(&items);
            items.push(v);
        }
        f(&items[i])
    }
}

/// Rows `S(m, 0..=m)` of the Stirling numbers of the second kind, `m >= 0`.
pub(crate) fn stirling_memo() -> Memo<Vec<BigInt>> {
    Memo::new(|rows: &[Vec<BigInt>]| match rows.last() {
        None => vec![BigInt::one()],
        Some(prev) => {
            let m = prev.len();
            (0..=m)
                .map(|k| {
                    let stay = prev.get(k).map(|s| s * BigInt::from(k)).unwrap_or_default();
                    let up = if k >= 1 { prev[k - 1].clone() } else { BigInt::zero() };
                    stay + up
                })
                .collect()
        }
    })
}

/// `Li_{-m}(z)` for `m = 0, 1, ...`, each with its Eulerian row.
fn polylog_memo(z: HpReal) -> Memo<(Vec<BigInt>, HpReal)> {
    Memo::new(move |done: &[(Vec<BigInt>, HpReal)]| {
        let m = done.len();
        let row = match done.last() {
            None => vec![BigInt::one()],
            Some((prev, _)) if m >= 2 => eulerian_next(prev),
            Some((prev, _)) => prev.clone(),
        };
        let value = polylog_neg_with_row(m as u32, &row, &z);
        (row, value)
    })
}

/// `T_m(x) = Σ_j S(m, j) x^j`.
pub(crate) fn touchard(row: &[BigInt], x: &HpReal) -> HpReal {
    let p = x.precision();
    row.iter().rev().fold(HpReal::zero(p), |acc, c| acc * x + HpReal::from_bigint(c, p))
}

fn pow_k(k: usize, n: usize, p: usize) -> HpReal {
    HpReal::from_bigint(&BigInt::from(k).pow(n as u32), p)
}

fn log2_ceil(k: usize) -> usize {
    (usize::BITS - k.max(1).leading_zeros()) as usize
}

/// Smallest integer `>= x`, padded so that rounding of `x` cannot lower it.
fn safe_ceil(x: &HpReal) -> usize {
    (x.to_f64() * (1.0 + 1e-12) + 1e-12).ceil().max(0.0) as usize
}

fn cauchy_majorants(
    degree: u32,
    radii: &[f64],
    p: usize,
    g: impl Fn(&HpReal) -> Option<HpReal>,
) -> Vec<Majorant> {
    radii
        .iter()
        .filter_map(|&r| {
            let r = HpReal::from_f64(r, p);
            let c = g(&r)?;
            (c.is_finite() && c.is_positive()).then(|| Majorant::new(c, degree, r.recip()))
        })
        .collect()
}

/// A Dobiński-type series `prefactor · Σ_k t_k` with its tail rule.
pub struct DobinskiSeries {
    prefactor: HpReal,
    source: Box<dyn TermSource + Send + Sync>,
    rule: TailRule,
    inner_budget: HpReal,
    eps: HpReal,
}

impl fmt::Debug for DobinskiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DobinskiSeries")
            .field("prefactor", &self.prefactor)
            .field("rule", &self.rule)
            .field("eps", &self.eps)
            .finish()
    }
}

impl DobinskiSeries {
    /// Sums the series to the tolerance it was built with.
    pub fn evaluate(&self) -> Result<(HpReal, TruncationCertificate)> {
        let p = self.eps.precision();
        let outer_eps = self.eps.ldexp(-1) / &self.prefactor;
        let (s, cert) = sum_certified(self.source.as_ref(), &self.rule, &outer_eps, DEFAULT_MAX_TERMS)?;
        let value = &self.prefactor * &s;
        let u = HpReal::one(p).ldexp(1 - p as i32);
        let tail = &cert.tail_bound * &self.prefactor + &self.inner_budget;
        let rounding = &cert.rounding_bound * &self.prefactor + HpReal::from_u64(PREFACTOR_WORK, p) * u * value.abs();
        if &tail + &rounding > self.eps {
            return Err(Error::Precision { bits: p, eps: self.eps.to_sci(3) });
        }
        let cert = TruncationCertificate {
            terms_used: cert.terms_used,
            tail_bound: tail,
            rounding_bound: rounding,
            target_epsilon: self.eps.clone(),
        };
        Ok((value, cert))
    }

    /// `prefactor · (t_first + ... )` over the first `terms` terms.
    pub fn partial(&self, terms: usize) -> Result<HpReal> {
        Ok(&self.prefactor * partial_sum(self.source.as_ref(), terms)?)
    }

    /// `prefactor ·` the sum of `count` terms after the first `skip`; after a
    /// certified evaluation with `terms_used = skip` this is a lower bound on
    /// the omitted tail.
    pub fn remainder(&self, skip: usize, count: usize) -> Result<HpReal> {
        Ok(&self.prefactor * range_sum(self.source.as_ref(), skip, count)?)
    }

    /// `e^{-y} Σ_k k^n y^k / k!`, equal to `B(n, y)`.
    pub fn bell(n: usize, y: &HpReal, eps: &HpReal) -> Result<Self> {
        DobinskiSeries::r_family(n, y, 1, eps)
    }

    /// `(r-1)^n e^{-y} Σ_k [Γ(n + k/(r-1)) / Γ(k/(r-1))] y^k / k!`.
    ///
    /// `(r-1)^n Γ(n + k/(r-1)) / Γ(k/(r-1)) = Π_{i<n} (k + i(r-1))`, an exact
    /// integer; for `r = 1` the same product is `k^n`.
    pub fn r_family(n: usize, y: &HpReal, r: u32, eps: &HpReal) -> Result<Self> {
        check_eps(eps)?;
        if r == 0 {
            return Err(Error::domain("r must be >= 1"));
        }
        if !y.is_positive() {
            return Err(Error::domain("y must be positive"));
        }
        let p = eps.precision();
        let y = with_precision(y, p);
        let two_e_y = HpReal::one(p).exp() * &y.ldexp(1);
        let from = (2 * n).max(safe_ceil(&two_e_y)).max(1);
        Ok(DobinskiSeries {
            prefactor: (-&y).exp(),
            source: Box::new(RisingSource { n, step: r as u64 - 1, y }),
            rule: TailRule::Halving { from },
            inner_budget: HpReal::zero(p),
            eps: eps.clone(),
        })
    }

    /// Series for the composed sequences listed in [`ComposedKind`].
    pub fn composed(kind: ComposedKind, n: usize, eps: &HpReal) -> Result<Self> {
        check_eps(eps)?;
        if n < kind.min_n() {
            return Err(Error::domain(format!("{kind} series needs n >= {}", kind.min_n())));
        }
        let p = eps.precision();
        let one = HpReal::one(p);
        let u = (-&one).exp();
        let zero = HpReal::zero(p);
        let series = match kind {
            ComposedKind::BB => {
                // e^{u-1} Σ_k k^n T_k(u) / k!, u = e^{-1}; A(x) = e^{u(e^x - 1)}.
                let g = |r: &HpReal| Some((&u * (r.exp() - HpReal::one(p))).exp());
                let radii = [1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 16.0];
                DobinskiSeries {
                    prefactor: (&u - &one).exp(),
                    rule: TailRule::Majorants(cauchy_majorants(n as u32, &radii, p, g)),
                    source: Box::new(BellBellSource { n, u: u.clone(), rows: stirling_memo() }),
                    inner_budget: zero,
                    eps: eps.clone(),
                }
            }
            ComposedKind::BBB => {
                // e^{v-1} Σ_k k^n/k! Σ_p S(k,p) e^{-p} T_p(v), v = e^{u-1};
                // A(x) = e^{v(e^{u(e^x-1)} - 1)}.
                let v = (&u - &one).exp();
                let g = |r: &HpReal| {
                    let inner = (&u * (r.exp() - HpReal::one(p))).exp();
                    Some((&v * (inner - HpReal::one(p))).exp())
                };
                let radii = [1.1, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 3.0, 3.5, 4.0, 4.5];
                let stirling = std::sync::Arc::new(stirling_memo());
                let rows = stirling.clone();
                let (vv, uu) = (v.clone(), u.clone());
                let inner = Memo::new(move |done: &[HpReal]| {
                    let m = done.len();
                    let t = rows.with(m, |row| touchard(row, &vv));
                    pow_u(&uu, m as u64) * t
                });
                DobinskiSeries {
                    prefactor: (&v - &one).exp(),
                    rule: TailRule::Majorants(cauchy_majorants(n as u32, &radii, p, g)),
                    source: Box::new(TripleBellSource { n, rows: stirling, inner, p }),
                    inner_budget: zero,
                    eps: eps.clone(),
                }
            }
            ComposedKind::BL => {
                // e^{-1} Σ_k B_L(n, k) / k!; B_L(n, ·) has nonnegative
                // coefficients, so its ratio is at most (1 + 1/k)^n.
                let coeffs: Vec<BigInt> = if n == 0 {
                    vec![BigInt::one()]
                } else {
                    std::iter::once(BigInt::zero()).chain((1..=n).map(|j| lah(n, j).expect("1 <= j <= n"))).collect()
                };
                DobinskiSeries {
                    prefactor: u.clone(),
                    source: Box::new(BellLahSource { coeffs, p }),
                    rule: TailRule::Halving { from: (2 * n).max(6) },
                    inner_budget: zero,
                    eps: eps.clone(),
                }
            }
            ComposedKind::LB => {
                // ½ e^{-1/2} Σ_{k>=1} k^{n-1} L^{(1)}_{k-1}(-1/2) / 2^k. With
                // G(t) = Σ_m L^{(1)}_m(-1/2) t^m = (1-t)^{-2} e^{t/(2(1-t))},
                // each term is at most ρ G(ρ) k^{n-1} (2ρ)^{-k} for 1/2 < ρ < 1.
                let majorants = [0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95]
                    .iter()
                    .map(|&rho| {
                        let rho = HpReal::from_f64(rho, p);
                        let q = HpReal::one(p) - &rho;
                        let g = (&rho / q.ldexp(1)).exp() / (&q * &q);
                        Majorant::new(&rho * g, n as u32 - 1, rho.ldexp(1).recip())
                    })
                    .collect();
                DobinskiSeries {
                    prefactor: one.ldexp(-1).exp().recip().ldexp(-1),
                    source: Box::new(LahBellSource { n, p }),
                    rule: TailRule::Majorants(majorants),
                    inner_budget: zero,
                    eps: eps.clone(),
                }
            }
            ComposedKind::OB => {
                // ½ Σ_{k>=1} k^n Li_{-k}(z) / k!, z = 1/(2e);
                // A(x) = z e^x / (1 - z e^x) for x < ln(1/z) ≈ 1.693.
                let z = u.ldexp(-1);
                let g = |r: &HpReal| {
                    let w = &z * r.exp();
                    (w < HpReal::one(p)).then(|| &w / (HpReal::one(p) - &w))
                };
                let radii = [1.05, 1.1, 1.2, 1.3, 1.4, 1.5, 1.55, 1.6, 1.65, 1.68];
                DobinskiSeries {
                    prefactor: one.ldexp(-1),
                    rule: TailRule::Majorants(cauchy_majorants(n as u32, &radii, p, g)),
                    source: Box::new(OrderedBellSource { n, polylog: polylog_memo(z) }),
                    inner_budget: zero,
                    eps: eps.clone(),
                }
            }
            ComposedKind::OBB => {
                // ½ Σ_{k>=1} k^n c_k / k!, c_k = Σ_{p>=1} p^k e^{-p} Li_{-p}(z) / p!;
                // Σ_k c_k x^k / k! has nonnegative coefficients and is bounded by
                // z e^w / (1 - z e^w), w = e^{x-1}, for x < 1 + ln ln(2e) ≈ 1.527.
                let z = u.ldexp(-1);
                let g = |r: &HpReal| {
                    let w = &z * (r - &HpReal::one(p)).exp().exp();
                    (w < HpReal::one(p)).then(|| &w / (HpReal::one(p) - &w))
                };
                let radii = [1.05, 1.1, 1.15, 1.2, 1.25, 1.3, 1.35, 1.4, 1.45, 1.5, 1.52];
                DobinskiSeries {
                    prefactor: one.ldexp(-1),
                    rule: TailRule::Majorants(cauchy_majorants(n as u32, &radii, p, g)),
                    source: Box::new(OrderedBellBellSource {
                        n,
                        z: z.clone(),
                        u: u.clone(),
                        polylog: std::sync::Arc::new(polylog_memo(z)),
                        eps: eps.clone(),
                    }),
                    inner_budget: eps.ldexp(-2),
                    eps: eps.clone(),
                }
            }
            ComposedKind::LL => {
                // x/(1-2x) = ½ F_L(2x), so B_{L(L)}(n, y) = 2^n B_L(n, y/2).
                return DobinskiSeries::laguerre_nest(n, &one, 2, eps);
            }
        };
        Ok(series)
    }

    /// `p`-fold nested Laguerre generator `x / (1 - p x) = (1/p) F_L(p x)`,
    /// giving `p^n B_L(n, y/p)`.
    pub fn laguerre_nest(n: usize, y: &HpReal, depth: u32, eps: &HpReal) -> Result<Self> {
        if depth == 0 {
            return Err(Error::domain("nesting depth must be >= 1"));
        }
        let p = eps.precision();
        let d = HpReal::from_u64(depth as u64, p);
        let scale = pow_u(&d, n as u64);
        let inner_eps = eps / &scale;
        let mut s = DobinskiSeries::r_family(n, &(with_precision(y, p) / &d), 2, &inner_eps)?;
        s.prefactor = &s.prefactor * &scale;
        s.eps = eps.clone();
        Ok(s)
    }
}

fn check_eps(eps: &HpReal) -> Result<()> {
    if !eps.is_positive() || !eps.is_finite() {
        return Err(Error::domain("eps must be positive"));
    }
    Ok(())
}

fn with_precision(x: &HpReal, p: usize) -> HpReal {
    x * &HpReal::one(p)
}

struct RisingSource {
    n: usize,
    step: u64,
    y: HpReal,
}

impl TermSource for RisingSource {
    fn term(&self, k: usize) -> Result<HpReal> {
        let p = self.y.precision();
        let f = (0..self.n as u64).fold(BigInt::one(), |acc, i| acc * (k as u64 + i * self.step));
        Ok(HpReal::from_bigint(&f, p) * pow_u(&self.y, k as u64) / HpReal::from_bigint(&factorial(k as u64), p))
    }
    fn work(&self, k: usize) -> usize {
        2 * log2_ceil(k) + 8
    }
    fn precision(&self) -> usize {
        self.y.precision()
    }
}

struct BellBellSource {
    n: usize,
    u: HpReal,
    rows: Memo<Vec<BigInt>>,
}

impl TermSource for BellBellSource {
    fn term(&self, k: usize) -> Result<HpReal> {
        let p = self.u.precision();
        let t = self.rows.with(k, |row| touchard(row, &self.u));
        Ok(pow_k(k, self.n, p) * t / HpReal::from_bigint(&factorial(k as u64), p))
    }
    fn work(&self, k: usize) -> usize {
        2 * k + 8
    }
    fn precision(&self) -> usize {
        self.u.precision()
    }
}

struct TripleBellSource {
    n: usize,
    rows: std::sync::Arc<Memo<Vec<BigInt>>>,
    /// `e^{-m} T_m(v)`.
    inner: Memo<HpReal>,
    p: usize,
}

impl TermSource for TripleBellSource {
    fn term(&self, k: usize) -> Result<HpReal> {
        let p = self.p;
        let row = self.rows.with(k, |row| row.clone());
        let a = row
            .iter()
            .enumerate()
            .fold(HpReal::zero(p), |acc, (m, s)| acc + HpReal::from_bigint(s, p) * self.inner.with(m, |x| x.clone()));
        Ok(pow_k(k, self.n, p) * a / HpReal::from_bigint(&factorial(k as u64), p))
    }
    fn work(&self, k: usize) -> usize {
        6 * k + 16
    }
    fn precision(&self) -> usize {
        self.p
    }
}

struct BellLahSource {
    coeffs: Vec<BigInt>,
    p: usize,
}

impl TermSource for BellLahSource {
    fn term(&self, k: usize) -> Result<HpReal> {
        let kb = BigInt::from(k);
        let poly = self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * &kb + c);
        Ok(HpReal::from_bigint(&poly, self.p) / HpReal::from_bigint(&factorial(k as u64), self.p))
    }
    fn work(&self, _k: usize) -> usize {
        4
    }
    fn precision(&self) -> usize {
        self.p
    }
}

struct LahBellSource {
    n: usize,
    p: usize,
}

impl TermSource for LahBellSource {
    fn first_index(&self) -> usize {
        1
    }
    fn term(&self, k: usize) -> Result<HpReal> {
        let half = ExactRational::new((-1).into(), 2.into());
        let l = laguerre(k - 1, 1, &half);
        let t = l * ExactRational::from_integer(BigInt::from(k).pow(self.n as u32 - 1))
            / ExactRational::from_integer(BigInt::one() << k);
        Ok(HpReal::from_rational(&t, self.p))
    }
    fn work(&self, _k: usize) -> usize {
        4
    }
    fn precision(&self) -> usize {
        self.p
    }
}

struct OrderedBellSource {
    n: usize,
    polylog: Memo<(Vec<BigInt>, HpReal)>,
}

impl TermSource for OrderedBellSource {
    fn first_index(&self) -> usize {
        1
    }
    fn term(&self, k: usize) -> Result<HpReal> {
        let li = self.polylog.with(k, |(_, v)| v.clone());
        let p = li.precision();
        Ok(pow_k(k, self.n, p) * li / HpReal::from_bigint(&factorial(k as u64), p))
    }
    fn work(&self, k: usize) -> usize {
        3 * k + 16
    }
    fn precision(&self) -> usize {
        self.polylog.with(0, |(_, v)| v.precision())
    }
}

struct OrderedBellBellSource {
    n: usize,
    z: HpReal,
    u: HpReal,
    polylog: std::sync::Arc<Memo<(Vec<BigInt>, HpReal)>>,
    eps: HpReal,
}

struct OrderedBellBellInner<'a> {
    k: usize,
    u: &'a HpReal,
    polylog: &'a Memo<(Vec<BigInt>, HpReal)>,
}

impl TermSource for OrderedBellBellInner<'_> {
    fn first_index(&self) -> usize {
        1
    }
    fn term(&self, m: usize) -> Result<HpReal> {
        let p = self.u.precision();
        let li = self.polylog.with(m, |(_, v)| v.clone());
        Ok(pow_k(m, self.k, p) * pow_u(self.u, m as u64) * li / HpReal::from_bigint(&factorial(m as u64), p))
    }
    fn work(&self, m: usize) -> usize {
        3 * m + 2 * log2_ceil(m) + 16
    }
    fn precision(&self) -> usize {
        self.u.precision()
    }
}

impl TermSource for OrderedBellBellSource {
    fn first_index(&self) -> usize {
        1
    }
    /// `k^n c_k / k!` with `c_k` summed to within
    /// `δ_k = (eps/4) k! / (½ k^n) 2^{-(k+1)}`, so the inner errors add up to
    /// at most `eps / 4` in the final value.
    fn term(&self, k: usize) -> Result<HpReal> {
        let p = self.u.precision();
        let kn = pow_k(k, self.n, p);
        let kf = HpReal::from_bigint(&factorial(k as u64), p);
        let delta = self.eps.ldexp(-2) * &kf / kn.ldexp(-1) * HpReal::one(p).ldexp(-(k as i32 + 1));
        // Inner majorant: Li_{-m}(z)/m! <= A(R)/R^m with A(R) = z e^R/(1 - z e^R),
        // times e^{-m}: ratio 1/(eR).
        let majorants = cauchy_majorants(k as u32, &[0.5, 0.75, 1.0, 1.25, 1.5, 1.6, 1.65, 1.68], p, |r| {
            let w = &self.z * r.exp();
            (w < HpReal::one(p)).then(|| &w / (HpReal::one(p) - &w))
        })
        .into_iter()
        .map(|m| Majorant::new(m.coeff, m.degree, &m.ratio * &self.u))
        .collect();
        let inner = OrderedBellBellInner { k, u: &self.u, polylog: &self.polylog };
        let (c, _) = sum_certified(&inner, &TailRule::Majorants(majorants), &delta, DEFAULT_MAX_TERMS)?;
        Ok(kn * c / kf)
    }
    fn work(&self, _k: usize) -> usize {
        16
    }
    fn precision(&self) -> usize {
        self.u.precision()
    }
}

/// Composed sequences with a dedicated Dobiński-type series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComposedKind {
    BB,
    BBB,
    BL,
    LB,
    LL,
    OB,
    OBB,
}

impl ComposedKind {
    pub const ALL: [ComposedKind; 7] = [
        ComposedKind::BB,
        ComposedKind::BBB,
        ComposedKind::BL,
        ComposedKind::LB,
        ComposedKind::LL,
        ComposedKind::OB,
        ComposedKind::OBB,
    ];

    /// The generator whose sequence this series sums.
    pub fn spec(self) -> GeneratorSpec {
        let text = match self {
            ComposedKind::BB => "B(B)",
            ComposedKind::BBB => "B(B(B))",
            ComposedKind::BL => "B(L)",
            ComposedKind::LB => "L(B)",
            ComposedKind::LL => "L(L)",
            ComposedKind::OB => "O(B)",
            ComposedKind::OBB => "O(B(B))",
        };
        text.parse().expect("built-in spec parses")
    }

    pub fn from_spec(spec: &GeneratorSpec) -> Option<Self> {
        ComposedKind::ALL.into_iter().find(|k| k.spec() == *spec)
    }

    /// Smallest `n` for which the series is valid.
    pub fn min_n(self) -> usize {
        match self {
            ComposedKind::LB | ComposedKind::OB | ComposedKind::OBB => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for ComposedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec())
    }
}

impl FromStr for ComposedKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        ComposedKind::ALL
            .into_iter()
            .find(|k| format!("{k:?}") == upper)
            .or_else(|| s.parse::<GeneratorSpec>().ok().and_then(|spec| ComposedKind::from_spec(&spec)))
            .ok_or_else(|| Error::Parse(format!("unknown composed kind {s:?}")))
    }
}

/// `B(n, y) = e^{-y} Σ_k k^n y^k / k!`.
pub fn dobinski_bell(n: usize, y: &HpReal, eps: &HpReal) -> Result<(HpReal, TruncationCertificate)> {
    DobinskiSeries::bell(n, y, eps)?.evaluate()
}

/// `B_{r,1}(n, y)` from the `F_r` Dobiński series.
pub fn dobinski_r(n: usize, y: &HpReal, r: u32, eps: &HpReal) -> Result<(HpReal, TruncationCertificate)> {
    DobinskiSeries::r_family(n, y, r, eps)?.evaluate()
}

/// Composed sequence value `B_{kind}(n)`.
pub fn dobinski_composed(kind: ComposedKind, n: usize, eps: &HpReal) -> Result<(HpReal, TruncationCertificate)> {
    DobinskiSeries::composed(kind, n, eps)?.evaluate()
}

/// Ordered Bell numbers `½ Σ_k k^n / 2^k`. The terms are exactly
/// `k^n (1/2)^k`, so the geometric majorant with ratio 1/2 applies.
pub fn ordered_bell_dobinski(n: usize, eps: &HpReal) -> Result<(HpReal, TruncationCertificate)> {
    ordered_bell_series(n, eps)?.evaluate()
}

pub fn ordered_bell_series(n: usize, eps: &HpReal) -> Result<DobinskiSeries> {
    check_eps(eps)?;
    let p = eps.precision();
    let half = HpReal::one(p).ldexp(-1);
    Ok(DobinskiSeries {
        prefactor: half.clone(),
        source: Box::new(RisingSource { n, step: 0, y: half.clone() }.into_geometric()),
        rule: TailRule::Majorants(vec![Majorant::new(HpReal::one(p), n as u32, half)]),
        inner_budget: HpReal::zero(p),
        eps: eps.clone(),
    })
}

struct GeometricPower {
    n: usize,
    q: HpReal,
}

impl RisingSource {
    fn into_geometric(self) -> GeometricPower {
        GeometricPower { n: self.n, q: self.y }
    }
}

impl TermSource for GeometricPower {
    fn term(&self, k: usize) -> Result<HpReal> {
        Ok(pow_k(k, self.n, self.q.precision()) * pow_u(&self.q, k as u64))
    }
    fn work(&self, k: usize) -> usize {
        log2_ceil(k) + 4
    }
    fn precision(&self) -> usize {
        self.q.precision()
    }
}

/// The Dobiński-type series for `spec` at `(n, y)`, when one exists.
///
/// * `B`, `L`, `R{r}`: the `F_r` series at any `y > 0`.
/// * `L(L(...(L)))`: the rescaled Laguerre series at any `y > 0`.
/// * `O`, and the composites of [`ComposedKind`]: at `y = 1` only.
pub fn series_for(spec: &GeneratorSpec, n: usize, y: &HpReal, eps: &HpReal) -> Result<DobinskiSeries> {
    spec.validate()?;
    if let GeneratorSpec::BellR(r) | GeneratorSpec::Rs { r, s: 1 } = spec {
        return DobinskiSeries::r_family(n, y, *r, eps);
    }
    if let Some(depth) = laguerre_depth(spec) {
        return DobinskiSeries::laguerre_nest(n, y, depth, eps);
    }
    let unit = *y == HpReal::one(y.precision());
    if *spec == GeneratorSpec::OrderedBell && unit {
        return ordered_bell_series(n, eps);
    }
    if let Some(kind) = ComposedKind::from_spec(spec) {
        if unit {
            return DobinskiSeries::composed(kind, n, eps);
        }
    }
    Err(Error::unsupported(format!("no Dobinski series for {spec} at y = {}", y.to_sci(6))))
}

/// Number of nested `L`s if `spec` is `L(L(...L))`.
fn laguerre_depth(spec: &GeneratorSpec) -> Option<u32> {
    match spec {
        GeneratorSpec::BellR(2) | GeneratorSpec::Rs { r: 2, s: 1 } => Some(1),
        GeneratorSpec::Composite(o, i) => {
            let outer = laguerre_depth(o)?;
            Some(outer + laguerre_depth(i)?)
        }
        _ => None,
    }
}

/// Evaluates [`series_for`].
pub fn dobinski(spec: &GeneratorSpec, n: usize, y: &HpReal, eps: &HpReal) -> Result<(HpReal, TruncationCertificate)> {
    series_for(spec, n, y, eps)?.evaluate()
}

/// Closed forms in terms of `L^{(1)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosedForm {
    /// `B_L(n, y) = (n-1)! y L^{(1)}_{n-1}(-y)`.
    Lah,
    /// `B_{L(L)}(n, y) = 2^{n-1} (n-1)! y L^{(1)}_{n-1}(-y/2)`.
    LL,
    /// `p`-fold nested Laguerre: `p^{n-1} (n-1)! y L^{(1)}_{n-1}(-y/p)`.
    Lp(u32),
}

pub fn closed_form(kind: ClosedForm, n: usize, y: &ExactRational) -> Result<ExactRational> {
    if n == 0 {
        return Err(Error::domain("closed forms are stated for n >= 1"));
    }
    let p = match kind {
        ClosedForm::Lah => 1,
        ClosedForm::LL => 2,
        ClosedForm::Lp(0) => return Err(Error::domain("nesting depth p must be >= 1")),
        ClosedForm::Lp(p) => p,
    };
    let pb = BigInt::from(p);
    let x = -(y / ExactRational::from_integer(pb.clone()));
    let scale = ExactRational::from_integer(pb.pow(n as u32 - 1) * factorial(n as u64 - 1));
    Ok(scale * y * laguerre(n - 1, 1, &x))
}

/// Exact coefficients of `y ↦ closed_form(kind, n, y)` as a polynomial.
pub fn closed_form_coeffs(kind: ClosedForm, n: usize) -> Result<Vec<ExactRational>> {
    let p = match kind {
        ClosedForm::Lah => 1,
        ClosedForm::LL => 2,
        ClosedForm::Lp(0) => return Err(Error::domain("nesting depth p must be >= 1")),
        ClosedForm::Lp(p) => p,
    };
    if n == 0 {
        return Err(Error::domain("closed forms are stated for n >= 1"));
    }
    let pb = ExactRational::from_integer(BigInt::from(p));
    let scale = ExactRational::from_integer(BigInt::from(p).pow(n as u32 - 1) * factorial(n as u64 - 1));
    let mut out = vec![ExactRational::zero()];
    let mut pj = ExactRational::one();
    for (j, c) in laguerre_coeffs(n - 1, 1).into_iter().enumerate() {
        // c x^j with x = -y/p contributes to y^{j+1}
        let sign = if j % 2 == 0 { ExactRational::one() } else { -ExactRational::one() };
        out.push(&scale * c * sign / &pj);
        pj *= &pb;
    }
    Ok(out)
}
