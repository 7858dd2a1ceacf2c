//! Concrete weight functions.
//!
//! Every weight takes its parameter `y > 0` at evaluation time, so the same
//! object can serve as the kernel `W_G(x, z)` of a composition.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::dobinski::{stirling_memo, touchard, Memo};
use crate::error::{Error, Result};
use crate::exact::{factorial, ExactRational};
use crate::hp::HpReal;
use crate::specfun::{bessel_i1_scaled, hyper_pfq, laguerre_hp, polylog_neg};
use crate::sum::{
    partial_sum, pow_u, sum_certified, Majorant, TailRule, TermSource, TruncationCertificate, DEFAULT_MAX_TERMS,
};

/// Cauchy radii used to turn a generating function bound into majorants.
pub(crate) const RADII: [f64; 10] = [1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0];

/// Roundings charged per density evaluation on top of its inner series.
const EVAL_WORK: u64 = 64;

/// `W(x, y) <= coeff · x^power · e^{-rate x}` for `x >= from`.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub coeff: HpReal,
    pub power: u32,
    pub rate: HpReal,
    pub from: f64,
}

impl Envelope {
    /// Bound on `∫_X^∞ x^n W(x, y) dx` for `X >= from`:
    /// `coeff Γ(m+1, rate X) / rate^{m+1}` with `m = n + power`.
    pub fn tail(&self, n: usize, x: &HpReal) -> HpReal {
        let m = n as u32 + self.power;
        let t = &self.rate * x;
        &self.coeff * super::quad::upper_gamma_int(m, &t) / self.rate.powi(m + 1)
    }

    /// `∫_0^∞ x^n · envelope`, meaningful only when `from == 0`.
    pub fn total(&self, n: usize) -> HpReal {
        let p = self.rate.precision();
        self.tail(n, &HpReal::zero(p))
    }
}

/// `W(x, z) <= coeff · z^degree · e^{growth z} · e^{-decay x}` for all
/// `x, z > 0`: a bound on a density viewed as a function of its parameter.
#[derive(Clone, Debug)]
pub struct KernelBound {
    pub coeff: HpReal,
    pub degree: u32,
    pub growth: HpReal,
    pub decay: HpReal,
}

/// Atoms `w_k(y)` of a weight `Σ_k w_k(y) δ(x - k)`.
pub trait CombWeight: Send + Sync {
    fn label(&self) -> String;

    fn first_atom(&self) -> usize;

    fn atom(&self, k: usize, y: &HpReal) -> Result<HpReal>;

    /// `atom(k, y) <= c k^d q^k` for every `k >= 1`.
    fn majorants(&self, y: &HpReal) -> Result<Vec<Majorant>>;

    /// Upper bound on `Σ_k atom(k, y) s^k` for `s > 0`, if one is known.
    fn pgf_bound(&self, y: &HpReal, s: &HpReal) -> Result<Option<HpReal>> {
        let mut best: Option<HpReal> = None;
        for m in self.majorants(y)? {
            let qs = &m.ratio * s;
            if qs >= HpReal::one(s.precision()) {
                continue;
            }
            let b = &m.coeff * polylog_neg(m.degree, &qs)?;
            best = Some(match best {
                Some(prev) => prev.min(b),
                None => b,
            });
        }
        if let (Some(b), 0) = (&best, self.first_atom()) {
            return Ok(Some(b + &self.atom(0, y)?));
        }
        Ok(best)
    }

    /// Relative error of `atom` beyond the usual rounding model.
    fn relative_error(&self, prec: usize) -> HpReal {
        HpReal::zero(prec)
    }

    /// Roundings incurred by one call to `atom(k, ·)`.
    fn work(&self, k: usize) -> usize {
        4 * k + 64
    }

    /// True for the Poisson comb `e^{-y} y^k / k!`.
    fn is_poisson(&self) -> bool {
        false
    }
}

/// A density `W(x, y)` on `x > 0`.
pub trait Density: Send + Sync {
    fn label(&self) -> String;

    /// Value and a bound on its absolute error.
    fn eval(&self, x: &HpReal, y: &HpReal) -> Result<(HpReal, HpReal)>;

    fn envelope(&self, y: &HpReal) -> Result<Envelope>;

    /// Bounds in the parameter, at precision `prec`. Empty if none are known.
    fn kernels(&self, _prec: usize) -> Vec<KernelBound> {
        Vec::new()
    }

    /// Moments by a route other than integrating `eval`, if the density has
    /// one; `eps` holds absolute tolerances for `n = 0, 1, ...`.
    fn moments(&self, _y: &HpReal, _eps: &[HpReal]) -> Option<Result<Vec<(HpReal, TruncationCertificate)>>> {
        None
    }
}

pub(crate) fn check_y(y: &HpReal) -> Result<()> {
    if !y.is_positive() || !y.is_finite() {
        return Err(Error::domain("weight parameter y must be positive"));
    }
    Ok(())
}

pub(crate) fn pointwise_tolerance(prec: usize) -> HpReal {
    HpReal::one(prec).ldexp(-(prec as i32) / 2)
}

fn eval_rounding(value: &HpReal) -> HpReal {
    let p = value.precision();
    HpReal::from_u64(EVAL_WORK, p) * HpReal::one(p).ldexp(1 - p as i32) * value.abs()
}

fn hp_f(x: f64, p: usize) -> HpReal {
    HpReal::from_f64(x, p)
}

fn min_of(values: impl IntoIterator<Item = HpReal>) -> Option<HpReal> {
    values.into_iter().reduce(|a, b| a.min(b))
}

/// Series with nonnegative terms summed to a tolerance relative to the sum
/// of their first few terms.
pub(crate) fn sum_relative<S: TermSource + ?Sized>(src: &S, rule: &TailRule, rel: &HpReal) -> Result<(HpReal, HpReal)> {
    let lead = partial_sum(src, 16)?;
    let eps = if lead.is_positive() { rel * &lead } else { rel.clone() };
    let (v, cert) = sum_certified(src, rule, &eps, DEFAULT_MAX_TERMS)?;
    Ok((v, cert.total_bound()))
}

/// `e^{-y} y^k / k!`, `k >= 0`.
#[derive(Debug, Default)]
pub struct PoissonComb;

impl CombWeight for PoissonComb {
    fn label(&self) -> String {
        "W1".into()
    }
    fn first_atom(&self) -> usize {
        0
    }
    fn atom(&self, k: usize, y: &HpReal) -> Result<HpReal> {
        check_y(y)?;
        let p = y.precision();
        Ok((-y).exp() * pow_u(y, k as u64) / HpReal::from_bigint(&factorial(k as u64), p))
    }
    fn majorants(&self, y: &HpReal) -> Result<Vec<Majorant>> {
        check_y(y)?;
        let p = y.precision();
        // y^k / k! <= e^{yR} / R^k
        Ok(RADII
            .iter()
            .map(|&r| {
                let r = hp_f(r, p);
                Majorant::new((y * &(&r - &HpReal::one(p))).exp(), 0, r.recip())
            })
            .collect())
    }
    fn pgf_bound(&self, y: &HpReal, s: &HpReal) -> Result<Option<HpReal>> {
        Ok(Some((y * &(s - &HpReal::one(y.precision()))).exp()))
    }
    fn work(&self, k: usize) -> usize {
        2 * (usize::BITS - k.max(1).leading_zeros()) as usize + 70
    }
    fn is_poisson(&self) -> bool {
        true
    }
}

/// `e^{y(1/e - 1)} T_p(y/e) / p!`, the atoms of the doubly iterated Bell
/// weight; `T_p` is the Touchard polynomial.
pub struct TouchardComb {
    rows: Memo<Vec<BigInt>>,
}

impl TouchardComb {
    pub fn new() -> Self {
        TouchardComb { rows: stirling_memo() }
    }
}

impl Default for TouchardComb {
    fn default() -> Self {
        Self::new()
    }
}

impl CombWeight for TouchardComb {
    fn label(&self) -> String {
        "BB".into()
    }
    fn first_atom(&self) -> usize {
        0
    }
    fn atom(&self, k: usize, y: &HpReal) -> Result<HpReal> {
        check_y(y)?;
        let p = y.precision();
        let u = (-HpReal::one(p)).exp();
        let yu = y * &u;
        let t = self.rows.with(k, |row| touchard(row, &yu));
        let pre = (y * &(&u - &HpReal::one(p))).exp();
        Ok(pre * t / HpReal::from_bigint(&factorial(k as u64), p))
    }
    fn majorants(&self, y: &HpReal) -> Result<Vec<Majorant>> {
        check_y(y)?;
        let p = y.precision();
        let one = HpReal::one(p);
        let u = (-&one).exp();
        // T_k(yu)/k! <= e^{yu(e^R - 1)} / R^k
        Ok(RADII
            .iter()
            .filter(|&&r| r <= 8.0)
            .map(|&r| {
                let r = hp_f(r, p);
                let c = (y * &(&u - &one) + y * &u * &(r.exp() - &one)).exp();
                Majorant::new(c, 0, r.recip())
            })
            .collect())
    }
    fn pgf_bound(&self, y: &HpReal, s: &HpReal) -> Result<Option<HpReal>> {
        let one = HpReal::one(y.precision());
        let u = (-&one).exp();
        Ok(Some((y * &(&u - &one) + y * &u * &(s.exp() - &one)).exp()))
    }
    fn work(&self, k: usize) -> usize {
        4 * k + 80
    }
}

/// `(y/2) e^{-y/2} L^{(1)}_{k-1}(-y/2) / (2^k k)`, `k >= 1`.
#[derive(Debug, Default)]
pub struct LaguerreComb;

impl CombWeight for LaguerreComb {
    fn label(&self) -> String {
        "LB".into()
    }
    fn first_atom(&self) -> usize {
        1
    }
    fn atom(&self, k: usize, y: &HpReal) -> Result<HpReal> {
        check_y(y)?;
        if k == 0 {
            return Ok(HpReal::zero(y.precision()));
        }
        let p = y.precision();
        let h = y.ldexp(-1);
        let l = laguerre_hp(k - 1, 1, &-&h);
        Ok(&h * (-&h).exp() * l / HpReal::from_u64(k as u64, p) / pow_u(&HpReal::from_u64(2, p), k as u64))
    }
    fn majorants(&self, y: &HpReal) -> Result<Vec<Majorant>> {
        check_y(y)?;
        let p = y.precision();
        let one = HpReal::one(p);
        let h = y.ldexp(-1);
        // Σ_m L^{(1)}_m(-h) ρ^m = (1-ρ)^{-2} e^{hρ/(1-ρ)} with positive
        // coefficients, so L^{(1)}_{k-1}(-h) <= G(ρ) ρ^{1-k}.
        Ok([0.55, 0.6, 0.7, 0.8, 0.9, 0.95]
            .iter()
            .map(|&rho| {
                let rho = hp_f(rho, p);
                let om = &one - &rho;
                let g = (&h * &rho / &om).exp() / (&om * &om);
                let c = &h * (-&h).exp() * g * &rho;
                Majorant::new(c, 0, (rho.ldexp(1)).recip())
            })
            .collect())
    }
    fn work(&self, k: usize) -> usize {
        4 * k + 80
    }
}

/// `(1/s) W_L(x/s, y/s)` with `W_L(x, y) = y e^{-(x+y)} I_1(2√(xy)) / √(xy)`.
/// Scale 1 is the Laguerre weight, scale 2 the weight of `L(L)`.
#[derive(Debug)]
pub struct ScaledLaguerreDensity {
    pub scale: u32,
}

impl Density for ScaledLaguerreDensity {
    fn label(&self) -> String {
        match self.scale {
            1 => "W2".into(),
            2 => "LL".into(),
            s => format!("L/{s}"),
        }
    }

    fn eval(&self, x: &HpReal, y: &HpReal) -> Result<(HpReal, HpReal)> {
        check_y(y)?;
        if x.is_negative() {
            return Err(Error::domain("density argument must be nonnegative"));
        }
        let p = y.precision();
        let s = HpReal::from_u64(self.scale as u64, p);
        let s2 = &s * &s;
        let rel = pointwise_tolerance(p);
        let (b, cert) = bessel_i1_scaled(&(x * y / &s2), &rel)?;
        let pre = y / &s2 * (-(x + y) / &s).exp();
        let v = &pre * b;
        let err = pre * cert.total_bound() + eval_rounding(&v);
        Ok((v, err))
    }

    fn envelope(&self, y: &HpReal) -> Result<Envelope> {
        check_y(y)?;
        let p = y.precision();
        let s = HpReal::from_u64(self.scale as u64, p);
        // I_1(2h)/h <= e^{2h} and 2√(xy) <= x/2 + 2y.
        Ok(Envelope {
            coeff: y / &(&s * &s) * (y / &s).exp(),
            power: 0,
            rate: s.ldexp(1).recip(),
            from: 0.0,
        })
    }

    fn kernels(&self, prec: usize) -> Vec<KernelBound> {
        let s = HpReal::from_u64(self.scale as u64, prec);
        [0.5, 0.8, 0.9]
            .iter()
            .map(|&d| {
                let delta = hp_f(d, prec);
                let one = HpReal::one(prec);
                KernelBound {
                    coeff: (&s * &s).recip(),
                    degree: 1,
                    growth: (delta.recip() - &one) / &s,
                    decay: (&one - &delta) / &s,
                }
            })
            .collect()
    }
}

/// The `r = 3` member of the `F_r` weight family, written with `0F2` and
/// `1F3`.
#[derive(Debug, Default)]
pub struct ThirdOrderDensity;

impl Density for ThirdOrderDensity {
    fn label(&self) -> String {
        "W3".into()
    }

    fn eval(&self, x: &HpReal, y: &HpReal) -> Result<(HpReal, HpReal)> {
        check_y(y)?;
        if !x.is_positive() {
            return Err(Error::domain("W3 is only evaluated at x > 0"));
        }
        let p = y.precision();
        let q = |n: i64, d: i64| ExactRational::new(n.into(), d.into());
        let rel = pointwise_tolerance(p);
        let z = x * y * y / HpReal::from_u64(8, p);
        let (f02, c1) = hyper_pfq(&[], &[q(3, 2), q(2, 1)], &z, &rel)?;
        let (f13, c2) = hyper_pfq(&[q(1, 1)], &[q(3, 2), q(2, 1), q(5, 2)], &z, &rel)?;
        let sqrt_pi = HpReal::pi(p).sqrt();
        let sqrt2 = HpReal::from_u64(2, p).sqrt();
        let sx = x.sqrt();
        let a = HpReal::from_u64(6, p) * &sqrt2 * &sx;
        let b = HpReal::from_u64(3, p) * x * y * &sqrt_pi * &f02;
        let c = &sqrt2 * x * &sx * y * y * &f13;
        let pre = (-(x.ldexp(-1) + y)).exp() * y / (HpReal::from_u64(12, p) * &sqrt_pi * x);
        let v = &pre * (&a + &b + &c);
        let err = &pre * (b * c1.total_bound() + c * c2.total_bound()) + eval_rounding(&v);
        Ok((v, err))
    }

    fn envelope(&self, y: &HpReal) -> Result<Envelope> {
        check_y(y)?;
        let p = y.precision();
        // As a Gamma(k/2, 2) mixture with Poisson(y) weights, x >= 1 and
        // (x/4)^{k/2} <= e^{x/4} Γ(k/2 + 1) give
        // W3 <= (y/√2) e^{(√2 - 1) y} e^{-x/4}.
        let sqrt2 = HpReal::from_u64(2, p).sqrt();
        Ok(Envelope {
            coeff: y / &sqrt2 * (y * &(&sqrt2 - &HpReal::one(p))).exp(),
            power: 0,
            rate: HpReal::one(p).ldexp(-2),
            from: 1.0,
        })
    }
}

struct BellLaguerreTerms<'a> {
    x: &'a HpReal,
    /// `y / e`.
    w: HpReal,
    rel: HpReal,
}

impl TermSource for BellLaguerreTerms<'_> {
    fn first_index(&self) -> usize {
        1
    }
    fn term(&self, k: usize) -> Result<HpReal> {
        let p = self.w.precision();
        let kk = HpReal::from_u64(k as u64, p);
        let (b, _) = bessel_i1_scaled(&(&kk * self.x), &self.rel)?;
        Ok(pow_u(&self.w, k as u64) * kk * b / HpReal::from_bigint(&factorial(k as u64), p))
    }
    fn work(&self, k: usize) -> usize {
        2 * (usize::BITS - k.max(1).leading_zeros()) as usize + 16
    }
    fn precision(&self) -> usize {
        self.w.precision()
    }
}

/// `W_{B(L)}(x, y) = e^{-(x+y)} x^{-1/2} Σ_{k>=1} (y^k/k!) √k e^{-k} I_1(2√(kx))`.
#[derive(Debug, Default)]
pub struct BellLaguerreDensity;

impl Density for BellLaguerreDensity {
    fn label(&self) -> String {
        "BL".into()
    }

    fn eval(&self, x: &HpReal, y: &HpReal) -> Result<(HpReal, HpReal)> {
        check_y(y)?;
        if x.is_negative() {
            return Err(Error::domain("density argument must be nonnegative"));
        }
        let p = y.precision();
        let one = HpReal::one(p);
        let rel = pointwise_tolerance(p);
        let w = y * &(-&one).exp();
        // Term k is (y/e)^k k I_1(2√(kx))/√(kx) / k! <= e^{x/δ} k (y e^{δ-1})^k / k!
        // and s^k/k! <= e^{sR}/R^k.
        let mut ms = Vec::new();
        for d in [0.25, 0.5, 1.0, 2.0] {
            let delta = hp_f(d, p);
            let sv = y * &(&delta - &one).exp();
            for r in RADII {
                let r = hp_f(r, p);
                let c = (x / &delta + &sv * &r).exp();
                ms.push(Majorant::new(c, 1, r.recip()));
            }
        }
        let src = BellLaguerreTerms { x, w, rel: rel.clone() };
        let (s, e) = sum_relative(&src, &TailRule::Majorants(ms), &rel)?;
        let pre = (-(x + y)).exp();
        let v = &pre * &s;
        // Each inner I_1 factor is within a relative `rel`.
        let err = &pre * (e + &rel * &s) + eval_rounding(&v);
        Ok((v, err))
    }

    fn envelope(&self, y: &HpReal) -> Result<Envelope> {
        check_y(y)?;
        let p = y.precision();
        let one = HpReal::one(p);
        let e = one.exp();
        Ok(Envelope { coeff: y * (&one + y * &e - y).exp(), power: 0, rate: one.ldexp(-1), from: 0.0 })
    }
}

pub(crate) fn best_pgf_radius_majorants(
    degree: u32,
    p: usize,
    bound_at: impl Fn(&HpReal) -> Result<Option<HpReal>>,
) -> Result<Vec<Majorant>> {
    let mut out = Vec::new();
    for r in RADII {
        let r = hp_f(r, p);
        if let Some(c) = bound_at(&r)? {
            if c.is_finite() && c.is_positive() {
                out.push(Majorant::new(c, degree, r.recip()));
            }
        }
    }
    Ok(out)
}

pub(crate) fn smallest(values: Vec<HpReal>) -> Option<HpReal> {
    min_of(values)
}

pub(crate) type CombRef = Arc<dyn CombWeight>;
pub(crate) type DensityRef = Arc<dyn Density>;

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 128;

    fn hp(x: f64) -> HpReal {
        HpReal::from_f64(x, P)
    }

    #[test]
    fn laguerre_density_limit_at_zero() {
        let d = ScaledLaguerreDensity { scale: 1 };
        let (v, _) = d.eval(&hp(0.0), &hp(1.0)).unwrap();
        assert!((v - hp(-1.0).exp()).abs() < hp(1e-35));
        let (v, _) = d.eval(&hp(1e-30), &hp(1.0)).unwrap();
        assert!((v - hp(-1.0).exp()).abs() < hp(1e-28));
    }

    #[test]
    fn scaled_laguerre_is_rescaled_base() {
        let base = ScaledLaguerreDensity { scale: 1 };
        let ll = ScaledLaguerreDensity { scale: 2 };
        for (x, y) in [(0.5, 1.0), (3.0, 2.0), (10.0, 0.5)] {
            let (a, _) = ll.eval(&hp(x), &hp(y)).unwrap();
            let (b, _) = base.eval(&hp(x / 2.0), &hp(y / 2.0)).unwrap();
            assert!((a - b.ldexp(-1)).abs() < hp(1e-30));
        }
    }

    #[test]
    fn envelopes_dominate_densities() {
        let ds: Vec<Box<dyn Density>> = vec![
            Box::new(ScaledLaguerreDensity { scale: 1 }),
            Box::new(ScaledLaguerreDensity { scale: 2 }),
            Box::new(ThirdOrderDensity),
            Box::new(BellLaguerreDensity),
        ];
        for d in &ds {
            for y in [0.5, 1.0, 2.0, 4.0] {
                let env = d.envelope(&hp(y)).unwrap();
                for x in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0, 80.0] {
                    if x < env.from {
                        continue;
                    }
                    let (v, _) = d.eval(&hp(x), &hp(y)).unwrap();
                    let bound = &env.coeff * hp(x).powi(env.power) * (-(&env.rate * hp(x))).exp();
                    assert!(v <= bound, "{} x={x} y={y}", d.label());
                }
            }
        }
    }

    #[test]
    fn kernel_bounds_dominate_laguerre_density() {
        for scale in [1, 2] {
            let d = ScaledLaguerreDensity { scale };
            for k in d.kernels(P) {
                for x in [0.1, 1.0, 7.0, 40.0] {
                    for z in [0.1, 1.0, 5.0, 30.0] {
                        let (v, _) = d.eval(&hp(x), &hp(z)).unwrap();
                        let b = &k.coeff * hp(z).powi(k.degree) * (&k.growth * hp(z) - &k.decay * hp(x)).exp();
                        assert!(v <= b, "scale={scale} x={x} z={z}");
                    }
                }
            }
        }
    }

    #[test]
    fn comb_majorants_dominate_atoms() {
        let combs: Vec<Box<dyn CombWeight>> = vec![Box::new(PoissonComb), Box::new(TouchardComb::new()), Box::new(LaguerreComb)];
        for c in &combs {
            for y in [0.5, 1.0, 3.0] {
                let ms = c.majorants(&hp(y)).unwrap();
                assert!(!ms.is_empty());
                for k in 1..40usize {
                    let a = c.atom(k, &hp(y)).unwrap();
                    assert!(!a.is_negative());
                    for m in &ms {
                        let b = &m.coeff * HpReal::from_u64(k as u64, P).powi(m.degree) * pow_u(&m.ratio, k as u64);
                        assert!(a <= b, "{} k={k} y={y}", c.label());
                    }
                }
            }
        }
    }

    #[test]
    fn third_order_density_is_a_gamma_mixture() {
        // W3 = Σ_{k>=1} e^{-y} y^k/k! · x^{k/2-1} e^{-x/2} / (Γ(k/2) 2^{k/2})
        let y = 1.5f64;
        for x in [0.3f64, 1.0, 4.0, 12.0] {
            let (v, _) = ThirdOrderDensity.eval(&hp(x), &hp(y)).unwrap();
            let mut s = 0.0;
            let mut fact = 1.0;
            for k in 1..80 {
                fact *= k as f64;
                let a = k as f64 / 2.0;
                let gamma = libm_gamma(a);
                s += (-y).exp() * y.powi(k) / fact * x.powf(a - 1.0) * (-x / 2.0).exp() / (gamma * 2f64.powf(a));
            }
            assert!((v.to_f64() - s).abs() < 1e-12 * s, "x={x}");
        }
    }

    /// Γ at half-integers.
    fn libm_gamma(a: f64) -> f64 {
        if a == 0.5 {
            return std::f64::consts::PI.sqrt();
        }
        if a == 1.0 {
            return 1.0;
        }
        (a - 1.0) * libm_gamma(a - 1.0)
    }
}
