//! Weights of composed generators, `W_{F(G)}(x, y) = ∫ W_F(z, y) W_G(x, z) dz`.
//!
//! Four shapes occur, by the type of outer and inner weight:
//!
//! * comb ∘ Poisson comb: a comb with atoms `Σ_k w_k(y) e^{-k} k^p / p!`;
//! * comb ∘ density: a density `Σ_k w_k(y) W_G(x, k)`;
//! * density ∘ Poisson comb: a comb whose atoms are integrals
//!   `∫ W_F(z, y) e^{-z} z^p / p! dz`;
//! * density ∘ density: a density defined by an inner integral for every `x`.
//!
//! Inner combs other than the Poisson comb are not supported.

use crate::error::{Error, Result};
use crate::exact::factorial;
use crate::hp::HpReal;
use crate::sum::{pow_u, Majorant, TailRule, TermSource, TruncationCertificate};

use super::quad::{integrate, upper_gamma_int, Integrand};
use super::WeightFunction;
use super::weights::{
    best_pgf_radius_majorants, check_y, pointwise_tolerance, smallest, sum_relative, CombRef, CombWeight, Density,
    DensityRef, Envelope, KernelBound,
};

struct PoissonMixTerms<'a> {
    outer: &'a dyn CombWeight,
    y: &'a HpReal,
    p: usize,
}

impl TermSource for PoissonMixTerms<'_> {
    fn first_index(&self) -> usize {
        self.outer.first_atom()
    }
    fn term(&self, k: usize) -> Result<HpReal> {
        let prec = self.y.precision();
        let kk = HpReal::from_u64(k as u64, prec);
        let w = self.outer.atom(k, self.y)?;
        Ok(w * (-&kk).exp() * pow_u(&kk, self.p as u64) / HpReal::from_bigint(&factorial(self.p as u64), prec))
    }
    fn work(&self, k: usize) -> usize {
        self.outer.work(k) + 2 * self.p + 16
    }
    fn precision(&self) -> usize {
        self.y.precision()
    }
}

/// `F(B)` for a comb `F`: atoms `Σ_k w_k(y) e^{-k} k^p / p!`.
pub struct PoissonMixtureComb {
    pub outer: CombRef,
}

impl CombWeight for PoissonMixtureComb {
    fn label(&self) -> String {
        format!("{}(W1)", self.outer.label())
    }
    fn first_atom(&self) -> usize {
        0
    }
    fn atom(&self, p: usize, y: &HpReal) -> Result<HpReal> {
        check_y(y)?;
        let prec = y.precision();
        let e = HpReal::one(prec).exp();
        let ms: Vec<Majorant> = self
            .outer
            .majorants(y)?
            .into_iter()
            .map(|m| Majorant {
                coeff: m.coeff / HpReal::from_bigint(&factorial(p as u64), prec),
                degree: m.degree + p as u32,
                ratio: m.ratio / &e,
            })
            .collect();
        let src = PoissonMixTerms { outer: self.outer.as_ref(), y, p };
        let (v, _) = sum_relative(&src, &TailRule::Majorants(ms), &pointwise_tolerance(prec))?;
        Ok(v)
    }
    fn majorants(&self, y: &HpReal) -> Result<Vec<Majorant>> {
        // Σ_p atom_p R^p = Σ_k w_k (e^{R-1})^k, so atom_p <= pgf(e^{R-1}) / R^p.
        best_pgf_radius_majorants(0, y.precision(), |r| self.outer.pgf_bound(y, &(r - &HpReal::one(y.precision())).exp()))
    }
    fn pgf_bound(&self, y: &HpReal, s: &HpReal) -> Result<Option<HpReal>> {
        self.outer.pgf_bound(y, &(s - &HpReal::one(y.precision())).exp())
    }
    fn relative_error(&self, prec: usize) -> HpReal {
        pointwise_tolerance(prec).ldexp(1)
    }
    fn work(&self, k: usize) -> usize {
        2 * k + 64
    }
}

struct MixtureTerms<'a> {
    outer: &'a dyn CombWeight,
    inner: &'a dyn Density,
    x: &'a HpReal,
    y: &'a HpReal,
}

impl TermSource for MixtureTerms<'_> {
    fn first_index(&self) -> usize {
        self.outer.first_atom().max(1)
    }
    fn term(&self, k: usize) -> Result<HpReal> {
        let z = HpReal::from_u64(k as u64, self.y.precision());
        let (v, _) = self.inner.eval(self.x, &z)?;
        Ok(self.outer.atom(k, self.y)? * v)
    }
    fn work(&self, k: usize) -> usize {
        self.outer.work(k) + 96
    }
    fn precision(&self) -> usize {
        self.y.precision()
    }
}

/// `F(G)` for a comb `F` and a density `G`: `Σ_{k>=1} w_k(y) W_G(x, k)`.
///
/// A `k = 0` atom of `F` is dropped: the inner densities supported here
/// vanish identically at parameter 0.
pub struct MixtureDensity {
    pub outer: CombRef,
    pub inner: DensityRef,
}

impl MixtureDensity {
    fn term_majorants(&self, x: &HpReal, y: &HpReal) -> Result<Vec<Majorant>> {
        let p = y.precision();
        let outer = self.outer.majorants(y)?;
        let mut out = Vec::new();
        for k in self.inner.kernels(p) {
            let lead = &k.coeff * (-(&k.decay * x)).exp();
            let kern = Majorant::new(lead, k.degree, k.growth.exp());
            out.extend(outer.iter().map(|m| m.times(&kern)));
        }
        Ok(out)
    }
}

impl Density for MixtureDensity {
    fn label(&self) -> String {
        format!("{}({})", self.outer.label(), self.inner.label())
    }

    fn eval(&self, x: &HpReal, y: &HpReal) -> Result<(HpReal, HpReal)> {
        check_y(y)?;
        let p = y.precision();
        let rel = pointwise_tolerance(p);
        let rule = TailRule::Majorants(self.term_majorants(x, y)?);
        let src = MixtureTerms { outer: self.outer.as_ref(), inner: self.inner.as_ref(), x, y };
        let (v, e) = sum_relative(&src, &rule, &rel)?;
        Ok((v.clone(), e + &rel * &v))
    }

    fn envelope(&self, y: &HpReal) -> Result<Envelope> {
        check_y(y)?;
        let p = y.precision();
        // W <= A e^{-hx} Σ_k w_k k^b e^{gk}; pick the kernel with the
        // smallest bound at x = 40.
        let forty = HpReal::from_u64(40, p);
        let mut best: Option<(HpReal, Envelope)> = None;
        for k in self.inner.kernels(p) {
            let totals: Vec<HpReal> = self
                .outer
                .majorants(y)?
                .iter()
                .filter_map(|m| Majorant::new(m.coeff.clone(), m.degree + k.degree, &m.ratio * &k.growth.exp()).total())
                .collect();
            let Some(total) = smallest(totals) else { continue };
            let env = Envelope { coeff: &k.coeff * &total, power: 0, rate: k.decay.clone(), from: 0.0 };
            let score = &env.coeff * (-(&env.rate * &forty)).exp();
            if best.as_ref().is_none_or(|(s, _)| score < *s) {
                best = Some((score, env));
            }
        }
        best.map(|(_, e)| e)
            .ok_or_else(|| Error::unsupported(format!("no envelope for {}", self.label())))
    }
}

/// `F(B)` for a density `F`: atoms `∫ W_F(z, y) e^{-z} z^p / p! dz`.
pub struct QuadratureComb {
    pub outer: DensityRef,
}

impl QuadratureComb {
    fn envelope_from_zero(&self, y: &HpReal) -> Result<Envelope> {
        let env = self.outer.envelope(y)?;
        if env.from > 0.0 {
            return Err(Error::unsupported(format!("{} has no envelope down to 0", self.outer.label())));
        }
        Ok(env)
    }
}

impl CombWeight for QuadratureComb {
    fn label(&self) -> String {
        format!("{}(W1)", self.outer.label())
    }
    fn first_atom(&self) -> usize {
        0
    }
    fn atom(&self, k: usize, y: &HpReal) -> Result<HpReal> {
        check_y(y)?;
        let p = y.precision();
        let env = self.outer.envelope(y)?;
        let fact = HpReal::from_bigint(&factorial(k as u64), p);
        let one = HpReal::one(p);
        let rate = &env.rate + &one;
        let m = env.power + k as u32;
        let eval = |z: &HpReal| {
            let (v, e) = self.outer.eval(z, y)?;
            let kern = (-z).exp() * pow_u(z, k as u64) / &fact;
            Ok(vec![(&v * &kern, e * kern)])
        };
        let tail = |_: usize, z: &HpReal| Ok(&env.coeff * upper_gamma_int(m, &(&rate * z)) / rate.powi(m + 1) / &fact);
        let f = Integrand { eval: &eval, count: 1, tail: &tail, start: env.from };
        // Absolute target relative to the envelope's bound on the atom.
        let scale = &env.coeff * upper_gamma_int(m, &HpReal::zero(p)) / rate.powi(m + 1) / &fact;
        let eps = scale * one.ldexp(-(p as i32) / 4);
        let out = integrate(&f, &[eps])?;
        Ok(out[0].0.clone())
    }
    fn majorants(&self, y: &HpReal) -> Result<Vec<Majorant>> {
        // Σ_p atom_p R^p = ∫ W_F(z, y) e^{(R-1)z} dz <= C Γ(a+1) / (β + 1 - R)^{a+1}.
        let p = y.precision();
        let env = self.envelope_from_zero(y)?;
        let one = HpReal::one(p);
        let fact = HpReal::from_bigint(&factorial(env.power as u64), p);
        let mut out = Vec::new();
        for f in [0.25, 0.5, 0.75, 0.9] {
            let r = &one + &env.rate * &HpReal::from_f64(f, p);
            let gap = &env.rate + &one - &r;
            let c = &env.coeff * &fact / gap.powi(env.power + 1);
            out.push(Majorant::new(c, 0, r.recip()));
        }
        Ok(out)
    }
    fn relative_error(&self, prec: usize) -> HpReal {
        HpReal::one(prec).ldexp(-(prec as i32) / 4 + 4)
    }
    fn work(&self, _k: usize) -> usize {
        64
    }
}

/// `F(G)` for two densities, evaluated pointwise by an inner integral over
/// the parameter `z`.
pub struct IntegralDensity {
    pub outer: DensityRef,
    pub inner: DensityRef,
}

impl IntegralDensity {
    /// An inner kernel bound whose growth is below the outer decay, with the
    /// largest decay in `x`.
    fn kernel(&self, outer: &Envelope, p: usize) -> Result<KernelBound> {
        let half = outer.rate.ldexp(-1);
        self.inner
            .kernels(p)
            .into_iter()
            .filter(|k| k.growth <= half)
            .reduce(|a, b| if b.decay > a.decay { b } else { a })
            .ok_or_else(|| Error::unsupported(format!("no kernel bound for {}", self.label())))
    }

    fn outer_envelope(&self, y: &HpReal) -> Result<Envelope> {
        let env = self.outer.envelope(y)?;
        if env.from > 0.0 {
            return Err(Error::unsupported(format!("{} has no envelope down to 0", self.outer.label())));
        }
        Ok(env)
    }
}

impl Density for IntegralDensity {
    fn label(&self) -> String {
        format!("{}({})", self.outer.label(), self.inner.label())
    }

    fn eval(&self, x: &HpReal, y: &HpReal) -> Result<(HpReal, HpReal)> {
        check_y(y)?;
        let p = y.precision();
        let env = self.outer_envelope(y)?;
        let k = self.kernel(&env, p)?;
        let gap = &env.rate - &k.growth;
        let m = env.power + k.degree;
        let lead = &env.coeff * &k.coeff * (-(&k.decay * x)).exp();
        let eval = |z: &HpReal| {
            let (a, ea) = self.outer.eval(z, y)?;
            let (b, eb) = self.inner.eval(x, z)?;
            let err = &ea * &b + &a * &eb + &ea * &eb;
            Ok(vec![(a * b, err)])
        };
        let tail = |_: usize, z: &HpReal| Ok(&lead * upper_gamma_int(m, &(&gap * z)) / gap.powi(m + 1));
        let f = Integrand { eval: &eval, count: 1, tail: &tail, start: 0.0 };
        let scale = &lead * upper_gamma_int(m, &HpReal::zero(p)) / gap.powi(m + 1);
        let eps = scale * HpReal::one(p).ldexp(-(p as i32) / 4);
        let out = integrate(&f, &[eps])?;
        let (v, cert) = out.into_iter().next().expect("one integrand");
        Ok((v, cert.total_bound()))
    }

    fn envelope(&self, y: &HpReal) -> Result<Envelope> {
        check_y(y)?;
        let p = y.precision();
        let env = self.outer_envelope(y)?;
        let k = self.kernel(&env, p)?;
        let gap = &env.rate - &k.growth;
        let m = env.power + k.degree;
        let coeff = &env.coeff * &k.coeff * upper_gamma_int(m, &HpReal::zero(p)) / gap.powi(m + 1);
        Ok(Envelope { coeff, power: 0, rate: k.decay, from: 0.0 })
    }

    /// `∫ x^n W_{F(G)}(x, y) dx = ∫ W_F(z, y) m_G(n, z) dz`, where the inner
    /// moments `m_G(·, z)` come from one quadrature per outer node. This
    /// needs far fewer evaluations than integrating the pointwise density.
    fn moments(&self, y: &HpReal, eps: &[HpReal]) -> Option<Result<Vec<(HpReal, TruncationCertificate)>>> {
        Some(self.moments_by_parameter(y, eps))
    }
}

impl IntegralDensity {
    fn moments_by_parameter(&self, y: &HpReal, eps: &[HpReal]) -> Result<Vec<(HpReal, TruncationCertificate)>> {
        check_y(y)?;
        let p = y.precision();
        let env = self.outer_envelope(y)?;
        let k = self.kernel(&env, p)?;
        let gap = &env.rate - &k.growth;
        let m = env.power + k.degree;
        // m_G(j, z) <= A z^b e^{gz} j! / h^{j+1}
        let moment_bound = |j: usize| {
            let fact = HpReal::from_bigint(&factorial(j as u64), p);
            &k.coeff * fact / k.decay.powi(j as u32 + 1)
        };
        let mass = env.total(0);
        let inner_eps: Vec<HpReal> = eps.iter().map(|e| e / &mass.ldexp(2)).collect();
        let inner = WeightFunction::Continuous(self.inner.clone());
        let eval = |z: &HpReal| {
            let (a, ea) = self.outer.eval(z, y)?;
            let ms = super::moments(&inner, z, &inner_eps)?;
            Ok(ms
                .into_iter()
                .map(|(mv, cert)| {
                    let err = &ea * &mv + &a * cert.total_bound();
                    (&a * &mv, err)
                })
                .collect())
        };
        let tail = |j: usize, z: &HpReal| {
            Ok(&env.coeff * moment_bound(j) * upper_gamma_int(m, &(&gap * z)) / gap.powi(m + 1))
        };
        let f = Integrand { eval: &eval, count: eps.len(), tail: &tail, start: 0.0 };
        let halves: Vec<HpReal> = eps.iter().map(|e| e.ldexp(-1)).collect();
        let mut out = integrate(&f, &halves)?;
        for (_, cert) in &mut out {
            cert.target_epsilon = cert.target_epsilon.ldexp(1);
        }
        Ok(out)
    }
}
