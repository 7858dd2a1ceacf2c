//! Weight functions `W(x, y)` whose moments `∫ x^n W(x, y) dx` reproduce
//! Bell-type polynomials, and the machinery to check that numerically.
//!
//! A weight is either a Dirac comb `Σ_k w_k(y) δ(x - k)` or a density on
//! `x > 0`. Comb moments are certified sums. Density moments use quadrature
//! with a tail bound from an exponential envelope; the discretization error
//! there is an estimate from panel doubling.
//!
//! Some weights carry less than unit mass: the zeroth moment of the Laguerre
//! weight is `1 - e^{-y}`, not the `B(0, y) = 1` of the polynomial family.
//! [`reference_moment`] returns that mass for `n = 0` and the exact
//! polynomial value for `n >= 1`.

pub mod compose;
pub mod quad;
pub mod weights;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::exact::{bell_poly, ExactRational};
use crate::hp::HpReal;
use crate::series::{bessel_related_generator, ps_exp};
use crate::spec::GeneratorSpec;
use crate::sum::{pow_u, sum_certified, TailRule, TermSource, TruncationCertificate, DEFAULT_MAX_TERMS};

use compose::{IntegralDensity, MixtureDensity, PoissonMixtureComb, QuadratureComb};
use quad::{integrate, Integrand};
pub use weights::{
    BellLaguerreDensity, CombWeight, Density, Envelope, KernelBound, LaguerreComb, PoissonComb,
    ScaledLaguerreDensity, ThirdOrderDensity, TouchardComb,
};

/// A weight function, parametrized by `y > 0` at evaluation time.
#[derive(Clone)]
pub enum WeightFunction {
    DiracComb(Arc<dyn CombWeight>),
    Continuous(Arc<dyn Density>),
}

impl WeightFunction {
    pub fn label(&self) -> String {
        match self {
            WeightFunction::DiracComb(c) => c.label(),
            WeightFunction::Continuous(d) => d.label(),
        }
    }

    pub fn is_comb(&self) -> bool {
        matches!(self, WeightFunction::DiracComb(_))
    }
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.is_comb() { "DiracComb" } else { "Continuous" };
        write!(f, "{kind}({})", self.label())
    }
}

/// The named weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightSpec {
    /// Poisson comb, Bell polynomials.
    W1,
    /// Laguerre density, Lah polynomials.
    W2,
    /// Density for the `F_3` family.
    W3,
    /// Comb for `B(B)`.
    BB,
    /// Density for `L(L)`.
    LL,
    /// Density for `B(L)`.
    BL,
    /// Comb for `L(B)`.
    LB,
}

impl WeightSpec {
    pub const ALL: [WeightSpec; 7] =
        [WeightSpec::W1, WeightSpec::W2, WeightSpec::W3, WeightSpec::BB, WeightSpec::LL, WeightSpec::BL, WeightSpec::LB];

    /// The generator whose Bell-type polynomials are the moments.
    pub fn generator(self) -> GeneratorSpec {
        use GeneratorSpec::{BellR, Composite};
        let b = GeneratorSpec::bell;
        let l = GeneratorSpec::lah;
        match self {
            WeightSpec::W1 => b(),
            WeightSpec::W2 => l(),
            WeightSpec::W3 => BellR(3),
            WeightSpec::BB => Composite(Box::new(b()), Box::new(b())),
            WeightSpec::LL => Composite(Box::new(l()), Box::new(l())),
            WeightSpec::BL => Composite(Box::new(b()), Box::new(l())),
            WeightSpec::LB => Composite(Box::new(l()), Box::new(b())),
        }
    }

    pub fn is_comb(self) -> bool {
        matches!(self, WeightSpec::W1 | WeightSpec::BB | WeightSpec::LB)
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WeightSpec::W1 => "W1",
            WeightSpec::W2 => "W2",
            WeightSpec::W3 => "W3",
            WeightSpec::BB => "BB",
            WeightSpec::LL => "LL",
            WeightSpec::BL => "BL",
            WeightSpec::LB => "LB",
        };
        f.write_str(s)
    }
}

impl FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        let w = match t.as_str() {
            "W1" | "B" => WeightSpec::W1,
            "W2" | "L" => WeightSpec::W2,
            "W3" | "R3" => WeightSpec::W3,
            "BB" | "B(B)" => WeightSpec::BB,
            "LL" | "L(L)" => WeightSpec::LL,
            "BL" | "B(L)" => WeightSpec::BL,
            "LB" | "L(B)" => WeightSpec::LB,
            _ => return Err(Error::Parse(format!("unknown weight {s:?}"))),
        };
        Ok(w)
    }
}

/// The weight object for a named spec.
pub fn weight(spec: WeightSpec) -> WeightFunction {
    match spec {
        WeightSpec::W1 => WeightFunction::DiracComb(Arc::new(PoissonComb)),
        WeightSpec::W2 => WeightFunction::Continuous(Arc::new(ScaledLaguerreDensity { scale: 1 })),
        WeightSpec::W3 => WeightFunction::Continuous(Arc::new(ThirdOrderDensity)),
        WeightSpec::BB => WeightFunction::DiracComb(Arc::new(TouchardComb::new())),
        WeightSpec::LL => WeightFunction::Continuous(Arc::new(ScaledLaguerreDensity { scale: 2 })),
        WeightSpec::BL => WeightFunction::Continuous(Arc::new(BellLaguerreDensity)),
        WeightSpec::LB => WeightFunction::DiracComb(Arc::new(LaguerreComb)),
    }
}

/// Weight of `F(G)` from the weights of `F` (outer) and `G` (inner).
pub fn compose_weights(outer: &WeightFunction, inner: &WeightFunction) -> Result<WeightFunction> {
    use WeightFunction::{Continuous, DiracComb};
    match (outer, inner) {
        (_, DiracComb(c)) if !c.is_poisson() => {
            Err(Error::unsupported(format!("inner comb {} is not the Poisson comb", c.label())))
        }
        (DiracComb(f), DiracComb(_)) => Ok(DiracComb(Arc::new(PoissonMixtureComb { outer: f.clone() }))),
        (Continuous(f), DiracComb(_)) => Ok(DiracComb(Arc::new(QuadratureComb { outer: f.clone() }))),
        (DiracComb(f), Continuous(g)) => {
            if g.kernels(64).is_empty() {
                return Err(Error::unsupported(format!("{} has no bound in its parameter", g.label())));
            }
            Ok(Continuous(Arc::new(MixtureDensity { outer: f.clone(), inner: g.clone() })))
        }
        (Continuous(f), Continuous(g)) => {
            if g.kernels(64).is_empty() {
                return Err(Error::unsupported(format!("{} has no bound in its parameter", g.label())));
            }
            Ok(Continuous(Arc::new(IntegralDensity { outer: f.clone(), inner: g.clone() })))
        }
    }
}

struct CombMoment<'a> {
    comb: &'a dyn CombWeight,
    n: usize,
    y: &'a HpReal,
}

impl TermSource for CombMoment<'_> {
    fn first_index(&self) -> usize {
        self.comb.first_atom()
    }
    fn term(&self, k: usize) -> Result<HpReal> {
        let p = self.y.precision();
        let w = self.comb.atom(k, self.y)?;
        Ok(pow_u(&HpReal::from_u64(k as u64, p), self.n as u64) * w)
    }
    fn work(&self, k: usize) -> usize {
        self.comb.work(k) + 2 * (usize::BITS - self.n.max(1).leading_zeros()) as usize + 2
    }
    fn precision(&self) -> usize {
        self.y.precision()
    }
}

fn check_tolerances(y: &HpReal, eps: &[HpReal]) -> Result<()> {
    weights::check_y(y)?;
    if eps.iter().any(|e| !e.is_positive() || !e.is_finite()) {
        return Err(Error::domain("eps must be positive"));
    }
    Ok(())
}

/// Moments `n = 0..eps.len()` of `w` at `y`, each to the absolute tolerance
/// `eps[n]`. The working precision is that of `y`.
pub fn moments(w: &WeightFunction, y: &HpReal, eps: &[HpReal]) -> Result<Vec<(HpReal, TruncationCertificate)>> {
    check_tolerances(y, eps)?;
    match w {
        WeightFunction::DiracComb(c) => {
            eps.iter().enumerate().map(|(n, e)| comb_moment(c.as_ref(), n, y, e)).collect()
        }
        WeightFunction::Continuous(d) => {
            if let Some(direct) = d.moments(y, eps) {
                return direct;
            }
            density_moments(d.as_ref(), y, eps)
        }
    }
}

pub(crate) fn density_moments(
    d: &dyn Density,
    y: &HpReal,
    eps: &[HpReal],
) -> Result<Vec<(HpReal, TruncationCertificate)>> {
    let env = d.envelope(y)?;
    let eval = |x: &HpReal| {
        let (v, e) = d.eval(x, y)?;
        let mut out = Vec::with_capacity(eps.len());
        let mut power = HpReal::one(y.precision());
        for _ in 0..eps.len() {
            out.push((&v * &power, &e * &power));
            power = power * x;
        }
        Ok(out)
    };
    let tail = |j: usize, x: &HpReal| Ok(env.tail(j, x));
    let f = Integrand { eval: &eval, count: eps.len(), tail: &tail, start: env.from };
    integrate(&f, eps)
}

/// The `n`-th moment of `w` at `y` to absolute tolerance `eps`.
pub fn moment(w: &WeightFunction, n: usize, y: &HpReal, eps: &HpReal) -> Result<(HpReal, TruncationCertificate)> {
    check_tolerances(y, std::slice::from_ref(eps))?;
    match w {
        WeightFunction::DiracComb(c) => comb_moment(c.as_ref(), n, y, eps),
        WeightFunction::Continuous(_) => {
            // Lower moments share the evaluations; a loose target keeps them
            // from forcing a finer rule.
            let mut eps_all = vec![eps * HpReal::from_u64(1 << 20, eps.precision()); n];
            eps_all.push(eps.clone());
            let mut all = moments(w, y, &eps_all)?;
            Ok(all.pop().expect("at least one moment"))
        }
    }
}

fn comb_moment(c: &dyn CombWeight, n: usize, y: &HpReal, eps: &HpReal) -> Result<(HpReal, TruncationCertificate)> {
    let rule = TailRule::Majorants(c.majorants(y)?.iter().map(|m| m.with_extra_degree(n as u32)).collect());
    let src = CombMoment { comb: c, n, y };
    let (v, mut cert) = sum_certified(&src, &rule, eps, DEFAULT_MAX_TERMS)?;
    cert.rounding_bound = &cert.rounding_bound + c.relative_error(y.precision()) * v.abs();
    Ok((v, cert))
}

/// First point of `xs` (or first atom below `xs.len()` for a comb) where the
/// weight is negative, if any.
pub fn positivity_violation(w: &WeightFunction, y: &HpReal, xs: &[HpReal]) -> Result<Option<HpReal>> {
    weights::check_y(y)?;
    match w {
        WeightFunction::DiracComb(c) => {
            for k in c.first_atom()..c.first_atom() + xs.len() {
                if c.atom(k, y)?.is_negative() {
                    return Ok(Some(HpReal::from_u64(k as u64, y.precision())));
                }
            }
            Ok(None)
        }
        WeightFunction::Continuous(d) => {
            for x in xs {
                let (v, e) = d.eval(x, y)?;
                if (&v + &e).is_negative() {
                    return Ok(Some(x.clone()));
                }
            }
            Ok(None)
        }
    }
}

/// Expected value of the `n`-th moment.
#[derive(Clone, Debug)]
pub enum Reference {
    /// The Bell-type polynomial value, exact.
    Exact(ExactRational),
    /// The mass of a weight without unit total mass.
    Mass(HpReal),
}

impl Reference {
    pub fn to_hp(&self, prec: usize) -> HpReal {
        match self {
            Reference::Exact(q) => HpReal::from_rational(q, prec),
            Reference::Mass(v) => v * &HpReal::one(prec),
        }
    }
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reference::Exact(q) => write!(f, "{q}"),
            Reference::Mass(v) => write!(f, "{}", v.to_sci(20)),
        }
    }
}

/// Total mass of the named weight at `y`.
pub fn zeroth_moment(spec: WeightSpec, y: &HpReal) -> HpReal {
    let p = y.precision();
    let one = HpReal::one(p);
    match spec {
        WeightSpec::W1 | WeightSpec::BB => one,
        WeightSpec::W2 | WeightSpec::W3 => &one - (-y).exp(),
        WeightSpec::LL | WeightSpec::LB => &one - (-y.ldexp(-1)).exp(),
        WeightSpec::BL => &one - (y * &(-&one).exp() - y).exp(),
    }
}

pub fn reference_moment(spec: WeightSpec, n: usize, y: &ExactRational, prec: usize) -> Result<Reference> {
    if n == 0 {
        return Ok(Reference::Mass(zeroth_moment(spec, &HpReal::from_rational(y, prec))));
    }
    Ok(Reference::Exact(bell_poly(&spec.generator(), n, y)?))
}

#[derive(Clone, Debug)]
pub struct MomentCheck {
    pub n: usize,
    pub reference: Reference,
    pub computed: HpReal,
    pub certificate: TruncationCertificate,
    pub relative_error: HpReal,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct MomentReport {
    pub spec: WeightSpec,
    pub y: ExactRational,
    pub tolerance: HpReal,
    pub checks: Vec<MomentCheck>,
}

impl MomentReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn worst_relative_error(&self) -> HpReal {
        let p = self.tolerance.precision();
        self.checks.iter().fold(HpReal::zero(p), |acc, c| acc.max(c.relative_error.clone()))
    }
}

impl fmt::Display for MomentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "weight {} at y = {} (relative tolerance {})", self.spec, self.y, self.tolerance.to_sci(2))?;
        for c in &self.checks {
            writeln!(
                f,
                "  n={:<3} reference={} computed={} rel.err={} {}",
                c.n,
                c.reference.to_hp(64).to_sci(15),
                c.computed.to_sci(15),
                c.relative_error.to_sci(2),
                if c.passed { "ok" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

/// Compares moments `0..=n_max` of the named weight at `y` against the
/// reference values, to relative tolerance `eps`. The working precision is
/// that of `eps`.
pub fn verify_moment_problem(spec: WeightSpec, n_max: usize, y: &ExactRational, eps: &HpReal) -> Result<MomentReport> {
    if !y.is_positive() {
        return Err(Error::domain("weight parameter y must be positive"));
    }
    if !eps.is_positive() || !eps.is_finite() {
        return Err(Error::domain("eps must be positive"));
    }
    let p = eps.precision();
    let yh = HpReal::from_rational(y, p);
    let refs = (0..=n_max).map(|n| reference_moment(spec, n, y, p)).collect::<Result<Vec<_>>>()?;
    let targets: Vec<HpReal> = refs.iter().map(|r| eps * r.to_hp(p).abs().ldexp(-2)).collect();
    let computed = moments(&weight(spec), &yh, &targets)?;
    let checks = refs
        .into_iter()
        .zip(computed)
        .enumerate()
        .map(|(n, (reference, (value, certificate)))| {
            let r = reference.to_hp(p);
            let relative_error = (&value - &r).abs() / r.abs();
            MomentCheck { n, passed: relative_error <= *eps, reference, computed: value, certificate, relative_error }
        })
        .collect();
    Ok(MomentReport { spec, y: y.clone(), tolerance: eps.clone(), checks })
}

/// A Sheffer-type sequence that is not a moment sequence: `exp(y g(x))`
/// with `g(x) = √(1 + 2x) - 1`, evaluated at `y = 1`.
#[derive(Clone, Debug)]
pub struct NegativeControl {
    /// Egf coefficients `g_0, g_1, ...` of the generator.
    pub generator: Vec<BigInt>,
    /// `p_n(1)` for `n = 0..=n_max`.
    pub values: Vec<BigInt>,
    /// First `n` with `p_n(1) < 0`. A moment sequence of a nonnegative
    /// weight on `[0, ∞)` has no negative entries, so any hit rules out
    /// a positive weight.
    pub first_negative: Option<usize>,
}

pub fn sheffer_negative_control(n_max: usize) -> Result<NegativeControl> {
    let g = bessel_related_generator(n_max);
    let p = ps_exp(&g)?;
    let generator = g.integer_coeffs()?;
    let values = p.integer_coeffs()?;
    let first_negative = values.iter().position(|v| v.is_negative());
    Ok(NegativeControl { generator, values, first_negative })
}
