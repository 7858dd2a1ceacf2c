//! Binary floating point at a configurable working precision.
//!
//! `HpReal` wraps an `astro_float::BigFloat` together with the precision (in
//! bits) that every operation on it is rounded to. Binary operations round to
//! nearest-even at the larger of the two operand precisions.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Default working precision in bits.
pub const DEFAULT_PRECISION: usize = 256;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone)]
pub struct HpReal {
    v: BigFloat,
    prec: usize,
}

impl HpReal {
    fn wrap(v: BigFloat, prec: usize) -> Self {
        HpReal { v, prec }
    }

    pub fn zero(prec: usize) -> Self {
        Self::wrap(BigFloat::from_u64(0, prec), prec)
    }

    pub fn one(prec: usize) -> Self {
        Self::from_u64(1, prec)
    }

    pub fn from_u64(n: u64, prec: usize) -> Self {
        // from_u64 is exact for any precision >= 64; round once afterwards.
        let mut v = BigFloat::from_u64(n, prec.max(64));
        v.set_precision(prec, RM).expect("valid precision");
        Self::wrap(v, prec)
    }

    pub fn from_i64(n: i64, prec: usize) -> Self {
        let r = Self::from_u64(n.unsigned_abs(), prec);
        if n < 0 {
            -r
        } else {
            r
        }
    }

    pub fn from_f64(x: f64, prec: usize) -> Self {
        let mut v = BigFloat::from_f64(x, prec.max(64));
        v.set_precision(prec, RM).expect("valid precision");
        Self::wrap(v, prec)
    }

    pub fn from_biguint(n: &BigUint, prec: usize) -> Self {
        if n.is_zero() {
            return Self::zero(prec);
        }
        let words = n.to_u64_digits();
        let e = (64 * words.len()) as i32;
        let mut v = BigFloat::from_words(&words, Sign::Pos, e);
        v.set_precision(prec, RM).expect("valid precision");
        Self::wrap(v, prec)
    }

    /// Rounds an exact integer to the working precision (one rounding).
    pub fn from_bigint(n: &BigInt, prec: usize) -> Self {
        let r = Self::from_biguint(n.magnitude(), prec);
        if n.sign() == BigSign::Minus {
            -r
        } else {
            r
        }
    }

    /// Numerator and denominator are converted and divided at working
    /// precision, so the result carries at most three roundings.
    pub fn from_rational(q: &BigRational, prec: usize) -> Self {
        let num = Self::from_bigint(q.numer(), prec);
        if q.denom() == &BigInt::from(1) {
            return num;
        }
        num / Self::from_bigint(q.denom(), prec)
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    /// Unit roundoff of this value's precision, `2^(1-p)`.
    pub fn unit_roundoff(&self) -> HpReal {
        HpReal::one(self.prec).ldexp(1 - self.prec as i32)
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.v.is_negative() && !self.v.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.v.is_positive() && !self.v.is_zero()
    }

    /// True unless the value is NaN or infinite.
    pub fn is_finite(&self) -> bool {
        !self.v.is_nan() && !self.v.is_inf()
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.v.abs(), self.prec)
    }

    pub fn exp(&self) -> Self {
        let v = with_consts(|cc| self.v.exp(self.prec, RM, cc));
        Self::wrap(v, self.prec)
    }

    /// The constant π.
    pub fn pi(prec: usize) -> Self {
        let v = with_consts(|cc| cc.pi(prec, RM));
        Self::wrap(v, prec)
    }

    /// Natural logarithm; NaN for nonpositive input.
    pub fn ln(&self) -> Self {
        let v = with_consts(|cc| self.v.ln(self.prec, RM, cc));
        Self::wrap(v, self.prec)
    }

    /// Square root; NaN for negative input.
    pub fn sqrt(&self) -> Self {
        Self::wrap(self.v.sqrt(self.prec, RM), self.prec)
    }

    pub fn powi(&self, n: u32) -> Self {
        if n == 0 {
            return Self::one(self.prec);
        }
        Self::wrap(self.v.powi(n as usize, self.prec, RM), self.prec)
    }

    pub fn recip(&self) -> Self {
        Self::one(self.prec) / self
    }

    /// Multiplies by `2^k` exactly.
    pub fn ldexp(&self, k: i32) -> Self {
        if self.v.is_zero() || !self.is_finite() {
            return self.clone();
        }
        let mut v = self.v.clone();
        let e = v.exponent().expect("finite value");
        v.set_exponent(e + k);
        Self::wrap(v, self.prec)
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Nearest double; saturates to infinity outside the f64 range.
    pub fn to_f64(&self) -> f64 {
        if self.v.is_nan() {
            return f64::NAN;
        }
        if self.v.is_inf() {
            return if self.v.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
        }
        if self.v.is_zero() {
            return 0.0;
        }
        let (words, _, sign, e, _) = self.v.as_raw_parts().expect("finite value");
        let top = *words.last().expect("nonempty mantissa") as f64;
        let mag = top * 2f64.powi(e - 64);
        if sign == Sign::Neg {
            -mag
        } else {
            mag
        }
    }

    /// Splits a finite value into `(m, s)` with `self = m * 2^s` exactly.
    fn to_scaled_int(&self) -> (BigInt, i64) {
        if self.v.is_zero() {
            return (BigInt::zero(), 0);
        }
        let (words, _, sign, e, _) = self.v.as_raw_parts().expect("finite value");
        let mag = BigUint::from_slice(
            &words
                .iter()
                .flat_map(|w| [*w as u32, (*w >> 32) as u32])
                .collect::<Vec<_>>(),
        );
        let m = BigInt::from_biguint(if sign == Sign::Neg { BigSign::Minus } else { BigSign::Plus }, mag);
        (m, e as i64 - 64 * words.len() as i64)
    }

    /// Exact conversion of the binary value to a rational.
    pub fn to_rational(&self) -> BigRational {
        let (m, s) = self.to_scaled_int();
        if s >= 0 {
            BigRational::from_integer(m << (s as usize))
        } else {
            BigRational::new(m, BigInt::from(1) << ((-s) as usize))
        }
    }

    /// Nearest integer, ties away from zero.
    pub fn round_to_bigint(&self) -> BigInt {
        let q = self.to_rational();
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        if q.is_negative() {
            -(-q + half).floor().to_integer()
        } else {
            (q + half).floor().to_integer()
        }
    }

    /// Decimal rendering with `decimals` digits after the point, rounded to nearest.
    pub fn to_fixed(&self, decimals: usize) -> String {
        if !self.is_finite() {
            return format!("{}", self.to_f64());
        }
        let scale = BigInt::from(10).pow(decimals as u32);
        let q = self.to_rational() * BigRational::from_integer(scale.clone());
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let neg = q.is_negative();
        let r = (q.abs() + half).floor().to_integer();
        let digits = r.to_string();
        let body = if decimals == 0 {
            digits
        } else {
            let padded = format!("{:0>width$}", digits, width = decimals + 1);
            let (int, frac) = padded.split_at(padded.len() - decimals);
            format!("{int}.{frac}")
        };
        if neg && !r.is_zero() {
            format!("-{body}")
        } else {
            body
        }
    }

    /// Scientific notation with `sig` significant digits.
    pub fn to_sci(&self, sig: usize) -> String {
        if self.is_zero() {
            return "0".into();
        }
        if !self.is_finite() {
            return format!("{}", self.to_f64());
        }
        let approx_e10 = (self.abs().ln().to_f64() / std::f64::consts::LN_10).floor() as i64;
        let shift = sig as i64 - 1 - approx_e10;
        let ten = BigRational::from_integer(BigInt::from(10));
        let scaled = self.to_rational() * pow_rat(&ten, shift);
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let neg = scaled.is_negative();
        let mut r = (scaled.abs() + half).floor().to_integer().to_string();
        let mut e10 = approx_e10;
        if r.len() > sig {
            r.truncate(sig);
            e10 += 1;
        }
        let (lead, rest) = r.split_at(1);
        let sign = if neg { "-" } else { "" };
        if rest.is_empty() {
            format!("{sign}{lead}e{e10}")
        } else {
            format!("{sign}{lead}.{rest}e{e10}")
        }
    }
}

fn pow_rat(base: &BigRational, e: i64) -> BigRational {
    let p = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

impl fmt::Display for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(d) => f.write_str(&self.to_fixed(d)),
            None => f.write_str(&self.to_sci(20)),
        }
    }
}

impl fmt::Debug for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HpReal({}, {} bits)", self.to_sci(30), self.prec)
    }
}

impl PartialEq for HpReal {
    fn eq(&self, other: &Self) -> bool {
        self.v.cmp(&other.v) == Some(0)
    }
}

impl PartialOrd for HpReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.v.cmp(&other.v).map(|c| c.cmp(&0))
    }
}

impl Neg for HpReal {
    type Output = HpReal;
    fn neg(self) -> HpReal {
        HpReal::wrap(self.v.neg(), self.prec)
    }
}

impl Neg for &HpReal {
    type Output = HpReal;
    fn neg(self) -> HpReal {
        HpReal::wrap(self.v.clone().neg(), self.prec)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $inner:ident) => {
        impl $trait<&HpReal> for &HpReal {
            type Output = HpReal;
            fn $method(self, rhs: &HpReal) -> HpReal {
                let p = self.prec.max(rhs.prec);
                HpReal::wrap(self.v.$inner(&rhs.v, p, RM), p)
            }
        }
        impl $trait<HpReal> for HpReal {
            type Output = HpReal;
            fn $method(self, rhs: HpReal) -> HpReal {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&HpReal> for HpReal {
            type Output = HpReal;
            fn $method(self, rhs: &HpReal) -> HpReal {
                (&self).$method(rhs)
            }
        }
        impl $trait<HpReal> for &HpReal {
            type Output = HpReal;
            fn $method(self, rhs: HpReal) -> HpReal {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_one_matches_known_digits() {
        let e = HpReal::one(256).exp();
        assert_eq!(e.to_fixed(40), "2.7182818284590452353602874713526624977572");
    }

    #[test]
    fn pi_matches_known_digits() {
        assert_eq!(HpReal::pi(256).to_fixed(30), "3.141592653589793238462643383280");
    }

    #[test]
    fn bigint_round_trip() {
        let n: BigInt = "-123456789012345678901234567890123456789".parse().unwrap();
        let x = HpReal::from_bigint(&n, 256);
        assert_eq!(x.round_to_bigint(), n);
        assert_eq!(x.to_rational(), BigRational::from_integer(n));
    }

    #[test]
    fn rational_conversion_and_rounding() {
        let q = BigRational::new(BigInt::from(-7), BigInt::from(2));
        let x = HpReal::from_rational(&q, 128);
        assert_eq!(x.to_f64(), -3.5);
        assert_eq!(x.round_to_bigint(), BigInt::from(-4));
        assert_eq!(HpReal::from_f64(2.5, 64).round_to_bigint(), BigInt::from(3));
    }

    #[test]
    fn formatting() {
        let x = HpReal::from_u64(19302, 256);
        assert_eq!(x.to_fixed(3), "19302.000");
        assert_eq!(x.to_sci(3), "1.93e4");
        assert_eq!(HpReal::from_f64(-0.00125, 64).to_sci(2), "-1.3e-3");
        assert_eq!(HpReal::from_f64(0.5, 64).to_fixed(0), "1");
        assert_eq!(format!("{:.2}", HpReal::from_f64(-0.004, 64)), "0.00");
    }

    #[test]
    fn ldexp_and_roundoff() {
        let x = HpReal::from_u64(3, 128).ldexp(-2);
        assert_eq!(x.to_f64(), 0.75);
        assert_eq!(HpReal::one(64).unit_roundoff().to_f64(), 2f64.powi(-63));
    }

    #[test]
    fn ordering() {
        let a = HpReal::from_f64(1.5, 128);
        let b = HpReal::from_f64(2.0, 256);
        assert!(a < b);
        assert_eq!((&a + &b).precision(), 256);
        assert_eq!(a.clone().max(b.clone()), b);
    }
}
