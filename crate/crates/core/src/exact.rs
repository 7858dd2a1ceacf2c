//! Exact Stirling-type triangles, Bell-type polynomials, triangle composition
//! and the generalized Stirling transform.
//!
//! Triangles are indexed from 1 in both `n` and `k`; the `n = 0` term of every
//! sequence is the scalar 1 and lives outside the triangle.
//!
//! Entries of the closed-form families are extracted by finite differences:
//! if `e^{-y} Σ_k f(k) y^k / k! = Σ_m c_m y^m` with `f` a polynomial, then
//! `c_m = Δ^m f(0) / m!`, the coefficient of the falling factorial `(k)_m` in
//! `f(k)`. Every such division by `m!` is checked to be exact.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exec;
use crate::spec::GeneratorSpec;

/// Arbitrary-precision rational; always kept in lowest terms with a
/// positive denominator.
pub type ExactRational = BigRational;

/// Default number of triangle rows a front-end should allow.
pub const DEFAULT_ORDER_CAP: usize = 64;

pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// `C(n, k)` for `0 <= k <= n`, zero otherwise.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    // Each partial product is itself a binomial coefficient, so every
    // division is exact.
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Pascal row `C(k, 0..=k)`.
fn pascal_row(k: u64) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(k as usize + 1);
    let mut c = BigInt::one();
    row.push(c.clone());
    for j in 0..k {
        c = c * (k - j) / (j + 1);
        row.push(c.clone());
    }
    row
}

/// `(1/m!) Σ_j (-1)^{m-j} C(m,j) f(j)` from the samples `f(0..=m)`.
fn falling_coefficient(samples: &[BigInt], m: usize) -> Result<BigInt> {
    let binom = pascal_row(m as u64);
    let mut acc = BigInt::zero();
    for (j, c) in binom.iter().enumerate() {
        let term = c * &samples[j];
        if (m - j).is_multiple_of(2) {
            acc += term;
        } else {
            acc -= term;
        }
    }
    let (q, r) = acc.div_rem(&factorial(m as u64));
    if !r.is_zero() {
        return Err(Error::invariant(format!(
            "finite difference of order {m} is not divisible by {m}!"
        )));
    }
    Ok(q)
}

fn check_range(n: usize, k: usize) -> Result<()> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::domain(format!("need 1 <= k <= n, got n = {n}, k = {k}")));
    }
    Ok(())
}

/// `f(j) = Π_{i=1..n} [j + (i-1)(r-1)]`, the polynomial behind `S_{r,1}(n,·)`.
fn r1_product(n: usize, r: u32, j: u64) -> BigInt {
    let step = r as u64 - 1;
    (0..n as u64).fold(BigInt::one(), |acc, i| acc * (j + i * step))
}

/// Stirling numbers of the second kind.
pub fn stirling_second(n: usize, k: usize) -> Result<BigInt> {
    check_range(n, k)?;
    let samples: Vec<BigInt> = (0..=k as u64).map(|j| BigInt::from(j).pow(n as u32)).collect();
    falling_coefficient(&samples, k)
}

/// Unsigned Lah numbers `(n!/k!) C(n-1, k-1)`.
pub fn lah(n: usize, k: usize) -> Result<BigInt> {
    check_range(n, k)?;
    let ratio = (k as u64 + 1..=n as u64).fold(BigInt::one(), |acc, i| acc * i);
    Ok(ratio * binomial(n as u64 - 1, k as u64 - 1))
}

/// `S_{r,1}(n, k)`: coefficients of `B_{r,1}(n, y)`.
pub fn stirling_r1(n: usize, k: usize, r: u32) -> Result<BigInt> {
    check_range(n, k)?;
    if r == 0 {
        return Err(Error::domain("r must be >= 1"));
    }
    let samples: Vec<BigInt> = (0..=k as u64).map(|j| r1_product(n, r, j)).collect();
    falling_coefficient(&samples, k)
}

/// `f(k) = Π_{j=1..n} (k + (j-1)(r-s))_s` with `(m)_s` the falling factorial.
fn rs_product(n: usize, r: u32, s: u32, k: u64) -> BigInt {
    let step = (r - s) as u64;
    (0..n as u64).fold(BigInt::one(), |acc, j| {
        let m = BigInt::from(k + j * step);
        (0..s as u64).fold(acc, |a, i| a * (&m - i))
    })
}

/// `S_{r,s}(n, k)` for `s <= k <= n s`: the coefficient of `y^k` in
/// `B_{r,s}(n, y)`.
pub fn stirling_rs(n: usize, k: usize, r: u32, s: u32) -> Result<BigInt> {
    if s == 0 || r < s {
        return Err(Error::unsupported(format!("RS({r},{s}) requires r >= s >= 1")));
    }
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    if k < s as usize || k > n * s as usize {
        return Ok(BigInt::zero());
    }
    let samples: Vec<BigInt> = (0..=k as u64).map(|j| rs_product(n, r, s, j)).collect();
    falling_coefficient(&samples, k)
}

/// Coefficients `y^0..=y^{ns}` of `B_{r,s}(n, y)`.
pub fn rs_polynomial(n: usize, r: u32, s: u32) -> Result<BellPolynomial> {
    if s == 0 || r < s {
        return Err(Error::unsupported(format!("RS({r},{s}) requires r >= s >= 1")));
    }
    if n == 0 {
        return Ok(BellPolynomial::one());
    }
    let top = n * s as usize;
    let samples: Vec<BigInt> = (0..=top as u64).map(|j| rs_product(n, r, s, j)).collect();
    let mut coeffs = vec![BigInt::zero(); top + 1];
    for (k, c) in coeffs.iter_mut().enumerate().skip(s as usize) {
        *c = falling_coefficient(&samples[..=k], k)?;
    }
    Ok(BellPolynomial::from_integers(coeffs))
}

/// `B_{r,s}(n, y)` evaluated exactly.
pub fn b_rs_poly(n: usize, r: u32, s: u32, y: &ExactRational) -> Result<ExactRational> {
    if n == 0 {
        return Err(Error::domain("n must be >= 1"));
    }
    Ok(rs_polynomial(n, r, s)?.eval(y))
}

/// A polynomial in `y` with exact coefficients, `coeffs[k]` multiplying `y^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellPolynomial {
    coeffs: Vec<ExactRational>,
}

impl BellPolynomial {
    pub fn one() -> Self {
        BellPolynomial { coeffs: vec![ExactRational::one()] }
    }

    pub fn from_integers(c: Vec<BigInt>) -> Self {
        BellPolynomial { coeffs: c.into_iter().map(ExactRational::from_integer).collect() }
    }

    pub fn coeffs(&self) -> &[ExactRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn eval(&self, y: &ExactRational) -> ExactRational {
        self.coeffs.iter().rev().fold(ExactRational::zero(), |acc, c| acc * y + c)
    }

    fn add_scaled(&mut self, other: &BellPolynomial, scale: &BigInt) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), ExactRational::zero());
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * scale;
        }
    }
}

/// Lower-triangular matrix `S(n, k)`, `1 <= k <= n <= order`.
#[derive(Clone, PartialEq, Eq)]
pub struct StirlingTriangle {
    kind: Option<GeneratorSpec>,
    rows: Vec<Vec<BigInt>>,
}

impl StirlingTriangle {
    /// Builds a triangle from explicit rows; row `n-1` must hold `n` entries.
    pub fn from_rows(kind: Option<GeneratorSpec>, rows: Vec<Vec<BigInt>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::Dimension { expected: i + 1, found: row.len() });
            }
        }
        Ok(StirlingTriangle { kind, rows })
    }

    pub fn identity(order: usize) -> Self {
        let rows = (1..=order)
            .map(|n| (1..=n).map(|k| if k == n { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        StirlingTriangle { kind: None, rows }
    }

    pub fn kind(&self) -> Option<&GeneratorSpec> {
        self.kind.as_ref()
    }

    pub fn order(&self) -> usize {
        self.rows.len()
    }

    /// `S(n, k)`; zero above the diagonal.
    pub fn get(&self, n: usize, k: usize) -> BigInt {
        if k == 0 || k > n || n > self.order() {
            return BigInt::zero();
        }
        self.rows[n - 1][k - 1].clone()
    }

    /// Row `n` as `S(n, 1..=n)`.
    pub fn row(&self, n: usize) -> &[BigInt] {
        &self.rows[n - 1]
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn row_sums(&self) -> Vec<BigInt> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn has_unit_diagonal(&self) -> bool {
        self.rows.iter().all(|r| r.last().is_some_and(|d| d.is_one()))
    }

    /// Truncates to the first `order` rows.
    pub fn truncated(&self, order: usize) -> Self {
        StirlingTriangle { kind: self.kind.clone(), rows: self.rows[..order.min(self.order())].to_vec() }
    }
}

impl fmt::Debug for StirlingTriangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = self.kind.as_ref().map(|k| k.to_string()).unwrap_or_else(|| "-".into());
        writeln!(f, "StirlingTriangle[{kind}, order {}]", self.order())?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "  {}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Row `n` of the `F_r` triangle. Rows are independent of each other.
fn r1_row(n: usize, r: u32) -> Result<Vec<BigInt>> {
    let samples: Vec<BigInt> = (0..=n as u64).map(|j| r1_product(n, r, j)).collect();
    (1..=n).map(|k| falling_coefficient(&samples[..=k], k)).collect()
}

/// The Stirling triangle of a Sheffer-type generator.
pub fn triangle(spec: &GeneratorSpec, order: usize) -> Result<StirlingTriangle> {
    if order == 0 {
        return Err(Error::domain("triangle order must be >= 1"));
    }
    spec.validate()?;
    let rows = match spec {
        GeneratorSpec::BellR(r) | GeneratorSpec::Rs { r, s: 1 } => {
            let r = *r;
            exec::try_map_range(1..order + 1, |n| r1_row(n, r))?
        }
        GeneratorSpec::Rs { r, s } => {
            return Err(Error::unsupported(format!(
                "RS({r},{s}) with s > 1 is not of Sheffer type and has no square triangle"
            )))
        }
        GeneratorSpec::OrderedBell => {
            return Err(Error::unsupported("ordered Bell generator has no Sheffer triangle"))
        }
        GeneratorSpec::Composite(outer, inner) => {
            let t = compose_triangles(&triangle(inner, order)?, &triangle(outer, order)?)?;
            return Ok(StirlingTriangle { kind: Some(spec.clone()), rows: t.rows });
        }
    };
    Ok(StirlingTriangle { kind: Some(spec.clone()), rows })
}

/// `S_{F(G)}(n, k) = Σ_p S_G(n, p) S_F(p, k)`, i.e. the matrix product
/// `S_G · S_F` (inner triangle on the left).
pub fn compose_triangles(inner: &StirlingTriangle, outer: &StirlingTriangle) -> Result<StirlingTriangle> {
    if inner.order() != outer.order() {
        return Err(Error::Dimension { expected: inner.order(), found: outer.order() });
    }
    let rows = exec::map_range(1..inner.order() + 1, |n| {
        (1..=n)
            .map(|k| (k..=n).map(|p| &inner.rows[n - 1][p - 1] * &outer.rows[p - 1][k - 1]).sum())
            .collect()
    });
    let kind = match (outer.kind(), inner.kind()) {
        (Some(o), Some(i)) => Some(GeneratorSpec::compose(o.clone(), i.clone())),
        _ => None,
    };
    Ok(StirlingTriangle { kind, rows })
}

/// `b_n = Σ_{k=1..n} S(n, k) a_k` for `n = 1..=order`, where `seq[k-1] = a_k`.
pub fn stirling_transform(t: &StirlingTriangle, seq: &[ExactRational]) -> Result<Vec<ExactRational>> {
    if seq.len() < t.order() {
        return Err(Error::Dimension { expected: t.order(), found: seq.len() });
    }
    Ok(exec::map_range(1..t.order() + 1, |n| {
        t.row(n).iter().zip(seq).fold(ExactRational::zero(), |acc, (s, a)| acc + a * s)
    }))
}

/// Ordered Bell (Fubini) number `Σ_k S(n, k) k!`, with `B_O(0) = 1`.
pub fn ordered_bell(n: usize) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    ordered_bell_polynomial(n).coeffs.iter().map(|c| c.to_integer()).sum()
}

fn ordered_bell_polynomial(n: usize) -> BellPolynomial {
    if n == 0 {
        return BellPolynomial::one();
    }
    let mut c = vec![BigInt::zero(); n + 1];
    for (k, slot) in c.iter_mut().enumerate().skip(1) {
        *slot = stirling_second(n, k).expect("1 <= k <= n") * factorial(k as u64);
    }
    BellPolynomial::from_integers(c)
}

/// `B_O(n, y) = Σ_k S(n, k) k! y^k`.
pub fn ordered_bell_poly(n: usize, y: &ExactRational) -> ExactRational {
    ordered_bell_polynomial(n).eval(y)
}

/// Polynomials `B_spec(n, y)` for `n = 0..=n_max`.
///
/// A composite `F(G)` is evaluated as `Σ_k S_G(n, k) B_F(k, y)`. For a
/// Sheffer outer generator this is the triangle product; for a non-Sheffer
/// outer generator (ordered Bell, `RS` with `s > 1`) it is taken as the
/// definition of the composed sequence.
pub fn bell_polynomials(spec: &GeneratorSpec, n_max: usize) -> Result<Vec<BellPolynomial>> {
    spec.validate()?;
    match spec {
        GeneratorSpec::BellR(_) | GeneratorSpec::Rs { s: 1, .. } => {
            let mut out = vec![BellPolynomial::one()];
            if n_max > 0 {
                let t = triangle(spec, n_max)?;
                out.extend(t.rows.iter().map(|row| {
                    let mut c = vec![BigInt::zero()];
                    c.extend(row.iter().cloned());
                    BellPolynomial::from_integers(c)
                }));
            }
            Ok(out)
        }
        GeneratorSpec::Rs { r, s } => {
            let (r, s) = (*r, *s);
            let mut out = vec![BellPolynomial::one()];
            out.extend(exec::try_map_range(1..n_max + 1, |n| rs_polynomial(n, r, s))?);
            Ok(out)
        }
        GeneratorSpec::OrderedBell => Ok(exec::map_range(0..n_max + 1, ordered_bell_polynomial)),
        GeneratorSpec::Composite(outer, inner) => {
            let outer_polys = bell_polynomials(outer, n_max)?;
            let mut out = vec![BellPolynomial::one()];
            if n_max > 0 {
                let t = triangle(inner, n_max)?;
                out.extend(exec::map_range(1..n_max + 1, |n| {
                    let mut acc = BellPolynomial { coeffs: Vec::new() };
                    for (k, s) in t.row(n).iter().enumerate() {
                        acc.add_scaled(&outer_polys[k + 1], s);
                    }
                    acc
                }));
            }
            Ok(out)
        }
    }
}

/// `B_spec(n, y)` evaluated exactly.
pub fn bell_poly(spec: &GeneratorSpec, n: usize, y: &ExactRational) -> Result<ExactRational> {
    Ok(bell_polynomials(spec, n)?[n].eval(y))
}

/// `B_spec(n, y)` for `n = 0..=n_max`.
pub fn sequence(spec: &GeneratorSpec, n_max: usize, y: &ExactRational) -> Result<Vec<ExactRational>> {
    Ok(bell_polynomials(spec, n_max)?.iter().map(|p| p.eval(y)).collect())
}

/// Integer sequence `B_spec(n) = B_spec(n, 1)` for `n = 0..=n_max`.
pub fn integer_sequence(spec: &GeneratorSpec, n_max: usize) -> Result<Vec<BigInt>> {
    sequence(spec, n_max, &ExactRational::one())?
        .into_iter()
        .map(|q| {
            if q.is_integer() {
                Ok(q.to_integer())
            } else {
                Err(Error::invariant(format!("non-integral sequence value {q}")))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn q(n: i64, d: i64) -> ExactRational {
        ExactRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// Normally ordered boson operator: `(p, q) -> c` stands for `c (a†)^p a^q`.
    type Normal = BTreeMap<(usize, usize), BigInt>;

    fn normal_mul(x: &Normal, y: &Normal) -> Normal {
        // a^q (a†)^p = Σ_j C(q,j) C(p,j) j! (a†)^{p-j} a^{q-j}
        let mut out = Normal::new();
        for (&(p1, q1), c1) in x {
            for (&(p2, q2), c2) in y {
                for j in 0..=q1.min(p2) {
                    let w = binomial(q1 as u64, j as u64) * binomial(p2 as u64, j as u64) * factorial(j as u64);
                    *out.entry((p1 + p2 - j, q1 - j + q2)).or_insert_with(BigInt::zero) += c1 * c2 * w;
                }
            }
        }
        out
    }

    /// `S_{r,s}(n, k)` read off the normal form of `[(a†)^r a^s]^n`.
    fn normal_order_oracle(n: usize, r: usize, s: usize, k: usize) -> BigInt {
        let mono: Normal = [((r, s), BigInt::one())].into_iter().collect();
        let mut acc = mono.clone();
        for _ in 1..n {
            acc = normal_mul(&acc, &mono);
        }
        acc.get(&(n * (r - s) + k, k)).cloned().unwrap_or_default()
    }

    /// Brute-force count of set partitions of an n-set into k blocks.
    fn count_partitions(n: usize, k: usize) -> u64 {
        fn go(i: usize, n: usize, blocks: usize, k: usize) -> u64 {
            if i == n {
                return (blocks == k) as u64;
            }
            let mut total = 0;
            for b in 0..blocks {
                let _ = b;
                total += go(i + 1, n, blocks, k);
            }
            if blocks < k {
                total += go(i + 1, n, blocks + 1, k);
            }
            total
        }
        go(0, n, 0, k)
    }

    fn recurrence_stirling(order: usize) -> Vec<Vec<BigInt>> {
        let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
        for n in 1..order {
            let prev = &rows[n - 1];
            let row = (1..=n + 1)
                .map(|k| {
                    let left = if k >= 2 { prev[k - 2].clone() } else { BigInt::zero() };
                    let here = if k <= n { prev[k - 1].clone() * k } else { BigInt::zero() };
                    left + here
                })
                .collect();
            rows.push(row);
        }
        rows
    }

    #[test]
    fn stirling_second_examples() {
        assert_eq!(stirling_second(1, 1).unwrap(), BigInt::one());
        assert_eq!(stirling_second(4, 2).unwrap(), BigInt::from(count_partitions(4, 2)));
        assert_eq!(count_partitions(4, 2), 7);
        for n in 1..=20 {
            assert_eq!(stirling_second(n, n).unwrap(), BigInt::one());
            assert_eq!(stirling_second(n, 1).unwrap(), BigInt::one());
        }
        for n in 1..=8 {
            for k in 1..=n {
                assert_eq!(stirling_second(n, k).unwrap(), BigInt::from(count_partitions(n, k)));
            }
        }
    }

    #[test]
    fn stirling_matches_recurrence() {
        let rec = recurrence_stirling(30);
        let t = triangle(&GeneratorSpec::bell(), 30).unwrap();
        assert_eq!(t.rows(), &rec[..]);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(stirling_second(3, 0), Err(Error::Domain(_))));
        assert!(matches!(stirling_second(3, 4), Err(Error::Domain(_))));
        assert!(matches!(lah(0, 0), Err(Error::Domain(_))));
        assert!(matches!(stirling_r1(2, 3, 2), Err(Error::Domain(_))));
        assert!(matches!(b_rs_poly(2, 1, 2, &q(1, 1)), Err(Error::Unsupported(_))));
        assert!(matches!(triangle(&GeneratorSpec::OrderedBell, 3), Err(Error::Unsupported(_))));
        assert!(matches!(
            triangle(&GeneratorSpec::Rs { r: 3, s: 2 }, 3),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn lah_examples() {
        assert_eq!(lah(1, 1).unwrap(), BigInt::one());
        // (3!/2!) C(2,1) = 6
        assert_eq!(lah(3, 2).unwrap(), BigInt::from(6));
        let row4: BigInt = (1..=4).map(|k| lah(4, k).unwrap()).sum();
        assert_eq!(row4, BigInt::from(73));
    }

    #[test]
    fn stirling_r1_examples_and_reductions() {
        for r in 1..=5 {
            for n in 1..=8 {
                assert_eq!(stirling_r1(n, n, r).unwrap(), BigInt::one());
            }
        }
        assert_eq!(stirling_r1(2, 1, 3).unwrap(), normal_order_oracle(2, 3, 1, 1));
        assert_eq!(stirling_r1(2, 1, 3).unwrap(), BigInt::from(3));
        assert_eq!(stirling_r1(3, 2, 2).unwrap(), lah(3, 2).unwrap());
        for n in 1..=10 {
            for k in 1..=n {
                assert_eq!(stirling_r1(n, k, 1).unwrap(), stirling_second(n, k).unwrap());
                assert_eq!(stirling_r1(n, k, 2).unwrap(), lah(n, k).unwrap());
            }
        }
    }

    #[test]
    fn rs_numbers_match_normal_ordering() {
        for r in 1..=4usize {
            for s in 1..=r {
                for n in 1..=4usize {
                    for k in s..=n * s {
                        assert_eq!(
                            stirling_rs(n, k, r as u32, s as u32).unwrap(),
                            normal_order_oracle(n, r, s, k),
                            "S_{{{r},{s}}}({n},{k})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn b_rs_poly_examples() {
        let one = q(1, 1);
        for r in 1..=5 {
            assert_eq!(b_rs_poly(1, r, r, &one).unwrap(), one);
        }
        // (a†²a²)² = a†⁴a⁴ + 4a†³a³ + 2a†²a²
        assert_eq!(b_rs_poly(2, 2, 2, &one).unwrap(), q(7, 1));
        for r in 1..=4 {
            for n in 1..=8 {
                for y in [q(1, 1), q(2, 1), q(1, 2)] {
                    let direct: ExactRational = (1..=n)
                        .map(|k| {
                            ExactRational::from_integer(stirling_r1(n, k, r).unwrap())
                                * num_traits::pow(y.clone(), k)
                        })
                        .sum();
                    assert_eq!(b_rs_poly(n, r, 1, &y).unwrap(), direct);
                }
            }
        }
    }

    #[test]
    fn triangle_examples() {
        let t = triangle(&GeneratorSpec::bell(), 4).unwrap();
        assert_eq!(t.rows(), &[ints(&[1]), ints(&[1, 1]), ints(&[1, 3, 1]), ints(&[1, 7, 6, 1])]);
        let t = triangle(&GeneratorSpec::lah(), 3).unwrap();
        assert_eq!(t.rows(), &[ints(&[1]), ints(&[2, 1]), ints(&[6, 6, 1])]);
        let bb = GeneratorSpec::compose(GeneratorSpec::bell(), GeneratorSpec::bell());
        let t = triangle(&bb, 2).unwrap();
        assert_eq!(t.rows(), &[ints(&[1]), ints(&[2, 1])]);
        assert_eq!(t.kind(), Some(&bb));
        // RS(r,1) is the same family as BellR(r).
        assert_eq!(
            triangle(&GeneratorSpec::Rs { r: 3, s: 1 }, 6).unwrap().rows(),
            triangle(&GeneratorSpec::BellR(3), 6).unwrap().rows()
        );
    }

    #[test]
    fn triangle_group_identity() {
        for spec in [GeneratorSpec::bell(), GeneratorSpec::lah(), GeneratorSpec::BellR(3), GeneratorSpec::BellR(4)] {
            let t = triangle(&spec, 12).unwrap();
            let id = StirlingTriangle::identity(12);
            assert_eq!(compose_triangles(&id, &t).unwrap().rows(), t.rows());
            assert_eq!(compose_triangles(&t, &id).unwrap().rows(), t.rows());
            assert!(t.has_unit_diagonal());
            assert!(t.rows().iter().flatten().all(|x| x > &BigInt::zero()));
        }
    }

    #[test]
    fn composition_sequences() {
        let b = GeneratorSpec::bell();
        let l = GeneratorSpec::lah();
        let bb = triangle(&GeneratorSpec::compose(b.clone(), b.clone()), 7).unwrap();
        assert_eq!(bb.row(2), &ints(&[2, 1])[..]);
        assert_eq!(bb.row_sums(), ints(&[1, 3, 12, 60, 358, 2471, 19302]));
        let ll = triangle(&GeneratorSpec::compose(l.clone(), l), 6).unwrap();
        assert_eq!(ll.row_sums(), ints(&[1, 5, 37, 361, 4361, 62701]));
        assert!(matches!(
            compose_triangles(&triangle(&b, 3).unwrap(), &triangle(&b, 4).unwrap()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn stirling_transform_examples() {
        let s = triangle(&GeneratorSpec::bell(), 8).unwrap();
        let bell: Vec<ExactRational> =
            [1, 2, 5, 15, 52, 203, 877, 4140].iter().map(|&x| q(x, 1)).collect();
        let out = stirling_transform(&s, &bell).unwrap();
        let expect: Vec<ExactRational> =
            [1, 3, 12, 60, 358, 2471, 19302, 167894].iter().map(|&x| q(x, 1)).collect();
        assert_eq!(out[..7], expect[..7]);

        let s5 = s.truncated(5);
        let ob: Vec<ExactRational> = [1, 3, 13, 75, 541].iter().map(|&x| q(x, 1)).collect();
        let out = stirling_transform(&s5, &ob).unwrap();
        assert_eq!(out, [1, 4, 23, 175, 1662].iter().map(|&x| q(x, 1)).collect::<Vec<_>>());

        let id = StirlingTriangle::identity(5);
        assert_eq!(stirling_transform(&id, &ob).unwrap(), ob);
        assert!(matches!(stirling_transform(&s, &ob), Err(Error::Dimension { .. })));
    }

    /// Ordered set partitions of an n-set: sequences of nonempty blocks.
    fn count_ordered_partitions(n: usize) -> u64 {
        // Assign each element a block label in 0..n and keep surjections onto 0..k.
        let mut total = 0;
        for k in 1..=n {
            let mut labels = vec![0usize; n];
            loop {
                let mut seen = vec![false; k];
                labels.iter().for_each(|&l| seen[l] = true);
                if seen.iter().all(|&s| s) {
                    total += 1;
                }
                let mut i = 0;
                while i < n {
                    labels[i] += 1;
                    if labels[i] < k {
                        break;
                    }
                    labels[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
        total
    }

    #[test]
    fn ordered_bell_examples() {
        assert_eq!(ordered_bell(0), BigInt::one());
        assert_eq!(ordered_bell(3), BigInt::from(1 + 3 * 2 + 6));
        assert_eq!(ordered_bell(4), BigInt::from(count_ordered_partitions(4)));
        assert_eq!(count_ordered_partitions(4), 75);
        assert_eq!(ordered_bell(5), BigInt::from(count_ordered_partitions(5)));
        assert_eq!(ordered_bell_poly(2, &q(1, 2)), q(1, 2) + q(2, 4));
    }

    #[test]
    fn bell_poly_examples() {
        let l = GeneratorSpec::lah();
        let b = GeneratorSpec::bell();
        let one = q(1, 1);
        let ll = GeneratorSpec::compose(l.clone(), l.clone());
        assert_eq!(bell_poly(&ll, 2, &one).unwrap(), q(5, 1));
        for spec in [b.clone(), l.clone(), ll, GeneratorSpec::OrderedBell, GeneratorSpec::BellR(5)] {
            assert_eq!(bell_poly(&spec, 1, &one).unwrap(), one);
        }
        let obb = GeneratorSpec::compose(
            GeneratorSpec::OrderedBell,
            GeneratorSpec::compose(b.clone(), b.clone()),
        );
        // Σ_k S(3,k) B_{O(B)}(k) with B_{O(B)} = 1, 4, 23
        assert_eq!(bell_poly(&obb, 3, &one).unwrap(), q(1 + 3 * 4 + 23, 1));
    }

    #[test]
    fn polynomial_coefficients_are_row_entries() {
        let p = &bell_polynomials(&GeneratorSpec::BellR(3), 5).unwrap()[5];
        assert_eq!(p.degree(), 5);
        for k in 1..=5 {
            assert_eq!(p.coeffs()[k], ExactRational::from_integer(stirling_r1(5, k, 3).unwrap()));
        }
        let rs = rs_polynomial(3, 3, 2).unwrap();
        assert_eq!(rs.degree(), 6);
        assert!(rs.coeffs()[..2].iter().all(|c| c.is_zero()));
    }

    #[test]
    fn published_integer_sequences() {
        let b = GeneratorSpec::bell();
        let l = GeneratorSpec::lah();
        let bbb = GeneratorSpec::nest(b.clone(), 3);
        assert_eq!(
            integer_sequence(&bbb, 7).unwrap(),
            ints(&[1, 1, 4, 22, 154, 1304, 12915, 146115])
        );
        let bl = GeneratorSpec::compose(b.clone(), l.clone());
        assert_eq!(integer_sequence(&bl, 6).unwrap()[1..], ints(&[1, 4, 23, 171, 1552, 16583])[..]);
        let lb = GeneratorSpec::compose(l, b.clone());
        assert_eq!(integer_sequence(&lb, 6).unwrap()[1..], ints(&[1, 4, 23, 173, 1602, 17575])[..]);
        let ob = GeneratorSpec::compose(GeneratorSpec::OrderedBell, b);
        assert_eq!(integer_sequence(&ob, 6).unwrap()[1..], ints(&[1, 4, 23, 175, 1662, 18937])[..]);
    }
}
