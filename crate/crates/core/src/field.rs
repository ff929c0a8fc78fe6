//! Exact arithmetic in `F_{p^m}` for odd `p`.
//!
//! Elements are stored as their index in the fixed enumeration of the field:
//! the coefficient vector `(c_0, ..., c_{m-1})` of `c_0 + c_1 x + ... ` in the
//! modulus basis maps to `c_0 + c_1 p + ... + c_{m-1} p^{m-1}`. Index 0 is zero
//! and index 1 is one. Enumeration order is the numeric order of that index,
//! i.e. lexicographic on the coefficient vector read from the top coefficient
//! down.
//!
//! Multiplication goes through discrete log / exp tables built once at
//! construction; addition is digit-wise in base `p`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default upper bound on `p^m`.
pub const DEFAULT_ORDER_CAP: u64 = 1 << 16;

/// Value of the additive character, a point on the unit circle.
pub type UnitComplex = Complex64;

/// An element of some [`FieldSpec`].
///
/// The field order travels with the element so that operands from different
/// fields are detected by the checked API. Since the modulus is a deterministic
/// function of `(p, m)`, the order identifies the field.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    order: u32,
    index: u32,
}

impl FieldElement {
    /// Position of this element in the field enumeration.
    #[inline]
    pub fn index(self) -> u32 {
        self.index
    }

    /// Order of the field the element belongs to.
    #[inline]
    pub fn order(self) -> u32 {
        self.order
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.index == 0
    }
}

/// Operations accepted by [`FieldSpec::apply`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add(FieldElement),
    Sub(FieldElement),
    Mul(FieldElement),
    Neg,
    Inv,
    Pow(u64),
}

/// A concrete realization of `F_{p^m}`.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    m: u32,
    q: u32,
    /// Monic irreducible modulus, low-to-high, length `m + 1`.
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    trace: Vec<u32>,
    roots: Vec<UnitComplex>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec").field("p", &self.p).field("m", &self.m).field("modulus", &self.modulus).finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `F_{p^m}` with the default order cap.
pub fn make_field(p: u64, m: u32) -> Result<FieldSpec> {
    FieldSpec::with_cap(p, m, DEFAULT_ORDER_CAP)
}

impl FieldSpec {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        make_field(p, m)
    }

    /// Builds `F_{p^m}` using the lexicographically smallest monic irreducible
    /// modulus of degree `m`.
    pub fn with_cap(p: u64, m: u32, cap: u64) -> Result<Self> {
        if p == 2 {
            return Err(Error::EvenCharacteristic);
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if m == 0 {
            return Err(Error::ZeroDegree);
        }
        let order = (p as u128).checked_pow(m).unwrap_or(u128::MAX);
        if order > cap as u128 || order > u32::MAX as u128 {
            return Err(Error::OrderTooLarge { p, m, cap });
        }
        let p = p as u32;
        let q = order as u32;
        let modulus = smallest_irreducible(p, m).ok_or(Error::NoIrreducible { p: p as u64, m })?;

        let mut field = FieldSpec {
            p,
            m,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            trace: Vec::new(),
            roots: (0..p).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / p as f64)).collect(),
        };
        field.roots[0] = Complex64::new(1.0, 0.0);
        field.build_log_tables()?;
        field.build_trace_table();
        Ok(field)
    }

    fn build_log_tables(&mut self) -> Result<()> {
        let q = self.q as usize;
        let group = q - 1;
        'candidates: for g in 1..self.q {
            let mut exp = Vec::with_capacity(group);
            let mut x = 1u32;
            for k in 0..group {
                if k > 0 && x == 1 {
                    continue 'candidates;
                }
                exp.push(x);
                x = self.poly_mul_index(x, g);
            }
            if x != 1 {
                continue;
            }
            let mut log = vec![u32::MAX; q];
            for (k, &v) in exp.iter().enumerate() {
                log[v as usize] = k as u32;
            }
            self.exp = exp;
            self.log = log;
            return Ok(());
        }
        Err(Error::Consistency(format!("no primitive element found in F_{}^{}", self.p, self.m)))
    }

    fn build_trace_table(&mut self) {
        let mut trace = Vec::with_capacity(self.q as usize);
        for idx in 0..self.q {
            let a = self.elem(idx);
            let mut acc = self.zero();
            let mut frob = a;
            for _ in 0..self.m {
                acc = self.add(acc, frob);
                frob = self.pow(frob, self.p as u64);
            }
            debug_assert!(acc.index < self.p, "trace left the prime subfield");
            trace.push(acc.index);
        }
        self.trace = trace;
    }

    /// Product of two elements by polynomial multiplication modulo the modulus.
    /// Used only while building the log tables.
    fn poly_mul_index(&self, a: u32, b: u32) -> u32 {
        if self.m == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let ca = index_to_coeffs(a, self.p, self.m);
        let cb = index_to_coeffs(b, self.p, self.m);
        coeffs_to_index(&poly_mulmod(&ca, &cb, &self.modulus, self.p), self.p)
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.m
    }

    /// `q = p^m`.
    #[inline]
    pub fn order(&self) -> u32 {
        self.q
    }

    /// Modulus coefficients, low-to-high (monic, length `m + 1`). For `m = 1`
    /// this is the placeholder `x`.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    #[inline]
    pub fn zero(&self) -> FieldElement {
        self.elem(0)
    }

    #[inline]
    pub fn one(&self) -> FieldElement {
        self.elem(1)
    }

    #[inline]
    pub(crate) fn elem(&self, index: u32) -> FieldElement {
        debug_assert!(index < self.q);
        FieldElement { order: self.q, index }
    }

    /// Element at position `index` of the enumeration.
    pub fn element(&self, index: u32) -> Result<FieldElement> {
        if index >= self.q {
            return Err(Error::CoefficientOutOfRange { value: index, p: self.q });
        }
        Ok(self.elem(index))
    }

    /// Element with the given coefficients in the modulus basis (low-to-high).
    /// Missing high coefficients are zero.
    pub fn from_coefficients(&self, coeffs: &[u32]) -> Result<FieldElement> {
        if coeffs.len() > self.m as usize {
            return Err(Error::DimensionMismatch { expected: self.m as usize, got: coeffs.len() });
        }
        if let Some(&bad) = coeffs.iter().find(|&&c| c >= self.p) {
            return Err(Error::CoefficientOutOfRange { value: bad, p: self.p });
        }
        Ok(self.elem(coeffs_to_index(coeffs, self.p)))
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, value: i64) -> FieldElement {
        self.elem(value.rem_euclid(self.p as i64) as u32)
    }

    pub fn coefficients(&self, a: FieldElement) -> Vec<u32> {
        index_to_coeffs(a.index, self.p, self.m)
    }

    /// All elements in enumeration order; the first is zero.
    pub fn elements(&self) -> impl ExactSizeIterator<Item = FieldElement> + '_ {
        (0..self.q).map(move |i| self.elem(i))
    }

    /// Enumerates `spec` as a vector.
    pub fn enumerate(&self) -> Vec<FieldElement> {
        self.elements().collect()
    }

    pub fn contains(&self, a: FieldElement) -> bool {
        a.order == self.q && a.index < self.q
    }

    fn check(&self, a: FieldElement) -> Result<()> {
        if a.order != self.q {
            return Err(Error::FieldMismatch { left: self.q, right: a.order });
        }
        Ok(())
    }

    #[inline]
    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(a.order == self.q && b.order == self.q);
        let p = self.p;
        if self.m == 1 {
            let s = a.index + b.index;
            return self.elem(if s >= p { s - p } else { s });
        }
        let (mut x, mut y) = (a.index, b.index);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.m {
            let d = x % p + y % p;
            out += (if d >= p { d - p } else { d }) * place;
            place *= p;
            x /= p;
            y /= p;
        }
        self.elem(out)
    }

    #[inline]
    pub fn neg(&self, a: FieldElement) -> FieldElement {
        debug_assert!(a.order == self.q);
        let p = self.p;
        if self.m == 1 {
            return self.elem(if a.index == 0 { 0 } else { p - a.index });
        }
        let mut x = a.index;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.m {
            let d = x % p;
            out += (if d == 0 { 0 } else { p - d }) * place;
            place *= p;
            x /= p;
        }
        self.elem(out)
    }

    #[inline]
    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        debug_assert!(a.order == self.q && b.order == self.q);
        if a.index == 0 || b.index == 0 {
            return self.zero();
        }
        let group = self.q - 1;
        let k = self.log[a.index as usize] + self.log[b.index as usize];
        self.elem(self.exp[(if k >= group { k - group } else { k }) as usize])
    }

    /// Square-and-multiply exponentiation; `pow(0, 0) = 1`.
    pub fn pow(&self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse as `a^(q-2)`.
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        self.check(a)?;
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.pow(a, self.q as u64 - 2))
    }

    /// Checked arithmetic: validates field membership of every operand.
    pub fn apply(&self, a: FieldElement, op: ArithOp) -> Result<FieldElement> {
        self.check(a)?;
        match op {
            ArithOp::Add(b) => self.check(b).map(|_| self.add(a, b)),
            ArithOp::Sub(b) => self.check(b).map(|_| self.sub(a, b)),
            ArithOp::Mul(b) => self.check(b).map(|_| self.mul(a, b)),
            ArithOp::Neg => Ok(self.neg(a)),
            ArithOp::Inv => self.inv(a),
            ArithOp::Pow(e) => Ok(self.pow(a, e)),
        }
    }

    /// Absolute trace to the prime subfield, as a residue in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: FieldElement) -> u32 {
        self.trace[a.index as usize]
    }

    /// `a = 0` or `a^((q-1)/2) = 1`.
    pub fn is_square(&self, a: FieldElement) -> bool {
        a.is_zero() || self.pow(a, (self.q as u64 - 1) / 2) == self.one()
    }

    pub fn minus_one_is_square(&self) -> bool {
        self.is_square(self.neg(self.one()))
    }

    /// `e(a) = exp(2 pi i Tr(a) / p)`.
    #[inline]
    pub fn character(&self, a: FieldElement) -> UnitComplex {
        self.roots[self.trace(a) as usize]
    }

    /// `exp(2 pi i k / p)` for a residue `k`.
    #[inline]
    pub fn root_of_unity(&self, k: u32) -> UnitComplex {
        self.roots[(k % self.p) as usize]
    }

    pub fn dot(&self, x: &[FieldElement], y: &[FieldElement]) -> FieldElement {
        debug_assert_eq!(x.len(), y.len());
        x.iter().zip(y).fold(self.zero(), |acc, (&a, &b)| self.add(acc, self.mul(a, b)))
    }
}

fn index_to_coeffs(mut index: u32, p: u32, m: u32) -> Vec<u32> {
    (0..m)
        .map(|_| {
            let c = index % p;
            index /= p;
            c
        })
        .collect()
}

fn coeffs_to_index(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

/// `a * b mod modulus` over `Z/p`; `a`, `b` have length `m`, the modulus is
/// monic of degree `m`.
fn poly_mulmod(a: &[u32], b: &[u32], modulus: &[u32], p: u32) -> Vec<u32> {
    let m = modulus.len() - 1;
    let p = p as u64;
    let mut prod = vec![0u64; 2 * m - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
        }
    }
    for k in (m..prod.len()).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for i in 0..m {
            let sub = c * modulus[i] as u64 % p;
            prod[k - m + i] = (prod[k - m + i] + p - sub) % p;
        }
    }
    prod.truncate(m);
    prod.into_iter().map(|c| c as u32).collect()
}

/// Remainder of `f` modulo the monic `g` over `Z/p` (both low-to-high).
fn poly_rem(f: &[u32], g: &[u32], p: u32) -> Vec<u32> {
    let p = p as u64;
    let dg = g.len() - 1;
    let mut r: Vec<u64> = f.iter().map(|&c| c as u64).collect();
    while r.len() > dg {
        let top = r.len() - 1;
        let c = r[top];
        if c != 0 {
            for i in 0..=dg {
                let sub = c * g[i] as u64 % p;
                r[top - dg + i] = (r[top - dg + i] + p - sub) % p;
            }
        }
        r.pop();
    }
    r.into_iter().map(|c| c as u32).collect()
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut g = index_to_coeffs(low as u32, p, d as u32);
            g.push(1);
            if poly_rem(f, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: u32, m: u32) -> Option<Vec<u32>> {
    let count = (p as u64).pow(m);
    (0..count).find_map(|low| {
        let mut f = index_to_coeffs(low as u32, p, m);
        f.push(1);
        is_irreducible(&f, p).then_some(f)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roots_of(f: &[u32], p: u32) -> Vec<u32> {
        (0..p)
            .filter(|&x| {
                let v = f.iter().rev().fold(0u64, |acc, &c| (acc * x as u64 + c as u64) % p as u64);
                v == 0
            })
            .collect()
    }

    #[test]
    fn prime_field_has_placeholder_modulus() {
        let f = make_field(3, 1).unwrap();
        assert_eq!(f.order(), 3);
        assert_eq!(f.modulus(), &[0, 1]);
    }

    #[test]
    fn f9_modulus_is_smallest_irreducible_quadratic() {
        // Oracle: monic quadratics over Z3 in lexicographic order, irreducible
        // iff no root.
        let mut expected = None;
        'outer: for c1 in 0..3u32 {
            for c0 in 0..3u32 {
                if roots_of(&[c0, c1, 1], 3).is_empty() {
                    expected = Some(vec![c0, c1, 1]);
                    break 'outer;
                }
            }
        }
        let f = make_field(3, 2).unwrap();
        assert_eq!(f.order(), 9);
        assert_eq!(Some(f.modulus().to_vec()), expected);
        assert_eq!(f.modulus(), &[1, 0, 1]);
    }

    #[test]
    fn rejects_bad_characteristic() {
        assert_eq!(make_field(4, 1).unwrap_err(), Error::NotPrime(4));
        assert_eq!(make_field(2, 3).unwrap_err(), Error::EvenCharacteristic);
        assert_eq!(make_field(1, 1).unwrap_err(), Error::NotPrime(1));
        assert_eq!(make_field(3, 0).unwrap_err(), Error::ZeroDegree);
        assert!(matches!(make_field(3, 11), Err(Error::OrderTooLarge { .. })));
        assert!(FieldSpec::with_cap(3, 11, 1 << 18).is_ok());
    }

    #[test]
    fn construction_is_deterministic() {
        for (p, m) in [(3, 3), (5, 2), (7, 2), (3, 4)] {
            let a = make_field(p, m).unwrap();
            let b = make_field(p, m).unwrap();
            assert_eq!(a, b);
            assert!(is_irreducible(a.modulus(), a.characteristic()));
        }
    }

    #[test]
    fn small_arithmetic() {
        let f = make_field(7, 1).unwrap();
        let (three, five) = (f.from_int(3), f.from_int(5));
        assert_eq!(f.mul(three, five), f.one());
        assert_eq!(f.inv(three).unwrap(), five);
        assert_eq!(f.inv(f.zero()), Err(Error::DivisionByZero));
        assert_eq!(f.sub(three, five), f.from_int(-2));
        assert_eq!(f.neg(f.one()), f.from_int(6));
    }

    #[test]
    fn checked_ops_reject_mixed_fields() {
        let f7 = make_field(7, 1).unwrap();
        let f9 = make_field(3, 2).unwrap();
        let a = f7.one();
        let b = f9.one();
        assert_eq!(f7.apply(a, ArithOp::Add(b)), Err(Error::FieldMismatch { left: 7, right: 9 }));
        assert!(f7.apply(b, ArithOp::Neg).is_err());
        assert_eq!(f7.apply(a, ArithOp::Mul(a)), Ok(a));
        assert_eq!(f7.apply(f7.zero(), ArithOp::Inv), Err(Error::DivisionByZero));
    }

    #[test]
    fn group_order_kills_every_unit() {
        let f = make_field(3, 2).unwrap();
        for x in f.elements().skip(1) {
            assert_eq!(f.pow(x, 8), f.one());
        }
    }

    #[test]
    fn mul_agrees_with_polynomial_product() {
        let f = make_field(3, 3).unwrap();
        for a in f.elements() {
            for b in f.elements() {
                assert_eq!(f.mul(a, b).index(), f.poly_mul_index(a.index(), b.index()));
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for (p, m) in [(3, 1), (5, 1), (7, 1), (3, 2), (5, 2), (11, 1), (7, 2), (11, 2)] {
            let f = make_field(p, m).unwrap();
            for a in f.elements().skip(1) {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
            }
            if f.order() <= 49 {
                for a in f.elements() {
                    assert_eq!(f.add(a, f.neg(a)), f.zero());
                    for b in f.elements() {
                        assert_eq!(f.add(a, b), f.add(b, a));
                        assert_eq!(f.mul(a, b), f.mul(b, a));
                        for c in f.elements().step_by(3) {
                            assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn trace_values() {
        let f = make_field(5, 1).unwrap();
        for a in f.elements() {
            assert_eq!(f.trace(a), a.index());
        }
        let f9 = make_field(3, 2).unwrap();
        assert_eq!(f9.trace(f9.one()), 2);
        assert_eq!(f9.trace(f9.zero()), 0);
        for a in f9.elements() {
            for b in f9.elements() {
                assert_eq!(f9.trace(f9.add(a, b)), (f9.trace(a) + f9.trace(b)) % 3);
            }
        }
    }

    #[test]
    fn squares_match_enumeration() {
        for (p, m) in [(3, 1), (5, 1), (7, 1), (3, 2), (11, 1), (5, 2), (3, 3), (7, 2), (11, 2)] {
            let f = make_field(p, m).unwrap();
            let mut squares = vec![false; f.order() as usize];
            for x in f.elements() {
                squares[f.mul(x, x).index() as usize] = true;
            }
            for a in f.elements() {
                assert_eq!(f.is_square(a), squares[a.index() as usize], "p={p} m={m} a={a:?}");
            }
            assert_eq!(f.minus_one_is_square(), f.order() % 4 == 1);
        }
        let f3 = make_field(3, 1).unwrap();
        assert!(!f3.is_square(f3.from_int(2)));
        let f7 = make_field(7, 1).unwrap();
        assert!(!f7.is_square(f7.from_int(6)));
        let f9 = make_field(3, 2).unwrap();
        assert!(f9.is_square(f9.neg(f9.one())));
    }

    #[test]
    fn minus_one_square_iff_q_is_1_mod_4_up_to_cap() {
        for p in (3..200u64).filter(|&p| is_prime(p)) {
            for m in 1..=16u32 {
                let Ok(f) = make_field(p, m) else { break };
                assert_eq!(f.minus_one_is_square(), f.order() % 4 == 1, "p={p} m={m}");
            }
        }
    }

    #[test]
    fn character_examples() {
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(f3.character(f3.zero()), Complex64::new(1.0, 0.0));
        let e1 = f3.character(f3.one());
        assert!((e1.re + 0.5).abs() < 1e-12);
        assert!((e1.im - 3f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn character_is_homomorphism_and_sums_to_zero() {
        for (p, m) in [(3, 1), (5, 1), (7, 1), (3, 2), (5, 2), (7, 2), (3, 3)] {
            let f = make_field(p, m).unwrap();
            let total: Complex64 = f.elements().map(|x| f.character(x)).sum();
            assert!(total.norm() < 1e-12);
            for a in f.elements() {
                let e = f.character(a);
                assert!((e.norm_sqr() - 1.0).abs() <= 1e-12);
                if f.order() <= 49 {
                    for b in f.elements() {
                        let lhs = f.character(f.add(a, b));
                        let rhs = f.character(a) * f.character(b);
                        assert!((lhs - rhs).norm() <= 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_order() {
        let f3 = make_field(3, 1).unwrap();
        let idx: Vec<u32> = f3.enumerate().iter().map(|e| e.index()).collect();
        assert_eq!(idx, vec![0, 1, 2]);
        let f9 = make_field(3, 2).unwrap();
        let all = f9.enumerate();
        assert_eq!(all.len(), 9);
        assert!(all[0].is_zero());
        let mut coeffs: Vec<Vec<u32>> = all.iter().map(|&e| f9.coefficients(e)).collect();
        coeffs.dedup();
        assert_eq!(coeffs.len(), 9);
        assert_eq!(f9.from_coefficients(&[2, 1]).unwrap().index(), 5);
        assert!(f9.from_coefficients(&[3]).is_err());
    }
}
