//! Residue rings `Z/p^N` for odd primes `p`, with canonical representatives in `[0, p^N)`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The ring `Z/p^N`. Cheap to copy; every value built on top of it carries one.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Zpn {
    p: u64,
    n: u32,
    modulus: u64,
}

impl fmt::Debug for Zpn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.p, self.n)
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl Zpn {
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidInput(format!("p = {p} must be an odd prime")));
        }
        if n == 0 {
            return Err(Error::InvalidInput("precision N must be positive".into()));
        }
        let mut modulus: u64 = 1;
        for _ in 0..n {
            modulus = modulus
                .checked_mul(p)
                .filter(|m| *m < (1 << 62))
                .ok_or_else(|| Error::InvalidInput(format!("{p}^{n} does not fit in 62 bits")))?;
        }
        Ok(Zpn { p, n, modulus })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn precision(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Same prime, lower precision.
    pub fn with_precision(&self, n: u32) -> Result<Zpn> {
        Zpn::new(self.p, n)
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.modulus
    }

    pub fn from_i64(&self, x: i64) -> u64 {
        let m = self.modulus as i128;
        (((x as i128) % m + m) % m) as u64
    }

    pub fn from_i128(&self, x: i128) -> u64 {
        let m = self.modulus as i128;
        ((x % m + m) % m) as u64
    }

    pub fn from_biguint(&self, x: &BigUint) -> u64 {
        (x % BigUint::from(self.modulus)).to_u64().unwrap()
    }

    /// Parses a decimal integer (optionally signed) and reduces it.
    pub fn parse_decimal(&self, s: &str) -> Result<u64> {
        let t = s.trim();
        let (neg, digits) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::Schema(format!("\"{s}\" is not a decimal integer")));
        }
        let big = BigUint::parse_bytes(digits.as_bytes(), 10)
            .ok_or_else(|| Error::Schema(format!("\"{s}\" is not a decimal integer")))?;
        let r = self.from_biguint(&big);
        Ok(if neg { self.neg(r) } else { r })
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.modulus - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.modulus as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.modulus;
        base %= self.modulus;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `p^k`, which is zero once `k >= N`.
    pub fn p_pow(&self, k: u32) -> u64 {
        if k >= self.n {
            0
        } else {
            self.p.pow(k)
        }
    }

    /// p-adic valuation of a residue; zero has valuation `N`.
    pub fn valuation(&self, mut a: u64) -> u32 {
        if a == 0 {
            return self.n;
        }
        let mut v = 0;
        while a.is_multiple_of(self.p) {
            a /= self.p;
            v += 1;
        }
        v
    }

    #[inline]
    pub fn is_unit(&self, a: u64) -> bool {
        !a.is_multiple_of(self.p)
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        if !self.is_unit(a) {
            return Err(Error::NonUnit(a));
        }
        let (mut r0, mut r1) = (self.modulus as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.from_i128(t0))
    }

    /// Writes a nonzero `a` as `u * p^v` with `u` a unit; returns `(u, v)`.
    /// The unit is only determined modulo `p^(N-v)`; the representative returned is `a / p^v`.
    pub fn split_unit(&self, a: u64) -> (u64, u32) {
        let v = self.valuation(a);
        if v >= self.n {
            return (0, self.n);
        }
        (a / self.p.pow(v), v)
    }
}

/// An element of `Z/p^N`. Arithmetic between different rings is an error, never a coercion.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PScalar {
    value: u64,
    ring: Zpn,
}

impl fmt::Debug for PScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.value, self.ring.p, self.ring.n)
    }
}

impl fmt::Display for PScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl PScalar {
    pub fn new(ring: Zpn, value: i64) -> Self {
        PScalar { value: ring.from_i64(value), ring }
    }

    pub fn from_raw(ring: Zpn, value: u64) -> Self {
        PScalar { value: ring.reduce(value), ring }
    }

    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn ring(&self) -> Zpn {
        self.ring
    }

    pub fn is_unit(&self) -> bool {
        self.ring.is_unit(self.value)
    }

    pub fn valuation(&self) -> u32 {
        self.ring.valuation(self.value)
    }

    fn check(&self, other: &PScalar) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(format!("{:?} vs {:?}", self.ring, other.ring)));
        }
        Ok(())
    }

    pub fn add(&self, other: &PScalar) -> Result<PScalar> {
        self.check(other)?;
        Ok(PScalar { value: self.ring.add(self.value, other.value), ring: self.ring })
    }

    pub fn sub(&self, other: &PScalar) -> Result<PScalar> {
        self.check(other)?;
        Ok(PScalar { value: self.ring.sub(self.value, other.value), ring: self.ring })
    }

    pub fn mul(&self, other: &PScalar) -> Result<PScalar> {
        self.check(other)?;
        Ok(PScalar { value: self.ring.mul(self.value, other.value), ring: self.ring })
    }

    pub fn pow(&self, e: u64) -> PScalar {
        PScalar { value: self.ring.pow(self.value, e), ring: self.ring }
    }

    pub fn inverse(&self) -> Result<PScalar> {
        scalar_inverse(self)
    }
}

pub fn scalar_inverse(a: &PScalar) -> Result<PScalar> {
    Ok(PScalar { value: a.ring.inv(a.value)?, ring: a.ring })
}

/// The Teichmüller representative of `a mod p`: the unique `(p-1)`-th root of unity
/// congruent to `a`. Obtained as the limit of `x -> x^p`, which is stationary after at most
/// `N` steps.
pub fn teichmueller_lift(a: u64, ring: Zpn) -> Result<PScalar> {
    let p = ring.p();
    if a.is_multiple_of(p) {
        return Err(Error::InvalidInput(format!("{a} is divisible by {p}")));
    }
    let mut x = ring.reduce(a % p);
    for _ in 0..=ring.precision() {
        let next = ring.pow(x, p);
        if next == x {
            return Ok(PScalar { value: x, ring });
        }
        x = next;
    }
    panic!("Teichmüller iteration did not stabilise within N steps");
}

/// Teichmüller lift modulo `p^k` for arbitrary `k`, as an exponent-sized integer.
pub fn teichmueller_lift_big(a: u64, p: u64, k: u32) -> Result<BigUint> {
    if a.is_multiple_of(p) {
        return Err(Error::InvalidInput(format!("{a} is divisible by {p}")));
    }
    let modulus = BigUint::from(p).pow(k);
    let pb = BigUint::from(p);
    let mut x = BigUint::from(a % p);
    for _ in 0..=k {
        let next = x.modpow(&pb, &modulus);
        if next == x {
            return Ok(x);
        }
        x = next;
    }
    panic!("Teichmüller iteration did not stabilise within k steps");
}

/// A p-adic integer used as an exponent in `(1+X)^c`. Either an exact non-negative integer
/// or a residue known modulo `p^precision`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicExponent {
    pub p: u64,
    pub value: BigUint,
    pub precision: Option<u32>,
}

impl PadicExponent {
    pub fn integer(p: u64, value: u64) -> Self {
        PadicExponent { p, value: BigUint::from(value), precision: None }
    }

    pub fn residue(p: u64, value: BigUint, precision: u32) -> Self {
        let modulus = BigUint::from(p).pow(precision);
        PadicExponent { p, value: value % modulus, precision: Some(precision) }
    }

    /// Base-p digits, least significant first. Exact integers yield all their digits;
    /// residues yield exactly `precision` digits.
    pub fn digits(&self) -> Vec<u64> {
        let pb = BigUint::from(self.p);
        let mut v = self.value.clone();
        let mut out = Vec::new();
        match self.precision {
            Some(k) => {
                for _ in 0..k {
                    out.push((&v % &pb).to_u64().unwrap());
                    v /= &pb;
                }
            }
            None => {
                while !v.is_zero() {
                    out.push((&v % &pb).to_u64().unwrap());
                    v /= &pb;
                }
            }
        }
        out
    }

    /// Product of exponents; precision is the smaller of the two.
    pub fn mul(&self, other: &PadicExponent) -> PadicExponent {
        let value = &self.value * &other.value;
        match (self.precision, other.precision) {
            (None, None) => PadicExponent { p: self.p, value, precision: None },
            (Some(k), None) | (None, Some(k)) => PadicExponent::residue(self.p, value, k),
            (Some(a), Some(b)) => PadicExponent::residue(self.p, value, a.min(b)),
        }
    }

    pub fn pow(&self, e: u32) -> PadicExponent {
        let mut acc = PadicExponent { p: self.p, value: BigUint::one(), precision: None };
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn reduce(&self, ring: Zpn) -> PScalar {
        PScalar::from_raw(ring, ring.from_biguint(&self.value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, n: u32) -> Zpn {
        Zpn::new(p, n).unwrap()
    }

    #[test]
    fn inverse_examples() {
        let r = ring(5, 2);
        assert_eq!(scalar_inverse(&PScalar::new(r, 1)).unwrap().value(), 1);
        let inv7 = scalar_inverse(&PScalar::new(r, 7)).unwrap();
        assert_eq!(inv7.value(), 18);
        assert_eq!(7 * 18 % 25, 1);
        let r3 = ring(3, 2);
        assert_eq!(scalar_inverse(&PScalar::new(r3, 3)), Err(Error::NonUnit(3)));
    }

    #[test]
    fn teichmueller_examples() {
        let r = ring(5, 2);
        assert_eq!(teichmueller_lift(1, r).unwrap().value(), 1);
        assert_eq!(teichmueller_lift(2, r).unwrap().value(), 7);
        assert_eq!(teichmueller_lift(2, ring(3, 2)).unwrap().value(), 8);
        assert!(matches!(teichmueller_lift(5, r), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn teichmueller_roots_of_unity() {
        for p in [3u64, 5, 7, 11, 13] {
            let r = ring(p, 10);
            for a in 1..p {
                let w = teichmueller_lift(a, r).unwrap();
                assert_eq!(w.value() % p, a);
                assert_eq!(w.pow(p - 1).value(), 1);
                let big = teichmueller_lift_big(a, p, 10).unwrap();
                assert_eq!(big.to_u64().unwrap(), w.value());
            }
        }
    }

    #[test]
    fn mixed_precision_is_rejected() {
        let a = PScalar::new(ring(5, 2), 3);
        let b = PScalar::new(ring(5, 3), 3);
        assert!(matches!(a.add(&b), Err(Error::RingMismatch(_))));
        assert!(matches!(a.mul(&b), Err(Error::RingMismatch(_))));
    }

    #[test]
    fn rejects_bad_primes() {
        assert!(Zpn::new(2, 3).is_err());
        assert!(Zpn::new(9, 3).is_err());
        assert!(Zpn::new(5, 0).is_err());
        assert!(Zpn::new(13, 16).is_ok());
    }

    #[test]
    fn parse_signed_decimal() {
        let r = ring(3, 2);
        assert_eq!(r.parse_decimal("-1").unwrap(), 8);
        assert_eq!(r.parse_decimal("123456789012345678901234567890").unwrap(), {
            let big = BigUint::parse_bytes(b"123456789012345678901234567890", 10).unwrap();
            (big % BigUint::from(9u32)).to_u64().unwrap()
        });
        assert!(r.parse_decimal("1.5").is_err());
        assert!(r.parse_decimal("").is_err());
    }

    #[test]
    fn exponent_digits() {
        let e = PadicExponent::integer(3, 8);
        assert_eq!(e.digits(), vec![2, 2]);
        let r = PadicExponent::residue(3, BigUint::from(8u32), 4);
        assert_eq!(r.digits(), vec![2, 2, 0, 0]);
    }

    proptest::proptest! {
        #[test]
        fn inverse_is_involutive(a in 1u64..1_000_000, p in proptest::sample::select(vec![3u64, 5, 7, 11])) {
            let r = ring(p, 8);
            proptest::prop_assume!(a % p != 0);
            let x = PScalar::new(r, a as i64);
            let y = x.inverse().unwrap();
            proptest::prop_assert_eq!(y.inverse().unwrap(), x);
            proptest::prop_assert_eq!(x.mul(&y).unwrap().value(), 1);
        }
    }
}
