//! Exact scalar arithmetic over GF(p) and the rationals.
//!
//! Every scalar carries its field so that values can be mixed freely inside
//! one computation; mixing values from different fields is a logic error and
//! panics. Canonical forms (residue in `0..p` resp. reduced fraction with
//! positive denominator) make equality and hashing structural.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SegreError};

/// The base field: a prime field GF(p) with `2 <= p < 2^31`, or Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldSpec {
    Prime(u64),
    Rational,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `>= n`, for "field too small" diagnostics.
pub fn next_prime_at_least(n: u64) -> u64 {
    let mut c = n.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}

impl FieldSpec {
    pub fn prime(p: u64) -> Result<Self> {
        if p >= 1 << 31 || !is_prime(p) {
            return Err(SegreError::NotPrime(p));
        }
        Ok(FieldSpec::Prime(p))
    }

    pub fn rational() -> Self {
        FieldSpec::Rational
    }

    pub fn zero(&self) -> Scalar {
        match self {
            FieldSpec::Prime(p) => Scalar::Fp { value: 0, p: *p },
            FieldSpec::Rational => Scalar::Rat(BigRational::zero()),
        }
    }

    pub fn one(&self) -> Scalar {
        match self {
            FieldSpec::Prime(p) => Scalar::Fp { value: 1, p: *p },
            FieldSpec::Rational => Scalar::Rat(BigRational::one()),
        }
    }

    pub fn from_int(&self, n: i64) -> Scalar {
        match self {
            FieldSpec::Prime(p) => {
                let p = *p;
                let v = n.rem_euclid(p as i64) as u64;
                Scalar::Fp { value: v, p }
            }
            FieldSpec::Rational => Scalar::Rat(BigRational::from_integer(BigInt::from(n))),
        }
    }

    /// Prime modulus, if this is a finite field.
    pub fn modulus(&self) -> Option<u64> {
        match self {
            FieldSpec::Prime(p) => Some(*p),
            FieldSpec::Rational => None,
        }
    }

    pub fn is_prime_field(&self) -> bool {
        matches!(self, FieldSpec::Prime(_))
    }
}

impl std::fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldSpec::Prime(p) => write!(f, "GF({p})"),
            FieldSpec::Rational => write!(f, "Q"),
        }
    }
}

/// A canonical field element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scalar {
    Fp { value: u64, p: u64 },
    Rat(BigRational),
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    // p < 2^31, so the product fits in u64.
    (a * b) % p
}

fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    acc
}

impl Scalar {
    pub fn field(&self) -> FieldSpec {
        match self {
            Scalar::Fp { p, .. } => FieldSpec::Prime(*p),
            Scalar::Rat(_) => FieldSpec::Rational,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Fp { value, .. } => *value == 0,
            Scalar::Rat(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Fp { value, .. } => *value == 1,
            Scalar::Rat(r) => r.is_one(),
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Fp { value: a, p }, Scalar::Fp { value: b, p: q }) => {
                assert_eq!(p, q, "field mismatch");
                Scalar::Fp { value: (a + b) % p, p: *p }
            }
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
            _ => panic!("field mismatch"),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Fp { value: a, p }, Scalar::Fp { value: b, p: q }) => {
                assert_eq!(p, q, "field mismatch");
                Scalar::Fp { value: (a + p - b) % p, p: *p }
            }
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a - b),
            _ => panic!("field mismatch"),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Fp { value: a, p }, Scalar::Fp { value: b, p: q }) => {
                assert_eq!(p, q, "field mismatch");
                Scalar::Fp { value: mulmod(*a, *b, *p), p: *p }
            }
            (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
            _ => panic!("field mismatch"),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Fp { value, p } => Scalar::Fp { value: (p - value) % p, p: *p },
            Scalar::Rat(r) => Scalar::Rat(-r),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        match self {
            Scalar::Fp { value, p } => {
                if *value == 0 {
                    None
                } else {
                    Some(Scalar::Fp { value: powmod(*value, p - 2, *p), p: *p })
                }
            }
            Scalar::Rat(r) => {
                if r.is_zero() {
                    None
                } else {
                    Some(Scalar::Rat(r.recip()))
                }
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Scalar {
        self.mul(&other.inv().expect("division by zero"))
    }

    /// Canonical integer pair (numerator, denominator) for file output.
    /// GF(p) values return `(value, 1)`.
    pub fn to_int_pair(&self) -> (BigInt, BigInt) {
        match self {
            Scalar::Fp { value, .. } => (BigInt::from(*value), BigInt::one()),
            Scalar::Rat(r) => (r.numer().clone(), r.denom().clone()),
        }
    }

    /// Value as u64 residue; panics over the rationals.
    pub fn residue(&self) -> u64 {
        match self {
            Scalar::Fp { value, .. } => *value,
            Scalar::Rat(_) => panic!("residue() on a rational scalar"),
        }
    }

    pub fn from_rational(numer: i64, denom: i64) -> Scalar {
        assert!(denom != 0, "zero denominator");
        Scalar::Rat(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }
}

impl std::fmt::Display for Scalar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Scalar::Fp { value, .. } => write!(f, "{value}"),
            Scalar::Rat(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_check() {
        assert!(FieldSpec::prime(2).is_ok());
        assert!(FieldSpec::prime(5).is_ok());
        assert!(FieldSpec::prime(2147483647).is_ok()); // 2^31 - 1
        assert!(FieldSpec::prime(1).is_err());
        assert!(FieldSpec::prime(6).is_err());
        assert!(FieldSpec::prime(1 << 31).is_err());
    }

    #[test]
    fn fp_arithmetic() {
        let f = FieldSpec::prime(5).unwrap();
        let a = f.from_int(3);
        let b = f.from_int(4);
        assert_eq!(a.add(&b), f.from_int(2));
        assert_eq!(a.mul(&b), f.from_int(2));
        assert_eq!(a.sub(&b), f.from_int(4));
        assert_eq!(a.inv().unwrap(), f.from_int(2));
        assert_eq!(f.from_int(-1), f.from_int(4));
        assert!(f.zero().inv().is_none());
    }

    #[test]
    fn rational_arithmetic_is_canonical() {
        let x = Scalar::from_rational(2, 4);
        let y = Scalar::from_rational(1, 2);
        assert_eq!(x, y);
        let z = Scalar::from_rational(1, -2);
        assert_eq!(z.neg(), y);
        assert_eq!(y.add(&y), FieldSpec::rational().one());
    }

    #[test]
    fn inverse_roundtrip_all_residues() {
        let f = FieldSpec::prime(31).unwrap();
        for v in 1..31 {
            let s = f.from_int(v);
            assert!(s.mul(&s.inv().unwrap()).is_one());
        }
    }
}
