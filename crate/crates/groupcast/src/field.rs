//! Prime-field arithmetic used by every other module.
//!
//! All quantities in this crate — key symbols, broadcast symbols, matrix
//! entries — live in GF(p) for a prime modulus p. Elements carry their
//! modulus with them so cross-field arithmetic is caught immediately instead
//! of producing silently wrong symbols.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Errors arising from field construction or arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    /// The requested modulus is not a prime number.
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    /// Division by zero / inversion of zero.
    #[error("zero has no multiplicative inverse in GF({0})")]
    ZeroInverse(u64),
}

/// A validated prime modulus. Construction checks primality, so any
/// `PrimeModulus` in circulation is known-good.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    /// Validates `p` by trial division. Moduli here are desk-scale (tens,
    /// not thousands of bits), so trial division is plenty.
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if is_prime(p) {
            Ok(PrimeModulus(p))
        } else {
            Err(FieldError::NotPrime(p))
        }
    }

    /// The raw modulus value.
    pub fn get(self) -> u64 {
        self.0
    }

    /// Reduces an unsigned integer into the field.
    pub fn element(self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.0,
            modulus: self,
        }
    }

    /// Reduces a signed integer into the field, mapping negatives to their
    /// canonical representatives (e.g. -1 ↦ p-1).
    pub fn element_from_i64(self, value: i64) -> FieldElement {
        let p = self.0 as i64;
        self.element(value.rem_euclid(p) as u64)
    }

    /// The additive identity.
    pub fn zero(self) -> FieldElement {
        self.element(0)
    }

    /// The multiplicative identity.
    pub fn one(self) -> FieldElement {
        self.element(1)
    }

    /// All field elements 0, 1, ..., p-1 in order.
    pub fn elements(self) -> impl Iterator<Item = FieldElement> {
        (0..self.0).map(move |v| self.element(v))
    }
}

impl<'de> Deserialize<'de> for PrimeModulus {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        let raw = u64::deserialize(deserializer)?;
        PrimeModulus::new(raw).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Deterministic primality by trial division; sufficient for the small
/// moduli this crate works with.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.checked_mul(d).map_or(false, |sq| sq <= n) {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// The smallest prime that is `>= n` (with `n = 0` and `n = 1` mapping to 2).
pub fn smallest_prime_at_least(n: u64) -> u64 {
    let mut candidate = n.max(2);
    while !is_prime(candidate) {
        candidate += 1;
    }
    candidate
}

/// An element of GF(p), stored as its canonical representative in `0..p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: PrimeModulus,
}

impl FieldElement {
    /// Canonical representative in `0..p`.
    pub fn value(self) -> u64 {
        self.value
    }

    /// The field this element belongs to.
    pub fn modulus(self) -> PrimeModulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// Multiplicative inverse via Fermat's little theorem (p is prime).
    pub fn inverse(self) -> Result<FieldElement, FieldError> {
        if self.value == 0 {
            return Err(FieldError::ZeroInverse(self.modulus.get()));
        }
        Ok(self.pow(self.modulus.get() - 2))
    }

    /// Exponentiation by squaring.
    pub fn pow(self, mut exp: u64) -> FieldElement {
        let p = self.modulus.get();
        let mut base = self.value as u128;
        let mut acc = 1u128;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc * base % p as u128;
            }
            base = base * base % p as u128;
            exp >>= 1;
        }
        self.modulus.element(acc as u64)
    }

    fn check_same_field(self, other: FieldElement) {
        assert_eq!(
            self.modulus, other.modulus,
            "mixed-field arithmetic: GF({}) vs GF({})",
            self.modulus, other.modulus
        );
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: FieldElement) -> FieldElement {
        self.check_same_field(rhs);
        let p = self.modulus.get();
        let mut v = self.value + rhs.value;
        if v >= p {
            v -= p;
        }
        self.modulus.element(v)
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: FieldElement) -> FieldElement {
        self.check_same_field(rhs);
        let p = self.modulus.get();
        let v = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.value + p - rhs.value
        };
        self.modulus.element(v)
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.check_same_field(rhs);
        let p = self.modulus.get() as u128;
        self.modulus
            .element((self.value as u128 * rhs.value as u128 % p) as u64)
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        if self.value == 0 {
            self
        } else {
            self.modulus.element(self.modulus.get() - self.value)
        }
    }
}

impl AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: FieldElement) {
        *self = *self + rhs;
    }
}

impl SubAssign for FieldElement {
    fn sub_assign(&mut self, rhs: FieldElement) {
        *self = *self - rhs;
    }
}

impl MulAssign for FieldElement {
    fn mul_assign(&mut self, rhs: FieldElement) {
        *self = *self * rhs;
    }
}
