//! Arithmetic in prime fields F_p with `p < 2^32`.
//!
//! Elements are plain `u32` values in `[0, p)`; the field carries only the
//! modulus and is `Copy`, so vectors and matrices store it by value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    /// Builds F_p, rejecting composite or out-of-range moduli.
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 || p > u32::MAX as u64 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p: p as u32 })
    }

    #[inline]
    pub fn modulus(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u32 {
        (x % self.p as u64) as u32
    }

    /// Maps a signed integer into the field.
    pub fn from_i64(&self, x: i64) -> u32 {
        x.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        let p = self.p as u64;
        (if s >= p { s - p } else { s }) as u32
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            (a as u64 + self.p as u64 - b as u64) as u32
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// `acc + a*b`, reduced.
    #[inline]
    pub fn mul_add(&self, acc: u32, a: u32, b: u32) -> u32 {
        ((acc as u64 + a as u64 * b as u64) % self.p as u64) as u32
    }

    /// `acc - a*b`, reduced.
    #[inline]
    pub fn mul_sub(&self, acc: u32, a: u32, b: u32) -> u32 {
        self.sub(acc, self.mul(a, b))
    }

    /// Inverse via the extended Euclidean algorithm.
    pub fn inv(&self, a: u32) -> Result<u32> {
        let a = a % self.p;
        if a == 0 {
            return Err(Error::DivisionByZero(self.p as u64));
        }
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.from_i64(t0))
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a % self.p;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

impl TryFrom<u64> for PrimeField {
    type Error = Error;

    fn try_from(p: u64) -> Result<Self> {
        PrimeField::new(p)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.p as u64
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_mod_7() {
        let f = PrimeField::new(7).unwrap();
        // brute-force oracle
        let oracle = (1..7u32).find(|x| (3 * x) % 7 == 1).unwrap();
        assert_eq!(oracle, 5);
        assert_eq!(f.inv(3).unwrap(), 5);
        for a in 1..7 {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn wraparound_and_identity() {
        let f7 = PrimeField::new(7).unwrap();
        assert_eq!(f7.add(6, 1), 0);
        assert_eq!(f7.sub(0, 1), 6);
        assert_eq!(f7.neg(3), 4);
        let f2 = PrimeField::new(2).unwrap();
        assert_eq!(f2.mul(1, 1), 1);
    }

    #[test]
    fn zero_has_no_inverse() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.inv(0), Err(Error::DivisionByZero(7)));
    }

    #[test]
    fn rejects_composites() {
        assert!(PrimeField::new(12).is_err());
        assert!(PrimeField::new(1).is_err());
        assert!(PrimeField::new(4294967291).is_ok());
    }

    #[test]
    fn large_modulus_mul_add_does_not_overflow() {
        let f = PrimeField::new(4294967291).unwrap();
        let m = f.modulus() - 1;
        assert_eq!(f.mul_add(m, m, m), f.add(m, f.mul(m, m)));
    }
}
