//! Arithmetic in prime fields `F_p` with `p` an odd prime below `2^31`.
//!
//! Hot paths (matrices, elimination) work on raw `u32` residues through the
//! methods on [`Prime`]; [`FieldElement`] carries its modulus and checks it on
//! every binary operation.

use std::fmt;

use crate::error::{Error, Result};

/// An odd prime modulus `3 <= p < 2^31`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u64) -> Result<Self> {
        if !(3..1 << 31).contains(&p) || !is_prime(p) {
            return Err(Error::InvalidModulus(p));
        }
        Ok(Prime(p as u32))
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.0
    }

    /// Canonical residue of a signed integer.
    #[inline]
    pub fn reduce(self, x: i64) -> u32 {
        x.rem_euclid(self.0 as i64) as u32
    }

    #[inline]
    pub fn reduce_u64(self, x: u64) -> u32 {
        (x % self.0 as u64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.0 - b
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.0 as u64) as u32
    }

    pub fn pow(self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1 % self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse via the extended Euclidean algorithm.
    pub fn inv(self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::DivisionByZero);
        }
        let (mut r0, mut r1) = (self.0 as i64, a as i64);
        let (mut s0, mut s1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.reduce(s0))
    }

    pub fn element(self, value: i64) -> FieldElement {
        FieldElement {
            value: self.reduce(value),
            modulus: self,
        }
    }

    /// Parses a decimal residue, rejecting values outside `[0, p)`.
    pub fn parse_element(self, s: &str) -> Option<FieldElement> {
        let v: u64 = s.trim().parse().ok()?;
        (v < self.0 as u64).then_some(FieldElement {
            value: v as u32,
            modulus: self,
        })
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller–Rabin over the first twelve primes (exact for all `u64`).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in WITNESSES {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A canonical residue `0 <= value < p` tagged with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    modulus: Prime,
}

impl FieldElement {
    pub fn new(value: i64, modulus: Prime) -> Self {
        modulus.element(value)
    }

    pub fn zero(modulus: Prime) -> Self {
        FieldElement { value: 0, modulus }
    }

    pub fn one(modulus: Prime) -> Self {
        FieldElement { value: 1, modulus }
    }

    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> Prime {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn check(self, other: FieldElement) -> Result<Prime> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.value(),
                other.modulus.value(),
            ));
        }
        Ok(self.modulus)
    }

    fn with(self, value: u32) -> Self {
        FieldElement {
            value,
            modulus: self.modulus,
        }
    }

    pub fn checked_add(self, other: FieldElement) -> Result<FieldElement> {
        let p = self.check(other)?;
        Ok(self.with(p.add(self.value, other.value)))
    }

    pub fn checked_sub(self, other: FieldElement) -> Result<FieldElement> {
        let p = self.check(other)?;
        Ok(self.with(p.sub(self.value, other.value)))
    }

    pub fn checked_mul(self, other: FieldElement) -> Result<FieldElement> {
        let p = self.check(other)?;
        Ok(self.with(p.mul(self.value, other.value)))
    }

    pub fn inv(self) -> Result<FieldElement> {
        Ok(self.with(self.modulus.inv(self.value)?))
    }

    /// `self^e`; a negative exponent inverts first.
    pub fn pow(self, e: i64) -> Result<FieldElement> {
        let base = if e < 0 { self.inv()?.value } else { self.value };
        Ok(self.with(self.modulus.pow(base, e.unsigned_abs())))
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;

    fn neg(self) -> FieldElement {
        self.with(self.modulus.neg(self.value))
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f7(v: i64) -> FieldElement {
        FieldElement::new(v, Prime::new(7).unwrap())
    }

    #[test]
    fn prime_validation() {
        assert!(Prime::new(4).is_err());
        assert!(Prime::new(2).is_err());
        assert!(Prime::new(1).is_err());
        assert!(Prime::new(9).is_err());
        assert!(Prime::new(1 << 31).is_err());
        assert_eq!(Prime::new(7).unwrap().value(), 7);
        assert!(Prime::new(2_147_483_647).is_ok());
        // strong pseudoprime to bases 2, 3, 5
        assert!(Prime::new(25_326_001).is_err());
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..20_000u64 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
    }

    #[test]
    fn add_examples() {
        assert_eq!(f7(3).checked_add(f7(5)).unwrap().value(), 1);
        assert_eq!(f7(0).checked_add(f7(6)).unwrap(), f7(6));
        assert_eq!(f7(4).checked_add(f7(3)).unwrap().value(), 0);
    }

    #[test]
    fn mul_examples() {
        assert_eq!(f7(3).checked_mul(f7(5)).unwrap().value(), 1);
        assert_eq!(f7(1).checked_mul(f7(4)).unwrap(), f7(4));
        assert_eq!(f7(0).checked_mul(f7(4)).unwrap().value(), 0);
    }

    #[test]
    fn modulus_mismatch_is_an_error() {
        let a = f7(3);
        let b = FieldElement::new(3, Prime::new(5).unwrap());
        assert_eq!(a.checked_add(b), Err(Error::ModulusMismatch(7, 5)));
        assert_eq!(a.checked_mul(b), Err(Error::ModulusMismatch(7, 5)));
    }

    #[test]
    fn inverse_examples() {
        // brute-force oracle
        let brute = (1..7).find(|x| (3 * x) % 7 == 1).unwrap();
        assert_eq!(brute, 5);
        assert_eq!(f7(3).inv().unwrap().value(), brute as u32);
        assert_eq!(f7(1).inv().unwrap().value(), 1);
        assert_eq!(f7(6).inv().unwrap().value(), 6);
        assert_eq!(f7(0).inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn pow_examples() {
        assert_eq!(f7(3).pow(6).unwrap().value(), 1);
        assert_eq!(f7(4).pow(0).unwrap().value(), 1);
        assert_eq!(f7(0).pow(0).unwrap().value(), 1);
        assert_eq!(f7(3).pow(-1).unwrap().value(), 5);
        assert_eq!(f7(0).pow(-2), Err(Error::DivisionByZero));
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for p in [5u64, 7] {
            let q = Prime::new(p).unwrap();
            let all: Vec<_> = (0..p as i64).map(|v| q.element(v)).collect();
            for &a in &all {
                for &b in &all {
                    assert_eq!(a.checked_add(b).unwrap(), b.checked_add(a).unwrap());
                    assert_eq!(a.checked_mul(b).unwrap(), b.checked_mul(a).unwrap());
                    for &c in &all {
                        assert_eq!(
                            a.checked_add(b).unwrap().checked_add(c).unwrap(),
                            a.checked_add(b.checked_add(c).unwrap()).unwrap()
                        );
                        assert_eq!(
                            a.checked_mul(b).unwrap().checked_mul(c).unwrap(),
                            a.checked_mul(b.checked_mul(c).unwrap()).unwrap()
                        );
                        assert_eq!(
                            a.checked_mul(b.checked_add(c).unwrap()).unwrap(),
                            a.checked_mul(b).unwrap().checked_add(a.checked_mul(c).unwrap()).unwrap()
                        );
                    }
                }
                assert!(a.checked_add(-a).unwrap().is_zero());
                if !a.is_zero() {
                    assert_eq!(a.checked_mul(a.inv().unwrap()).unwrap().value(), 1);
                }
            }
        }
    }

    fn prime_strategy() -> impl Strategy<Value = Prime> {
        prop::sample::select(vec![3u64, 5, 101, 65_521, 1_000_003, 2_147_483_647])
            .prop_map(|p| Prime::new(p).unwrap())
    }

    proptest! {
        #[test]
        fn field_axioms_random(p in prime_strategy(), a in any::<i64>(), b in any::<i64>(), c in any::<i64>()) {
            let (a, b, c) = (p.element(a), p.element(b), p.element(c));
            prop_assert_eq!(a.checked_add(b)?.checked_add(c)?, a.checked_add(b.checked_add(c)?)?);
            prop_assert_eq!(a.checked_mul(b)?.checked_mul(c)?, a.checked_mul(b.checked_mul(c)?)?);
            prop_assert_eq!(a.checked_mul(b.checked_add(c)?)?, a.checked_mul(b)?.checked_add(a.checked_mul(c)?)?);
            prop_assert_eq!(a.checked_sub(b)?.checked_add(b)?, a);
        }

        #[test]
        fn inverse_is_involutive(p in prime_strategy(), a in any::<i64>()) {
            let a = p.element(a);
            prop_assume!(!a.is_zero());
            prop_assert_eq!(a.inv()?.inv()?, a);
            prop_assert_eq!(a.pow(-3)?.checked_mul(a.pow(3)?)?.value(), 1);
        }

        #[test]
        fn fermat(p in prime_strategy(), a in any::<i64>()) {
            let a = p.element(a);
            prop_assume!(!a.is_zero());
            prop_assert_eq!(a.pow(p.value() as i64 - 1)?.value(), 1);
        }
    }
}
