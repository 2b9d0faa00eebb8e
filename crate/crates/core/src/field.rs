//! Arithmetic over prime fields `F_q`.
//!
//! [`PrimeField`] carries the modulus and, for `q <= 2^16`, a table of
//! multiplicative inverses. The raw `u32` helpers are what the construction
//! loops use; [`FieldElement`] is the checked, self-describing value type.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{GtError, Result};

const INVERSE_TABLE_LIMIT: u32 = 1 << 16;
const MAX_MODULUS: u32 = 1 << 31;

#[derive(Clone)]
pub struct PrimeField {
    q: u32,
    inverses: Arc<[u32]>,
}

impl PrimeField {
    /// Builds `F_q`, rejecting composite or out-of-range moduli.
    pub fn new(q: u32) -> Result<Self> {
        if q >= MAX_MODULUS {
            return Err(GtError::usage(format!("modulus {q} exceeds 2^31")));
        }
        if !is_prime(q as u64) {
            return Err(GtError::usage(format!("modulus {q} is not prime")));
        }
        let inverses: Arc<[u32]> = if q <= INVERSE_TABLE_LIMIT {
            let mut table = vec![0u32; q as usize];
            for a in 1..q {
                table[a as usize] = inverse_euclid(a, q);
            }
            table.into()
        } else {
            Arc::from(Vec::new())
        };
        Ok(PrimeField { q, inverses })
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn element(&self, value: u64) -> FieldElement {
        FieldElement {
            value: (value % self.q as u64) as u32,
            q: self.q,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.element(0)
    }

    pub fn one(&self) -> FieldElement {
        self.element(1)
    }

    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        (0..self.q).map(move |v| FieldElement { value: v, q: self.q })
    }

    #[inline]
    pub fn add_raw(&self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        let q = self.q as u64;
        (if s >= q { s - q } else { s }) as u32
    }

    #[inline]
    pub fn sub_raw(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            self.q - (b - a)
        }
    }

    #[inline]
    pub fn neg_raw(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    #[inline]
    pub fn mul_raw(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.q as u64) as u32
    }

    /// Inverse of a nonzero canonical residue. Panics on zero; use
    /// [`FieldElement::inv`] for the checked form.
    #[inline]
    pub fn inv_raw(&self, a: u32) -> u32 {
        assert!(a != 0 && a < self.q, "inverse of {a} in GF({})", self.q);
        if self.inverses.is_empty() {
            inverse_euclid(a, self.q)
        } else {
            self.inverses[a as usize]
        }
    }
}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({})", self.q)
    }
}

impl PartialEq for PrimeField {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
    }
}

impl Eq for PrimeField {}

/// A canonical residue in `[0, q)` tagged with its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    q: u32,
}

impl FieldElement {
    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.q
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    fn same_field(self, other: Self) -> Result<()> {
        if self.q != other.q {
            return Err(GtError::usage(format!(
                "mixed-field operands GF({}) and GF({})",
                self.q, other.q
            )));
        }
        Ok(())
    }

    pub fn try_add(self, other: Self) -> Result<Self> {
        self.same_field(other)?;
        let s = (self.value as u64 + other.value as u64) % self.q as u64;
        Ok(FieldElement { value: s as u32, q: self.q })
    }

    pub fn try_sub(self, other: Self) -> Result<Self> {
        self.same_field(other)?;
        self.try_add(-other)
    }

    pub fn try_mul(self, other: Self) -> Result<Self> {
        self.same_field(other)?;
        let p = (self.value as u64 * other.value as u64) % self.q as u64;
        Ok(FieldElement { value: p as u32, q: self.q })
    }

    pub fn inv(self) -> Result<Self> {
        if self.value == 0 {
            return Err(GtError::Domain(format!("zero has no inverse in GF({})", self.q)));
        }
        Ok(FieldElement {
            value: inverse_euclid(self.value, self.q),
            q: self.q,
        })
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

// Operator forms panic on mixed fields; the `try_*` methods report it instead.
impl Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).expect("field mismatch")
    }
}

impl Sub for FieldElement {
    type Output = FieldElement;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(rhs).expect("field mismatch")
    }
}

impl Mul for FieldElement {
    type Output = FieldElement;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(rhs).expect("field mismatch")
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> Self {
        let value = if self.value == 0 { 0 } else { self.q - self.value };
        FieldElement { value, q: self.q }
    }
}

fn inverse_euclid(a: u32, q: u32) -> u32 {
    let (mut old_r, mut r) = (a as i64, q as i64);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(q as i64) as u32
}

/// Deterministic trial division; adequate for the moduli used here (< 2^31).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) || n.is_multiple_of(3) {
        return false;
    }
    let mut d = 5u64;
    while d * d <= n {
        if n.is_multiple_of(d) || n.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// Smallest prime `p` with `lo <= p < hi`.
pub fn smallest_prime_in(lo: u64, hi: u64) -> Result<u64> {
    if lo < 2 || hi <= lo {
        return Err(GtError::usage(format!("invalid prime interval [{lo}, {hi})")));
    }
    (lo..hi)
        .find(|&p| is_prime(p))
        .ok_or(GtError::NoPrime { lo, hi })
}
