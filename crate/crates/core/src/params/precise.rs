// Arbitrary-precision tie breakers for the float parameter checks.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::Rational;

const FIXED_BITS: u64 = 320;

/// Exact decision of `k <= (1 - H_q(a/b)) m`.
///
/// Raising `q^{m H_q(a/b)} <= q^{m-k}` to the power `b` clears every logarithm:
/// `((q-1) b)^{am} * b^{(b-a)m} <= q^{b(m-k)} * a^{am} * (b-a)^{(b-a)m}`.
pub fn gv_holds_exact(q: u32, k: u32, m: u32, delta: Rational) -> bool {
    if k > m {
        return false;
    }
    let (a, b) = (*delta.numer(), *delta.denom());
    if a == 0 {
        return true;
    }
    let big = |x: u64| BigUint::from(x);
    let pow = |base: u64, e: u64| -> BigUint {
        num_traits::pow::pow(big(base), e as usize)
    };
    let (m, k, q) = (m as u64, k as u64, q as u64);
    let lhs = pow((q - 1) * b, a * m) * pow(b, (b - a) * m);
    let rhs = pow(q, b * (m - k)) * pow(a, a * m) * pow(b - a, (b - a) * m);
    lhs <= rhs
}

/// `ln n` as a fixed-point integer scaled by `2^bits`, accurate to a few ulps.
pub fn ln_fixed(n: u64, bits: u64) -> BigInt {
    assert!(n >= 1);
    let e = 63 - n.leading_zeros() as u64;
    // ln n = e ln 2 + ln(n / 2^e), n / 2^e in [1, 2)
    let ln2 = atanh_fixed(BigInt::one(), BigInt::from(3u32), bits) * 2;
    let num = BigInt::from(n - (1u64 << e));
    let den = BigInt::from(n + (1u64 << e));
    let frac = atanh_fixed(num, den, bits) * 2;
    ln2 * BigInt::from(e) + frac
}

// atanh(num/den) * 2^bits for 0 <= num/den <= 1/3
fn atanh_fixed(num: BigInt, den: BigInt, bits: u64) -> BigInt {
    let guard = 16;
    let scale = BigInt::one() << (bits + guard);
    let z = (&num << (bits + guard)) / &den;
    let z2 = (&z * &z) >> (bits + guard);
    let mut power = z;
    let mut sum = BigInt::zero();
    let mut i = 0u64;
    while !power.is_zero() {
        sum += &power / BigInt::from(2 * i + 1);
        power = (&power * &z2) >> (bits + guard);
        i += 1;
    }
    debug_assert!(sum.abs() < scale);
    sum >> guard
}

/// Exact-enough decision of `r^2 ln n >= n` using a 320-bit natural log.
pub fn trivial_branch_exact(n: u64, r: u64) -> bool {
    let lhs = ln_fixed(n, FIXED_BITS) * BigInt::from(r) * BigInt::from(r);
    let rhs = BigInt::from(n) << FIXED_BITS;
    lhs >= rhs
}
