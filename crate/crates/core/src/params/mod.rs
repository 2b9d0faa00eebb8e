//! Code and scheme parameters.
//!
//! The relative distance is always an exact rational. Float evaluation of the
//! Gilbert-Varshamov inequality and of the trivial-branch test falls back to
//! exact arithmetic whenever the two sides are within `1e-9` of each other.

mod binomial;
mod precise;

use std::fmt;

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{GtError, Result};
use crate::field::{is_prime, smallest_prime_in};

pub use binomial::{
    binom_tail_lt, binom_tail_lt_exact, LnFactorials, LogPmfTable,
};
pub use precise::{gv_holds_exact, ln_fixed, trivial_branch_exact};

/// Exact non-negative rational used for relative distances and thresholds.
pub type Rational = Ratio<u64>;

const MARGIN: f64 = 1e-9;

/// Parameters `(q, m, k, delta)` of a linear code over `F_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CodeParams {
    pub q: u32,
    pub m: u32,
    pub k: u32,
    pub delta: Rational,
}

impl CodeParams {
    /// Checks the structural invariants: `q` prime, `m >= k >= 1`,
    /// `0 <= delta <= 1 - 1/q`. The GV inequality is checked separately by
    /// [`CodeParams::satisfies_gv`] since some valid codes (e.g. short
    /// Reed-Solomon codes) sit above it.
    pub fn new(q: u32, m: u32, k: u32, delta: Rational) -> Result<Self> {
        if !is_prime(q as u64) {
            return Err(GtError::usage(format!("q = {q} is not prime")));
        }
        if k == 0 || m < k {
            return Err(GtError::usage(format!("need m >= k >= 1, got m = {m}, k = {k}")));
        }
        if delta > Rational::new(q as u64 - 1, q as u64) {
            return Err(GtError::usage(format!(
                "delta = {delta} exceeds 1 - 1/q = {}/{q}",
                q - 1
            )));
        }
        if q as u64 > u32::MAX as u64 || (q as f64).powi(k as i32) > u64::MAX as f64 {
            return Err(GtError::usage("q^k overflows"));
        }
        Ok(CodeParams { q, m, k, delta })
    }

    /// `q^k`, the number of messages.
    pub fn num_messages(&self) -> u64 {
        (self.q as u64).pow(self.k)
    }

    /// `delta * m` as an exact rational; a codeword is bad iff its weight is below this.
    pub fn threshold(&self) -> Rational {
        self.delta * Rational::from_integer(self.m as u64)
    }

    /// Smallest integer weight that is not bad, i.e. `ceil(delta * m)`.
    pub fn min_weight(&self) -> u32 {
        self.threshold().ceil().to_integer() as u32
    }

    pub fn satisfies_gv(&self) -> bool {
        gv_holds(self.q, self.k, self.m, self.delta)
    }

    /// Selection strength `ceil(1 / (1 - delta))` of the scheme reduced from this code.
    pub fn ssf_strength(&self) -> u32 {
        let (a, b) = (*self.delta.numer(), *self.delta.denom());
        if a == b {
            return u32::MAX;
        }
        Integer::div_ceil(&b, &(b - a)) as u32
    }
}

impl fmt::Display for CodeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "q={} m={} k={} delta={}/{}",
            self.q,
            self.m,
            self.k,
            self.delta.numer(),
            self.delta.denom()
        )
    }
}

/// Parameters for an `(n, r)` strongly-selective family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchemeParams {
    pub n: u64,
    pub r: u64,
    /// `None` on the singleton branch (`r^2 ln n >= n`).
    pub code: Option<CodeParams>,
}

impl SchemeParams {
    pub fn trivial(&self) -> bool {
        self.code.is_none()
    }

    /// Upper bound on the number of tests: `n` for singletons, `m*q` otherwise.
    pub fn t_bound(&self) -> u64 {
        match self.code {
            None => self.n,
            Some(c) => c.m as u64 * c.q as u64,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamsReport {
    pub n: u64,
    pub r: u64,
    pub trivial: bool,
    pub q: Option<u32>,
    pub k: Option<u32>,
    pub m: Option<u32>,
    pub delta: Option<String>,
    pub t_bound: u64,
    pub gv_rate_margin: Option<f64>,
}

impl From<&SchemeParams> for ParamsReport {
    fn from(p: &SchemeParams) -> Self {
        ParamsReport {
            n: p.n,
            r: p.r,
            trivial: p.trivial(),
            q: p.code.map(|c| c.q),
            k: p.code.map(|c| c.k),
            m: p.code.map(|c| c.m),
            delta: p.code.map(|c| format!("{}/{}", c.delta.numer(), c.delta.denom())),
            t_bound: p.t_bound(),
            gv_rate_margin: p.code.map(|c| bad_event_log_bound(&c) + c.k as f64),
        }
    }
}

/// q-ary entropy `H_q(p)`, with `H_q(0) = 0` by continuity.
pub fn entropy_q(q: u32, p: Rational) -> f64 {
    let pf = ratio_f64(p);
    entropy_q_f64(q, pf)
}

pub fn entropy_q_f64(q: u32, p: f64) -> f64 {
    let lnq = (q as f64).ln();
    let mut h = 0.0;
    if p > 0.0 {
        h += p * (((q - 1) as f64) / p).ln();
    }
    if p < 1.0 {
        h += (1.0 - p) * (1.0 / (1.0 - p)).ln();
    }
    h / lnq
}

pub(crate) fn ratio_f64(p: Rational) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

/// Decides `k <= (1 - H_q(delta)) * m`, exactly when the float sides are close.
pub fn gv_holds(q: u32, k: u32, m: u32, delta: Rational) -> bool {
    let lhs = k as f64;
    let rhs = (1.0 - entropy_q(q, delta)) * m as f64;
    if (lhs - rhs).abs() < MARGIN * rhs.abs().max(f64::MIN_POSITIVE) {
        return gv_holds_exact(q, k, m, delta);
    }
    lhs <= rhs
}

/// Decides `r^2 ln n >= n`, exactly when the float sides are close.
pub fn is_trivial_branch(n: u64, r: u64) -> bool {
    let lhs = (r as f64).powi(2) * (n as f64).ln();
    let rhs = n as f64;
    if (lhs - rhs).abs() < MARGIN * rhs {
        return trivial_branch_exact(n, r);
    }
    lhs >= rhs
}

/// Smallest `k` with `q^k >= n`.
pub fn message_length(q: u32, n: u64) -> u32 {
    let mut k = 0u32;
    let mut pow = 1u128;
    while pow < n as u128 {
        pow *= q as u128;
        k += 1;
    }
    k.max(1)
}

/// Smallest `m >= k` with `k <= (1 - H_q(delta)) m`.
pub fn minimal_length(q: u32, k: u32, delta: Rational) -> Result<u32> {
    let rate = 1.0 - entropy_q(q, delta);
    if delta >= Rational::new(q as u64 - 1, q as u64) || rate <= 0.0 {
        return Err(GtError::usage(format!(
            "delta = {delta} leaves no positive GV rate over GF({q})"
        )));
    }
    let guess = (k as f64 / rate).ceil();
    if guess > u32::MAX as f64 / 2.0 {
        return Err(GtError::usage("code length overflows"));
    }
    let mut m = (guess as u32).max(k);
    while m > k && gv_holds(q, k, m - 1, delta) {
        m -= 1;
    }
    while !gv_holds(q, k, m, delta) {
        m += 1;
    }
    Ok(m)
}

/// Parameters for an `(n, r)`-SSF: singletons when `r^2 ln n >= n`, otherwise
/// `delta = (r-1)/r`, `q` the smallest prime in `[2r, 4r)`, `k = ceil(log_q n)`
/// and the minimal GV length `m`.
pub fn derive_params(n: u64, r: u64) -> Result<SchemeParams> {
    if n < 2 {
        return Err(GtError::usage(format!("n must be at least 2, got {n}")));
    }
    if r == 0 || r > n {
        return Err(GtError::usage(format!("need 1 <= r <= n, got r = {r}, n = {n}")));
    }
    if is_trivial_branch(n, r) {
        return Ok(SchemeParams { n, r, code: None });
    }
    let delta = Rational::new(r - 1, r);
    let q = smallest_prime_in(2 * r, 4 * r)?;
    let q = u32::try_from(q).map_err(|_| GtError::usage("alphabet exceeds u32"))?;
    let k = message_length(q, n);
    let m = minimal_length(q, k, delta)?;
    let code = CodeParams::new(q, m, k, delta)?;
    Ok(SchemeParams { n, r, code: Some(code) })
}

/// `-m (1 - H_q(delta))`, the base-q log of the per-word bad-event bound.
pub fn bad_event_log_bound(params: &CodeParams) -> f64 {
    -(params.m as f64) * (1.0 - entropy_q(params.q, params.delta))
}
