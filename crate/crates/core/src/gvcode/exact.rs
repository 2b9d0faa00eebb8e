// Exact binomial quantities for B(R, 1 - 1/q), scaled by q^R so they stay integral.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// `C(R, s) (q-1)^s` for `s = 0..=max_s` (clamped to `R`), i.e. `q^R Pr(X = s)`.
pub(crate) fn scaled_pmf_row(q: u32, trials: u64, max_s: u64) -> Vec<BigUint> {
    let top = max_s.min(trials);
    let mut row = Vec::with_capacity(top as usize + 1);
    let mut term = BigUint::one();
    row.push(term.clone());
    let qm1 = BigUint::from(q - 1);
    for s in 0..top {
        // C(R, s+1)(q-1)^{s+1} = C(R, s)(q-1)^s (R - s)(q-1) / (s + 1), exact
        term = term * BigUint::from(trials - s) * &qm1 / BigUint::from(s + 1);
        row.push(term.clone());
    }
    row
}

/// `q^R Pr(X < need)` for `X ~ B(R, 1 - 1/q)`.
pub fn q_ary_tail_numerator(q: u32, trials: u64, need: u64) -> BigUint {
    if need == 0 {
        return BigUint::zero();
    }
    scaled_pmf_row(q, trials, need - 1).into_iter().sum()
}

/// Memoized scaled tails keyed by `(trials, need)`.
#[derive(Default)]
pub(crate) struct TailCache {
    q: u32,
    map: HashMap<(u64, u64), BigUint>,
}

impl TailCache {
    pub(crate) fn new(q: u32) -> Self {
        TailCache { q, map: HashMap::new() }
    }

    pub(crate) fn get(&mut self, trials: u64, need: u64) -> &BigUint {
        let q = self.q;
        self.map
            .entry((trials, need))
            .or_insert_with(|| q_ary_tail_numerator(q, trials, need))
    }
}
