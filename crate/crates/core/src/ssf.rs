//! Strongly-selective families from codes, and their verifiers.
//!
//! Item `i` (1-based) is mapped to the codeword of message `i - 1`; for each
//! position `p` and letter `v` the test `s_{p,v}` collects the items whose
//! codeword has `v` at `p`. Empty tests are dropped.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GtError, Result};
use crate::gvcode::GeneratorMatrix;

/// Default cap on elementary checks for [`verify_ssf`].
pub const DEFAULT_SSF_BUDGET: u128 = 1_000_000_000;

/// A family of tests over items `1..=n`, claimed selective of strength `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    n: u64,
    r: u64,
    tests: Vec<Vec<u64>>,
}

impl Scheme {
    /// Validates indices and sorts each test; test order is kept.
    pub fn new(n: u64, r: u64, mut tests: Vec<Vec<u64>>) -> Result<Self> {
        for (idx, t) in tests.iter_mut().enumerate() {
            t.sort_unstable();
            if t.windows(2).any(|w| w[0] == w[1]) {
                return Err(GtError::usage(format!("test {} repeats an item", idx + 1)));
            }
            if let Some(&bad) = t.iter().find(|&&x| x == 0 || x > n) {
                return Err(GtError::usage(format!(
                    "test {} has item {bad} outside [1, {n}]",
                    idx + 1
                )));
            }
        }
        Ok(Scheme { n, r, tests })
    }

    /// The `n` singleton tests `{1}, ..., {n}`.
    pub fn singletons(n: u64) -> Self {
        Scheme {
            n,
            r: n,
            tests: (1..=n).map(|i| vec![i]).collect(),
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn strength(&self) -> u64 {
        self.r
    }

    pub fn with_strength(mut self, r: u64) -> Self {
        self.r = r;
        self
    }

    pub fn num_tests(&self) -> usize {
        self.tests.len()
    }

    pub fn tests(&self) -> &[Vec<u64>] {
        &self.tests
    }

    /// Total incidence `sum |test|`.
    pub fn total_size(&self) -> u64 {
        self.tests.iter().map(|t| t.len() as u64).sum()
    }

    /// For each item (index `i - 1`), the ascending list of tests containing it.
    pub fn memberships(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.n as usize];
        for (t, test) in self.tests.iter().enumerate() {
            for &x in test {
                out[(x - 1) as usize].push(t as u32);
            }
        }
        out
    }
}

/// Builds the family `{s_{p,v}}` from the first `n` codewords, ordered by `(p, v)`.
pub fn reduce_code(g: &GeneratorMatrix, n: u64) -> Result<Scheme> {
    let params = g.params();
    if n == 0 || n > params.num_messages() {
        return Err(GtError::usage(format!(
            "n = {n} must be in [1, q^k = {}]",
            params.num_messages()
        )));
    }
    let (m, k, q) = (g.rows(), g.cols(), params.q as usize);
    let f = g.field();
    let mut buckets: Vec<Vec<u64>> = vec![Vec::new(); m * q];
    // messages in lexicographic order, digits kept as a base-q counter
    let mut digits = vec![0u32; k];
    for item in 1..=n {
        for p in 0..m {
            let row = g.row(p);
            let v = row
                .iter()
                .zip(&digits)
                .fold(0u32, |acc, (&a, &y)| f.add_raw(acc, f.mul_raw(a, y)));
            buckets[p * q + v as usize].push(item);
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < params.q {
                break;
            }
            *d = 0;
        }
    }
    let tests = buckets.into_iter().filter(|b| !b.is_empty()).collect();
    Ok(Scheme {
        n,
        r: params.ssf_strength() as u64,
        tests,
    })
}

/// Result of an exhaustive or sampled selectivity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum SsfVerdict {
    Valid,
    /// `item` is not selected from `set` (both 1-based, `set` sorted).
    Violation { set: Vec<u64>, item: u64 },
    Unverified { required: u128, budget: u128 },
}

impl SsfVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, SsfVerdict::Valid)
    }
}

fn binomial_u128(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc == u128::MAX {
            break;
        }
    }
    acc
}

struct Bitsets {
    words: usize,
    bits: Vec<u64>,
}

impl Bitsets {
    fn new(s: &Scheme) -> Self {
        let words = s.num_tests().div_ceil(64).max(1);
        let mut bits = vec![0u64; words * s.n as usize];
        for (t, test) in s.tests.iter().enumerate() {
            for &x in test {
                bits[(x - 1) as usize * words + t / 64] |= 1 << (t % 64);
            }
        }
        Bitsets { words, bits }
    }

    fn of(&self, item: usize) -> &[u64] {
        &self.bits[item * self.words..(item + 1) * self.words]
    }
}

/// Exhaustive check that every `x` in every `A` with `|A| <= r` is selected.
///
/// Enumerates, for each `x`, the sets `S` of at most `r - 1` other items in
/// lexicographic depth-first order while maintaining the union of their tests,
/// so every size up to `r` is covered. Parallel over `x`; the reported
/// violation is the one with the smallest `x`, independent of thread count.
pub fn verify_ssf(s: &Scheme, r: u64, budget: u128) -> SsfVerdict {
    let n = s.n;
    let r = r.min(n);
    if r == 0 || n == 0 {
        return SsfVerdict::Valid;
    }
    let required = binomial_u128(n, r)
        .saturating_mul(r as u128)
        .saturating_mul(s.num_tests().max(1) as u128);
    if required > budget {
        return SsfVerdict::Unverified { required, budget };
    }
    let sets = Bitsets::new(s);
    let violation = (0..n as usize)
        .into_par_iter()
        .find_map_first(|x| find_violation(&sets, n as usize, r as usize, x));
    match violation {
        None => SsfVerdict::Valid,
        Some((mut set, x)) => {
            set.push(x);
            set.sort_unstable();
            SsfVerdict::Violation {
                set: set.into_iter().map(|i| i as u64 + 1).collect(),
                item: x as u64 + 1,
            }
        }
    }
}

fn selected(own: &[u64], union: &[u64]) -> bool {
    own.iter().zip(union).any(|(a, u)| a & !u != 0)
}

// DFS over S (items != x, ascending) with |S| <= depth - 1.
fn find_violation(sets: &Bitsets, n: usize, r: usize, x: usize) -> Option<(Vec<usize>, usize)> {
    let own = sets.of(x);
    let words = sets.words;
    if !selected(own, &vec![0; words]) {
        return Some((Vec::new(), x));
    }
    let max_extra = r - 1;
    if max_extra == 0 {
        return None;
    }
    let mut stack: Vec<usize> = Vec::with_capacity(max_extra);
    let mut unions: Vec<Vec<u64>> = vec![vec![0; words]; max_extra + 1];
    let mut next = 0usize;
    loop {
        let candidate = (next..n).find(|&y| y != x);
        match candidate {
            Some(y) if stack.len() < max_extra => {
                let depth = stack.len();
                let (lower, upper) = unions.split_at_mut(depth + 1);
                for ((u, prev), b) in upper[0].iter_mut().zip(&lower[depth]).zip(sets.of(y)) {
                    *u = prev | b;
                }
                if !selected(own, &unions[depth + 1]) {
                    stack.push(y);
                    return Some((stack, x));
                }
                // descend while there is room, otherwise try the next sibling
                if stack.len() + 1 < max_extra {
                    stack.push(y);
                }
                next = y + 1;
            }
            _ => {
                let y = stack.pop()?;
                next = y + 1;
            }
        }
    }
}

/// Checks `trials` random `(A, x)` pairs with `|A| = min(r, n)`; sound for
/// rejection, probabilistic for acceptance.
pub fn verify_ssf_sampled(s: &Scheme, r: u64, trials: u64, seed: u64) -> SsfVerdict {
    let n = s.n as usize;
    let r = (r as usize).min(n);
    if r == 0 {
        return SsfVerdict::Valid;
    }
    let sets = Bitsets::new(s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut union = vec![0u64; sets.words];
    for _ in 0..trials {
        let mut set: Vec<usize> = sample(&mut rng, n, r).into_vec();
        set.sort_unstable();
        let x = set[rng.gen_range(0..r)];
        union.iter_mut().for_each(|u| *u = 0);
        for &y in set.iter().filter(|&&y| y != x) {
            for (u, b) in union.iter_mut().zip(sets.of(y)) {
                *u |= b;
            }
        }
        if !selected(sets.of(x), &union) {
            return SsfVerdict::Violation {
                set: set.into_iter().map(|i| i as u64 + 1).collect(),
                item: x as u64 + 1,
            };
        }
    }
    SsfVerdict::Valid
}
