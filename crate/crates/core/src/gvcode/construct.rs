//! Derandomized construction by conditional expectations.
//!
//! Entries are fixed row by row, left to right. At step `(i, j)` only the
//! messages whose last nonzero coordinate is `j` (block `B_j`) have their
//! row-`i` letter decided by the choice of `G[i, j]`; every other message's
//! conditional bad-event probability is unaffected. For a block message `y`
//! exactly one letter `v(y) = -y[j]^{-1} sum_{t<j} G[i,t] y[t]` makes
//! `(G y)[i]` vanish, and choosing it raises `Pr(bad)` by
//! `Dif = Pr(X = ceil(delta m) - c - 1)`, `X ~ B(m - i, 1 - 1/q)` with `i`
//! the 1-based row and `c` the nonvanishing count over rows `1..i-1`.
//! Subtracting `Dif` from `W[v(y)]` and taking the first maximum of `W`
//! therefore minimizes the conditional expectation of the bad-word count.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::exact::{scaled_pmf_row, TailCache};
use super::gray::GrayWalk;
use super::verify::verify_distance;
use super::GeneratorMatrix;
use crate::error::{GtError, Result};
use crate::field::PrimeField;
use crate::params::{CodeParams, LogPmfTable};

/// Default cap on `q^k` for exhaustive distance checks.
pub const DEFAULT_VERIFY_BUDGET: u64 = 1 << 24;

const MAX_MESSAGES: u64 = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Log-space float weights from a precomputed `ln C(a, b)` table.
    Fast,
    /// Exact big-integer weights.
    Exact,
}

impl FromStr for Mode {
    type Err = GtError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Mode::Fast),
            "exact" => Ok(Mode::Exact),
            other => Err(GtError::usage(format!("unknown mode {other:?}, expected fast|exact"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Fast => "fast",
            Mode::Exact => "exact",
        })
    }
}

// (remaining trials after row i, pmf index) for a 1-based row i and nonvanish count c
fn dif_index(params: &CodeParams, i: u32, c: u32) -> Option<(u64, u64)> {
    assert!(i >= 1 && i <= params.m, "row {i} outside 1..={}", params.m);
    assert!(c < i, "nonvanish count {c} exceeds determined rows {}", i - 1);
    let need = params.min_weight() as u64;
    if c as u64 >= need {
        return None;
    }
    let remaining = (params.m - i) as u64;
    let s = need - c as u64 - 1;
    (s <= remaining).then_some((remaining, s))
}

/// `Pr(bad | row-i letter vanishes) - Pr(bad | it does not)` for a word with
/// `c` nonvanishing letters over rows `1..i-1` (`i` is 1-based).
pub fn dif(i: u32, c: u32, params: &CodeParams) -> f64 {
    match dif_index(params, i, c) {
        None => 0.0,
        Some((remaining, s)) => {
            let table = LogPmfTable::new(remaining as usize, params.q);
            table.ln_pmf(remaining as usize, s as usize).exp()
        }
    }
}

/// Exact rational form of [`dif`].
pub fn dif_exact(i: u32, c: u32, params: &CodeParams) -> BigRational {
    match dif_index(params, i, c) {
        None => BigRational::zero(),
        Some((remaining, s)) => {
            let numer = scaled_pmf_row(params.q, remaining, s).pop().unwrap();
            let denom = BigUint::from(params.q).pow(remaining as u32);
            BigRational::new(numer.into(), denom.into())
        }
    }
}

/// Per-letter weights `W[v]` for the current entry, up to a positive per-step
/// scale. The chosen letter is the first maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightAccumulator<T> {
    weights: Vec<T>,
}

impl<T: PartialOrd> WeightAccumulator<T> {
    pub fn values(&self) -> &[T] {
        &self.weights
    }

    /// Index of the maximal weight, smallest letter on ties.
    pub fn argmax(&self) -> u32 {
        let mut best = 0usize;
        for (v, w) in self.weights.iter().enumerate().skip(1) {
            if *w > self.weights[best] {
                best = v;
            }
        }
        best as u32
    }
}

/// Partially fixed generator matrix plus the per-message vanish counts.
#[derive(Clone, Debug)]
pub struct ConstructionState {
    params: CodeParams,
    field: PrimeField,
    entries: Vec<u32>,
    vanish: Vec<u32>,
    row: usize,
    col: usize,
    letters: Vec<u32>,
    scanned: bool,
    neg_inv: Vec<u32>,
    powers: Vec<u64>,
}

impl ConstructionState {
    pub fn new(params: &CodeParams) -> Result<Self> {
        let messages = params.num_messages();
        if messages > MAX_MESSAGES {
            return Err(GtError::usage(format!(
                "q^k = {messages} messages exceed the construction limit {MAX_MESSAGES}"
            )));
        }
        let field = PrimeField::new(params.q)?;
        let q = params.q;
        let neg_inv = (0..q)
            .map(|a| if a == 0 { 0 } else { field.neg_raw(field.inv_raw(a)) })
            .collect();
        let powers = (0..=params.k).map(|t| (q as u64).pow(t)).collect();
        Ok(ConstructionState {
            params: *params,
            field,
            entries: vec![0; params.m as usize * params.k as usize],
            vanish: vec![0; messages as usize],
            row: 0,
            col: 0,
            letters: Vec::new(),
            scanned: false,
            neg_inv,
            powers,
        })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    /// Next entry to fix, 0-based; `None` once the matrix is complete.
    pub fn step(&self) -> Option<(usize, usize)> {
        (!self.is_complete()).then_some((self.row, self.col))
    }

    pub fn is_complete(&self) -> bool {
        self.row == self.params.m as usize
    }

    /// Row-major entries; those at or after [`step`](Self::step) are still 0.
    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn vanish_counts(&self) -> &[u32] {
        &self.vanish
    }

    /// Rows on which the codeword of message `index` is already fixed.
    pub fn determined_rows(&self, index: u64) -> u32 {
        if self.is_complete() {
            return self.params.m;
        }
        debug_assert!(index > 0);
        let last = self.powers.partition_point(|&p| p <= index) - 1;
        if last < self.col {
            self.row as u32 + 1
        } else {
            self.row as u32
        }
    }

    /// Vanishing letters of the current block, ordered by message index
    /// (offset by `q^j`); populated by the last scan.
    pub fn block_letters(&self) -> &[u32] {
        &self.letters
    }

    // Walks block B_j in Gray order carrying sum_{t<j} G[i,t] y[t], records the
    // vanishing letter of each message and reports (letter, nonvanish count).
    fn scan(&mut self, mut visit: impl FnMut(u32, u32)) {
        let (i, j) = (self.row, self.col);
        let q = self.params.q;
        let k = self.params.k as usize;
        let base = self.powers[j];
        let f = &self.field;
        let fixed = &self.entries[i * k..i * k + j];
        let determined = i as u32;
        self.letters.clear();
        self.letters.resize(((q - 1) as u64 * base) as usize, 0);
        let mut walk = GrayWalk::new(q, j);
        let mut partial = 0u32;
        loop {
            let prefix = walk.index();
            for a in 1..q {
                let off = prefix + (a as u64 - 1) * base;
                let v = f.mul_raw(self.neg_inv[a as usize], partial);
                self.letters[off as usize] = v;
                let c = determined - self.vanish[(off + base) as usize];
                visit(v, c);
            }
            match walk.advance() {
                Some(step) => partial = f.add_raw(partial, fixed[step.digit]),
                None => break,
            }
        }
        self.scanned = true;
    }

    fn dif_table_fast(&self, table: &LogPmfTable) -> Vec<f64> {
        let i = self.row as u32 + 1;
        let logs: Vec<Option<f64>> = (0..i)
            .map(|c| {
                dif_index(&self.params, i, c)
                    .map(|(rem, s)| table.ln_pmf(rem as usize, s as usize))
            })
            .collect();
        // scaling all entries by one positive constant leaves the argmax unchanged
        let norm = logs.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
        logs.iter()
            .map(|l| l.map_or(0.0, |x| (x - norm).exp()))
            .collect()
    }

    /// Float weights for the current entry (scaled so the largest `Dif` is 1).
    /// Summed from integer per-letter counts, so letters with equal counts
    /// get bit-identical weights and tie exactly as in exact mode.
    pub fn weights_fast(&mut self, table: &LogPmfTable) -> WeightAccumulator<f64> {
        assert!(!self.is_complete(), "construction already complete");
        assert!(table.max_trials() + 1 >= self.params.m as usize);
        let difs = self.dif_table_fast(table);
        let hist = self.histogram();
        let weights = hist
            .chunks(difs.len())
            .map(|counts| {
                -counts
                    .iter()
                    .zip(&difs)
                    .map(|(&n, &d)| n as f64 * d)
                    .sum::<f64>()
            })
            .collect();
        WeightAccumulator { weights }
    }

    // counts[v * i + c]: messages whose vanishing letter is v with c nonzero rows so far
    fn histogram(&mut self) -> Vec<u64> {
        let i = self.row + 1;
        let mut hist = vec![0u64; self.params.q as usize * i];
        self.scan(|v, c| hist[v as usize * i + c as usize] += 1);
        hist
    }

    /// Exact weights for the current entry, scaled by `q^(m - i)`.
    pub fn weights_exact(&mut self) -> WeightAccumulator<BigInt> {
        assert!(!self.is_complete(), "construction already complete");
        let q = self.params.q as usize;
        let i = self.row as u32 + 1;
        let counts_per_letter = i as usize;
        let hist = self.histogram();

        let remaining = (self.params.m - i) as u64;
        let need = self.params.min_weight() as u64;
        let row = if need == 0 {
            Vec::new()
        } else {
            scaled_pmf_row(self.params.q, remaining, need - 1)
        };
        let difs: Vec<Option<&BigUint>> = (0..i)
            .map(|c| dif_index(&self.params, i, c).map(|(_, s)| &row[s as usize]))
            .collect();
        let weights = (0..q)
            .map(|v| {
                let mut sum = BigUint::zero();
                for (c, d) in difs.iter().enumerate() {
                    let n = hist[v * counts_per_letter + c];
                    if let (Some(d), true) = (d, n > 0) {
                        sum += *d * n;
                    }
                }
                -BigInt::from(sum)
            })
            .collect();
        WeightAccumulator { weights }
    }

    /// Fixes the current entry to `letter` and updates the vanish counts of the block.
    pub fn commit(&mut self, letter: u32) {
        assert!(!self.is_complete(), "construction already complete");
        assert!(letter < self.params.q);
        if !self.scanned {
            self.scan(|_, _| {});
        }
        let base = self.powers[self.col] as usize;
        for (off, &v) in self.letters.iter().enumerate() {
            if v == letter {
                self.vanish[base + off] += 1;
            }
        }
        let k = self.params.k as usize;
        self.entries[self.row * k + self.col] = letter;
        self.col += 1;
        if self.col == k {
            self.col = 0;
            self.row += 1;
        }
        self.scanned = false;
    }

    pub fn into_matrix(self) -> Result<GeneratorMatrix> {
        if !self.is_complete() {
            return Err(GtError::usage("construction state is not complete"));
        }
        GeneratorMatrix::new(self.params, self.entries)
    }

    /// Exact `E(goal | state)`: the sum over nonzero messages of the
    /// conditional probability that the final weight is below `delta m`.
    pub fn expected_goal(&self, budget: u64) -> Result<BigRational> {
        let messages = self.params.num_messages();
        if messages > budget {
            return Err(GtError::Unverifiable {
                required: messages as u128,
                budget: budget as u128,
            });
        }
        let m = self.params.m as u64;
        let q = self.params.q;
        let need_total = self.params.min_weight() as u64;
        let mut groups: HashMap<(u64, u64), u64> = HashMap::new();
        for l in 1..messages {
            let d = self.determined_rows(l) as u64;
            let c = d - self.vanish[l as usize] as u64;
            *groups.entry((d, c)).or_default() += 1;
        }
        let mut keys: Vec<_> = groups.keys().copied().collect();
        keys.sort_unstable();
        let mut cache = TailCache::new(q);
        let mut total = BigUint::zero();
        for (d, c) in keys {
            let need = need_total.saturating_sub(c);
            let tail = cache.get(m - d, need);
            if !tail.is_zero() {
                total += tail * BigUint::from(q).pow(d as u32) * groups[&(d, c)];
            }
        }
        let denom = BigUint::from(q).pow(m as u32);
        Ok(BigRational::new(total.into(), denom.into()))
    }
}

/// Outcome of the post-construction distance check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verification {
    Verified { min_distance: u32 },
    /// `q^k` exceeded the enumeration budget; the code was not checked.
    Unverified { messages: u64, budget: u64 },
    Skipped,
}

#[derive(Clone, Copy, Debug)]
pub struct ConstructOptions {
    pub mode: Mode,
    pub verify: bool,
    pub verify_budget: u64,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions {
            mode: Mode::Fast,
            verify: true,
            verify_budget: DEFAULT_VERIFY_BUDGET,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CodeConstruction {
    pub matrix: GeneratorMatrix,
    pub requested: Mode,
    pub used: Mode,
    pub verification: Verification,
}

fn run(params: &CodeParams, mode: Mode) -> Result<GeneratorMatrix> {
    let mut state = ConstructionState::new(params)?;
    let table = match mode {
        Mode::Fast => Some(LogPmfTable::new(params.m as usize, params.q)),
        Mode::Exact => None,
    };
    while !state.is_complete() {
        let letter = match &table {
            Some(t) => state.weights_fast(t).argmax(),
            None => state.weights_exact().argmax(),
        };
        state.commit(letter);
    }
    state.into_matrix()
}

/// Builds an `[m, k, delta m]_q` code, verifying its distance when `q^k` is
/// within budget. A fast-mode result that fails the check is rebuilt in exact
/// mode.
pub fn construct_code(params: &CodeParams, opts: &ConstructOptions) -> Result<CodeConstruction> {
    if !params.satisfies_gv() {
        return Err(GtError::usage(format!(
            "{params} violates k <= (1 - H_q(delta)) m"
        )));
    }
    let matrix = run(params, opts.mode)?;
    if !opts.verify {
        return Ok(CodeConstruction {
            matrix,
            requested: opts.mode,
            used: opts.mode,
            verification: Verification::Skipped,
        });
    }
    let messages = params.num_messages();
    if messages > opts.verify_budget {
        return Ok(CodeConstruction {
            matrix,
            requested: opts.mode,
            used: opts.mode,
            verification: Verification::Unverified {
                messages,
                budget: opts.verify_budget,
            },
        });
    }
    let target = params.min_weight();
    let d = verify_distance(&matrix, opts.verify_budget)?;
    if d >= target {
        return Ok(CodeConstruction {
            matrix,
            requested: opts.mode,
            used: opts.mode,
            verification: Verification::Verified { min_distance: d },
        });
    }
    if opts.mode == Mode::Exact {
        return Err(GtError::Verification(format!(
            "exact construction reached distance {d} < {target} for {params}"
        )));
    }
    let matrix = run(params, Mode::Exact)?;
    let d = verify_distance(&matrix, opts.verify_budget)?;
    if d < target {
        return Err(GtError::Verification(format!(
            "exact fallback reached distance {d} < {target} for {params}"
        )));
    }
    Ok(CodeConstruction {
        matrix,
        requested: opts.mode,
        used: Mode::Exact,
        verification: Verification::Verified { min_distance: d },
    })
}

/// [`construct_code`] with default verification, returning just the matrix.
pub fn derandomized_construct(params: &CodeParams, mode: Mode) -> Result<GeneratorMatrix> {
    construct_code(params, &ConstructOptions { mode, ..Default::default() }).map(|c| c.matrix)
}
