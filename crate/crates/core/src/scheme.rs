//! End-to-end group-testing schemes.
//!
//! An `(n, r+1)`-strongly-selective family identifies up to `r` defectives, so
//! the group-testing entry points take the number of defectives and build one
//! strength higher. Decoding is the cover decoder: an item is declared
//! defective iff every test containing it is positive.

use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GtError, Result};
use crate::gvcode::{construct_code, CodeConstruction, ConstructOptions};
use crate::params::{derive_params, SchemeParams};
use crate::ssf::{reduce_code, Scheme};

/// Per-test results; `true` means the pool holds at least one defective.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OutcomeVector(Vec<bool>);

impl OutcomeVector {
    pub fn new(bits: Vec<bool>) -> Self {
        OutcomeVector(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn positives(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

/// Sorted, duplicate-free set of 1-based item indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct DefectiveSet(Vec<u64>);

impl DefectiveSet {
    pub fn new(mut items: Vec<u64>) -> Self {
        items.sort_unstable();
        items.dedup();
        DefectiveSet(items)
    }

    pub fn items(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BuildOptions {
    pub code: ConstructOptions,
}

/// A built scheme together with how it was obtained.
#[derive(Clone, Debug)]
pub struct Construction {
    pub scheme: Scheme,
    pub params: SchemeParams,
    /// `None` on the singleton branch.
    pub code: Option<CodeConstruction>,
}

/// An `(n, r)`-SSF: the `n` singletons when `r^2 ln n >= n`, otherwise the
/// reduction of a derandomized GV code.
pub fn build_scheme(n: u64, r: u64) -> Result<Scheme> {
    build_scheme_with(n, r, &BuildOptions::default()).map(|c| c.scheme)
}

pub fn build_scheme_with(n: u64, r: u64, opts: &BuildOptions) -> Result<Construction> {
    let params = derive_params(n, r)?;
    match params.code {
        None => Ok(Construction {
            scheme: Scheme::singletons(n).with_strength(r),
            params,
            code: None,
        }),
        Some(code_params) => {
            let code = construct_code(&code_params, &opts.code)?;
            let scheme = reduce_code(&code.matrix, n)?;
            debug_assert_eq!(scheme.strength(), r);
            Ok(Construction {
                scheme,
                params,
                code: Some(code),
            })
        }
    }
}

/// A scheme that identifies any set of at most `r` defectives among `n` items.
pub fn build_gt_scheme(n: u64, r: u64) -> Result<Scheme> {
    build_gt_scheme_with(n, r, &BuildOptions::default()).map(|c| c.scheme)
}

pub fn build_gt_scheme_with(n: u64, r: u64, opts: &BuildOptions) -> Result<Construction> {
    if r + 1 > n {
        return Err(GtError::usage(format!(
            "identifying {r} defectives needs n >= {}, got n = {n}",
            r + 1
        )));
    }
    build_scheme_with(n, r + 1, opts)
}

/// Simulates the pooled tests for a defective set.
pub fn outcomes(s: &Scheme, d: &DefectiveSet) -> Result<OutcomeVector> {
    if let Some(&bad) = d.items().iter().find(|&&x| x == 0 || x > s.n()) {
        return Err(GtError::usage(format!("item {bad} outside [1, {}]", s.n())));
    }
    let mut defective = vec![false; s.n() as usize];
    for &x in d.items() {
        defective[(x - 1) as usize] = true;
    }
    Ok(OutcomeVector(
        s.tests()
            .iter()
            .map(|t| t.iter().any(|&x| defective[(x - 1) as usize]))
            .collect(),
    ))
}

/// Cover decoder. Returns the items that appear in no negative test, after
/// checking that at most `r` remain and that they reproduce `o` exactly.
pub fn decode(s: &Scheme, o: &OutcomeVector, r: u64) -> Result<DefectiveSet> {
    if o.len() != s.num_tests() {
        return Err(GtError::usage(format!(
            "{} outcomes for a scheme with {} tests",
            o.len(),
            s.num_tests()
        )));
    }
    let candidates = cover(s, o);
    if candidates.len() as u64 > r {
        return Err(GtError::Inconsistent(format!(
            "{} candidate defectives exceed the bound {r}",
            candidates.len()
        )));
    }
    if &outcomes(s, &candidates)? != o {
        return Err(GtError::Inconsistent(
            "a positive test contains no surviving candidate".into(),
        ));
    }
    Ok(candidates)
}

/// Items not cleared by any negative test, without consistency checks.
pub fn cover(s: &Scheme, o: &OutcomeVector) -> DefectiveSet {
    let mut cleared = vec![false; s.n() as usize];
    for (t, &positive) in s.tests().iter().zip(o.bits()) {
        if !positive {
            for &x in t {
                cleared[(x - 1) as usize] = true;
            }
        }
    }
    DefectiveSet(
        (1..=s.n())
            .filter(|&x| !cleared[(x - 1) as usize])
            .collect(),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationReport {
    pub n: u64,
    pub r: u64,
    pub t: usize,
    pub trivial: bool,
    pub q: Option<u32>,
    pub k: Option<u32>,
    pub m: Option<u32>,
    pub delta: Option<String>,
    pub total_incidence: u64,
    pub trials: u64,
    pub exhaustive: bool,
    pub recovered: u64,
    pub failures: u64,
    pub witness: Option<Vec<u64>>,
    pub build_ms: f64,
    pub decode_ms: f64,
}

impl SimulationReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn count_small_subsets(n: u64, r: u64) -> u128 {
    let mut total = 0u128;
    let mut c = 1u128;
    for s in 0..=r.min(n) {
        total = total.saturating_add(c);
        c = c.saturating_mul((n - s) as u128) / (s as u128 + 1);
    }
    total
}

fn all_subsets_up_to(n: u64, r: u64) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..r.min(n) {
        let mut next = Vec::new();
        for set in &frontier {
            let start = set.last().map_or(1, |&x: &u64| x + 1);
            for x in start..=n {
                let mut s = set.clone();
                s.push(x);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Builds a scheme for `r` defectives and checks `decode(outcomes(d)) == d`
/// on `trials` seeded random sets of size at most `r`. When `trials` covers
/// every such set, all of them are checked exhaustively instead.
pub fn simulate(n: u64, r: u64, trials: u64, seed: u64, opts: &BuildOptions) -> Result<SimulationReport> {
    let start = Instant::now();
    let built = build_gt_scheme_with(n, r, opts)?;
    let build_ms = start.elapsed().as_secs_f64() * 1e3;
    let scheme = &built.scheme;

    let exhaustive = trials > 0 && trials as u128 >= count_small_subsets(n, r);
    let sets: Vec<Vec<u64>> = if exhaustive {
        all_subsets_up_to(n, r)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..trials)
            .map(|_| {
                let size = rng.gen_range(0..=r) as usize;
                sample(&mut rng, n as usize, size)
                    .into_iter()
                    .map(|i| i as u64 + 1)
                    .collect()
            })
            .collect()
    };

    let start = Instant::now();
    let results: Vec<bool> = sets
        .par_iter()
        .map(|set| {
            let d = DefectiveSet::new(set.clone());
            let o = outcomes(scheme, &d).expect("items in range");
            matches!(decode(scheme, &o, r), Ok(found) if found == d)
        })
        .collect();
    let decode_ms = start.elapsed().as_secs_f64() * 1e3;
    let failures = results.iter().filter(|&&ok| !ok).count() as u64;
    let witness = results
        .iter()
        .position(|&ok| !ok)
        .map(|i| DefectiveSet::new(sets[i].clone()).0);

    let code = built.params.code;
    Ok(SimulationReport {
        n,
        r,
        t: scheme.num_tests(),
        trivial: code.is_none(),
        q: code.map(|c| c.q),
        k: code.map(|c| c.k),
        m: code.map(|c| c.m),
        delta: code.map(|c| format!("{}/{}", c.delta.numer(), c.delta.denom())),
        total_incidence: scheme.total_size(),
        trials: sets.len() as u64,
        exhaustive,
        recovered: sets.len() as u64 - failures,
        failures,
        witness,
        build_ms,
        decode_ms,
    })
}
