//! Linear codes over `F_q` meeting the Gilbert-Varshamov bound.
//!
//! Messages `y in F_q^k` are indexed lexicographically with coordinate 0 least
//! significant, so the messages whose last nonzero coordinate is `j` occupy the
//! index range `[q^j, q^(j+1))`.

mod construct;
mod exact;
mod gray;
mod verify;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GtError, Result};
use crate::field::{FieldElement, PrimeField};
use crate::params::CodeParams;

pub use construct::{
    construct_code, derandomized_construct, dif, dif_exact, CodeConstruction, ConstructOptions,
    ConstructionState, Mode, Verification, WeightAccumulator, DEFAULT_VERIFY_BUDGET,
};
pub use exact::q_ary_tail_numerator;
pub use gray::{GrayStep, GrayWalk};
pub use verify::{for_each_codeword_weight, verify_distance, verify_distance_naive};

/// An `m x k` generator matrix, stored row-major as canonical residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorMatrix {
    params: CodeParams,
    field: PrimeField,
    entries: Vec<u32>,
}

impl GeneratorMatrix {
    pub fn new(params: CodeParams, entries: Vec<u32>) -> Result<Self> {
        let field = PrimeField::new(params.q)?;
        let expected = params.m as usize * params.k as usize;
        if entries.len() != expected {
            return Err(GtError::usage(format!(
                "expected {expected} entries for a {}x{} matrix, got {}",
                params.m,
                params.k,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|&&e| e >= params.q) {
            return Err(GtError::usage(format!("entry {bad} is not in [0, {})", params.q)));
        }
        Ok(GeneratorMatrix { params, field, entries })
    }

    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.params.m as usize
    }

    pub fn cols(&self) -> usize {
        self.params.k as usize
    }

    pub fn raw_entries(&self) -> &[u32] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.cols() + j]
    }

    pub fn entry(&self, i: usize, j: usize) -> FieldElement {
        self.field.element(self.get(i, j) as u64)
    }

    pub fn row(&self, i: usize) -> &[u32] {
        let k = self.cols();
        &self.entries[i * k..(i + 1) * k]
    }

    /// Column `j` as a length-`m` vector.
    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows()).map(|i| self.get(i, j)).collect()
    }

    /// `G y` for a message given as field elements.
    pub fn encode(&self, y: &[FieldElement]) -> Result<Vec<FieldElement>> {
        if y.len() != self.cols() {
            return Err(GtError::usage(format!(
                "message has length {}, expected {}",
                y.len(),
                self.cols()
            )));
        }
        if let Some(bad) = y.iter().find(|e| e.modulus() != self.params.q) {
            return Err(GtError::usage(format!(
                "message letter from GF({}) used with a GF({}) code",
                bad.modulus(),
                self.params.q
            )));
        }
        let raw: Vec<u32> = y.iter().map(|e| e.value()).collect();
        Ok(self
            .encode_raw(&raw)
            .into_iter()
            .map(|v| self.field.element(v as u64))
            .collect())
    }

    pub fn encode_raw(&self, y: &[u32]) -> Vec<u32> {
        debug_assert_eq!(y.len(), self.cols());
        let f = &self.field;
        (0..self.rows())
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(y)
                    .fold(0u32, |acc, (&g, &x)| f.add_raw(acc, f.mul_raw(g, x)))
            })
            .collect()
    }

    /// Codeword of the message with lexicographic index `index`.
    pub fn encode_index(&self, index: u64) -> Vec<u32> {
        self.encode_raw(&message_digits(self.params.q, self.params.k, index))
    }
}

/// Base-q digits of `index`, least significant first, padded to `k`.
pub fn message_digits(q: u32, k: u32, mut index: u64) -> Vec<u32> {
    (0..k)
        .map(|_| {
            let d = (index % q as u64) as u32;
            index /= q as u64;
            d
        })
        .collect()
}

pub fn weight(word: &[u32]) -> usize {
    word.iter().filter(|&&x| x != 0).count()
}

/// Entries drawn i.i.d. uniform from `F_q` by a ChaCha8 stream seeded with
/// `seed`. No distance guarantee.
pub fn random_code(params: &CodeParams, seed: u64) -> GeneratorMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..params.m as usize * params.k as usize)
        .map(|_| rng.gen_range(0..params.q))
        .collect();
    GeneratorMatrix::new(*params, entries).expect("params already validated")
}

/// Number of nonzero messages whose codeword weight is below `delta * m`.
pub fn goal(g: &GeneratorMatrix) -> u64 {
    let min_weight = g.params.min_weight() as usize;
    let mut bad = 0u64;
    for_each_codeword_weight(g, |_, w| {
        if w < min_weight {
            bad += 1;
        }
    });
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Rational;
    use proptest::prelude::*;

    pub(crate) fn reed_solomon_3_2() -> GeneratorMatrix {
        let p = CodeParams::new(3, 3, 2, Rational::new(2, 3)).unwrap();
        GeneratorMatrix::new(p, vec![1, 0, 1, 1, 1, 2]).unwrap()
    }

    #[test]
    fn rs_codewords_in_lexicographic_order() {
        let g = reed_solomon_3_2();
        let words: Vec<String> = (0..9)
            .map(|l| g.encode_index(l).iter().map(|d| d.to_string()).collect())
            .collect();
        assert_eq!(words, ["000", "111", "222", "012", "120", "201", "021", "102", "210"]);
        let f = g.field().clone();
        let y = [f.element(0), f.element(1)];
        let w: Vec<u32> = g.encode(&y).unwrap().iter().map(|e| e.value()).collect();
        assert_eq!(w, vec![0, 1, 2]);
    }

    #[test]
    fn encode_zero_and_mismatch() {
        let g = reed_solomon_3_2();
        assert_eq!(g.encode_raw(&[0, 0]), vec![0, 0, 0]);
        let f5 = PrimeField::new(5).unwrap();
        assert!(g.encode(&[f5.element(1), f5.element(1)]).is_err());
        let f3 = PrimeField::new(3).unwrap();
        assert!(g.encode(&[f3.element(1)]).is_err());
    }

    #[test]
    fn goal_examples() {
        assert_eq!(goal(&reed_solomon_3_2()), 0);
        let p = CodeParams::new(2, 4, 1, Rational::new(1, 2)).unwrap();
        let g = GeneratorMatrix::new(p, vec![1, 0, 0, 0]).unwrap();
        assert_eq!(goal(&g), 1);
        let p0 = CodeParams::new(3, 4, 2, Rational::new(0, 1)).unwrap();
        let ident = GeneratorMatrix::new(p0, vec![1, 0, 0, 1, 0, 0, 0, 0]).unwrap();
        assert_eq!(goal(&ident), 0);
    }

    #[test]
    fn random_code_is_seeded() {
        let p = CodeParams::new(7, 20, 3, Rational::new(1, 2)).unwrap();
        assert_eq!(random_code(&p, 42), random_code(&p, 42));
        assert_ne!(random_code(&p, 42), random_code(&p, 43));
        let p0 = CodeParams::new(2, 8, 1, Rational::new(0, 1)).unwrap();
        for seed in 0..50 {
            assert_eq!(goal(&random_code(&p0, seed)), 0);
        }
    }

    #[test]
    fn random_code_failure_rate_below_expectation_bound() {
        // q=2, m=8, k=1, delta=1/4: a bad draw is a column of weight < 2,
        // probability 9/256, against the bound 2^(1 - 8(1 - H_2(1/4))) = 0.7023
        let p = CodeParams::new(2, 8, 1, Rational::new(1, 4)).unwrap();
        let failures = (0..1000).filter(|&s| goal(&random_code(&p, s)) > 0).count();
        let frac = failures as f64 / 1000.0;
        let bound = 2f64.powf(1.0 + crate::params::bad_event_log_bound(&p));
        assert!((bound - 0.702_331_961_591_220_9).abs() < 1e-9);
        assert!(frac < bound);
        assert!(frac < 0.08, "{frac}");
    }

    proptest! {
        #[test]
        fn encode_is_linear(seed in 0u64..1000, a in 0u64..343, b in 0u64..343) {
            let p = CodeParams::new(7, 9, 3, Rational::new(1, 3)).unwrap();
            let g = random_code(&p, seed);
            let f = g.field().clone();
            let ya = message_digits(7, 3, a);
            let yb = message_digits(7, 3, b);
            let ysum: Vec<u32> = ya.iter().zip(&yb).map(|(&x, &y)| f.add_raw(x, y)).collect();
            let lhs = g.encode_raw(&ysum);
            let rhs: Vec<u32> = g.encode_raw(&ya).iter().zip(g.encode_raw(&yb))
                .map(|(&x, y)| f.add_raw(x, y)).collect();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
