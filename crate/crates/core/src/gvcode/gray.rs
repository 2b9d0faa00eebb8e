//! Modular q-ary Gray code.
//!
//! Digit `p` of the Gray word is `(n_p - n_{p+1}) mod q` where `n` is a plain
//! base-q counter. Incrementing the counter changes exactly one Gray digit,
//! the one at the number of trailing base-q zeros of the new counter value,
//! and always by `+1 mod q`.

/// One transition of the walk: `digit` went from `from` to `(from + 1) mod q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrayStep {
    pub digit: usize,
    pub from: u32,
    pub to: u32,
}

/// Visits every word of `[0, q)^len` once, starting from all zeros, while
/// tracking the lexicographic index `sum digit[t] * q^t` of the current word.
#[derive(Clone, Debug)]
pub struct GrayWalk {
    q: u32,
    digits: Vec<u32>,
    powers: Vec<u64>,
    counter: u64,
    total: u64,
    index: u64,
}

impl GrayWalk {
    pub fn new(q: u32, len: usize) -> Self {
        let mut powers = Vec::with_capacity(len);
        let mut p = 1u64;
        for _ in 0..len {
            powers.push(p);
            p = p.checked_mul(q as u64).expect("q^len overflows u64");
        }
        GrayWalk {
            q,
            digits: vec![0; len],
            powers,
            counter: 0,
            total: p,
            index: 0,
        }
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Number of words visited so far, including the initial zero word.
    pub fn visited(&self) -> u64 {
        self.counter + 1
    }

    /// Moves to the next word; `None` once all `q^len` words have been seen.
    #[inline]
    pub fn advance(&mut self) -> Option<GrayStep> {
        if self.counter + 1 >= self.total {
            return None;
        }
        self.counter += 1;
        let q = self.q as u64;
        let mut c = self.counter;
        let mut digit = 0usize;
        while c.is_multiple_of(q) {
            c /= q;
            digit += 1;
        }
        let from = self.digits[digit];
        let to = if from + 1 == self.q { 0 } else { from + 1 };
        self.digits[digit] = to;
        if to == 0 {
            self.index -= (q - 1) * self.powers[digit];
        } else {
            self.index += self.powers[digit];
        }
        Some(GrayStep { digit, from, to })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn visits_every_word_once() {
        for (q, len) in [(2u32, 5usize), (3, 4), (5, 3), (7, 2), (11, 1), (4, 3), (3, 0)] {
            let mut walk = GrayWalk::new(q, len);
            let mut seen = HashSet::new();
            let index_of = |d: &[u32]| d.iter().rev().fold(0u64, |acc, &x| acc * q as u64 + x as u64);
            seen.insert(walk.digits().to_vec());
            assert_eq!(walk.index(), 0);
            while let Some(step) = walk.advance() {
                let d = walk.digits().to_vec();
                assert_eq!(walk.index(), index_of(&d));
                assert_eq!(d[step.digit], (step.from + 1) % q);
                assert!(seen.insert(d));
            }
            assert_eq!(seen.len() as u64, (q as u64).pow(len as u32));
            assert_eq!(walk.visited(), seen.len() as u64);
        }
    }

    #[test]
    fn binary_matches_reflected_code() {
        let mut walk = GrayWalk::new(2, 4);
        for n in 1u64..16 {
            walk.advance().unwrap();
            let g = n ^ (n >> 1);
            let bits: Vec<u32> = (0..4).map(|b| ((g >> b) & 1) as u32).collect();
            assert_eq!(walk.digits(), bits.as_slice());
        }
        assert!(walk.advance().is_none());
    }
}
