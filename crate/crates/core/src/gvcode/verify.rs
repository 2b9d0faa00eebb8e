use super::gray::GrayWalk;
use super::{weight, GeneratorMatrix};
use crate::error::{GtError, Result};

/// Calls `visit(index, weight)` for every nonzero message, in Gray-code order.
///
/// Each Gray step adds one generator column to the running codeword, so the
/// whole enumeration costs `O(m q^k)`.
pub fn for_each_codeword_weight(g: &GeneratorMatrix, mut visit: impl FnMut(u64, usize)) {
    let (m, k) = (g.rows(), g.cols());
    let f = g.field();
    let columns: Vec<Vec<u32>> = (0..k).map(|j| g.column(j)).collect();
    let mut word = vec![0u32; m];
    let mut w = 0usize;
    let mut walk = GrayWalk::new(f.order(), k);
    while let Some(step) = walk.advance() {
        for (x, &c) in word.iter_mut().zip(&columns[step.digit]) {
            if c == 0 {
                continue;
            }
            let was_zero = *x == 0;
            *x = f.add_raw(*x, c);
            match (was_zero, *x == 0) {
                (true, false) => w += 1,
                (false, true) => w -= 1,
                _ => {}
            }
        }
        visit(walk.index(), w);
    }
}

/// Exact minimum weight over all `q^k - 1` nonzero codewords.
///
/// Refuses (rather than sampling) when `q^k` exceeds `budget`.
pub fn verify_distance(g: &GeneratorMatrix, budget: u64) -> Result<u32> {
    let messages = g.params().num_messages();
    if messages > budget {
        return Err(GtError::Unverifiable {
            required: messages as u128 * g.rows() as u128,
            budget: budget as u128 * g.rows() as u128,
        });
    }
    let mut min = g.rows();
    for_each_codeword_weight(g, |_, w| min = min.min(w));
    Ok(min as u32)
}

/// Re-encodes every message from scratch; `O(m k q^k)`, for cross-checking.
pub fn verify_distance_naive(g: &GeneratorMatrix) -> u32 {
    (1..g.params().num_messages())
        .map(|l| weight(&g.encode_index(l)))
        .min()
        .unwrap_or(g.rows()) as u32
}
