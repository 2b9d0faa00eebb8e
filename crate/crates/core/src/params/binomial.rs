//! Binomial coefficients and lower tails, in log space and exactly.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{ratio_f64, Rational};

/// Cumulative `ln(a!)` for `a <= n`, summed with Neumaier compensation.
#[derive(Clone, Debug)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        table.push(0.0);
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for a in 1..=n {
            let x = (a as f64).ln();
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
            table.push(sum + comp);
        }
        LnFactorials { table }
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }

    #[inline]
    pub fn ln_factorial(&self, a: usize) -> f64 {
        self.table[a]
    }

    #[inline]
    pub fn ln_choose(&self, a: usize, b: usize) -> f64 {
        debug_assert!(b <= a);
        self.table[a] - self.table[b] - self.table[a - b]
    }
}

/// `ln C(a, b)` for every `0 <= b <= a <= m`, plus the two log-probabilities
/// of a uniformly random `F_q` letter being nonzero or zero.
#[derive(Clone, Debug)]
pub struct LogPmfTable {
    max_trials: usize,
    choose: Vec<f64>,
    pub ln_nonzero: f64,
    pub ln_zero: f64,
}

impl LogPmfTable {
    pub fn new(max_trials: usize, q: u32) -> Self {
        let facts = LnFactorials::new(max_trials);
        let mut choose = Vec::with_capacity((max_trials + 1) * (max_trials + 2) / 2);
        for a in 0..=max_trials {
            for b in 0..=a {
                choose.push(facts.ln_choose(a, b));
            }
        }
        let q = q as f64;
        LogPmfTable {
            max_trials,
            choose,
            ln_nonzero: (1.0 - 1.0 / q).ln(),
            ln_zero: (1.0 / q).ln(),
        }
    }

    pub fn max_trials(&self) -> usize {
        self.max_trials
    }

    #[inline]
    pub fn ln_choose(&self, a: usize, b: usize) -> f64 {
        self.choose[a * (a + 1) / 2 + b]
    }

    /// `ln Pr(X = s)` for `X ~ B(trials, 1 - 1/q)`.
    #[inline]
    pub fn ln_pmf(&self, trials: usize, s: usize) -> f64 {
        self.ln_choose(trials, s) + s as f64 * self.ln_nonzero + (trials - s) as f64 * self.ln_zero
    }

    /// `Pr(X < threshold)` for `X ~ B(trials, 1 - 1/q)`.
    pub fn tail_lt(&self, trials: usize, threshold: Rational) -> f64 {
        let upper = count_below(threshold).min(trials as u64 + 1) as usize;
        log_sum_exp((0..upper).map(|s| self.ln_pmf(trials, s))).exp()
    }
}

// number of non-negative integers strictly below `threshold`
fn count_below(threshold: Rational) -> u64 {
    threshold.ceil().to_integer()
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `Pr(X < threshold)` for `X ~ Binomial(trials, success_p)`, summed in log space.
pub fn binom_tail_lt(trials: u64, success_p: Rational, threshold: Rational) -> f64 {
    let upper = count_below(threshold).min(trials + 1);
    if upper == 0 {
        return 0.0;
    }
    if upper == trials + 1 {
        return 1.0;
    }
    let p = ratio_f64(success_p);
    if p == 0.0 {
        // X = 0 surely, and 0 < threshold here
        return 1.0;
    }
    if p == 1.0 {
        return 0.0;
    }
    let facts = LnFactorials::new(trials as usize);
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let n = trials as usize;
    log_sum_exp(
        (0..upper as usize)
            .map(|j| facts.ln_choose(n, j) + j as f64 * lp + (n - j) as f64 * lq),
    )
    .exp()
    .min(1.0)
}

/// Exact rational `Pr(X < threshold)` for `X ~ Binomial(trials, success_p)`.
pub fn binom_tail_lt_exact(trials: u64, success_p: Rational, threshold: Rational) -> BigRational {
    let upper = count_below(threshold).min(trials + 1);
    let (a, b) = (*success_p.numer(), *success_p.denom());
    // sum_{j<upper} C(n,j) a^j (b-a)^(n-j) / b^n
    let mut numer = BigUint::zero();
    let mut coeff = BigUint::one();
    for j in 0..upper {
        if j > 0 {
            coeff = coeff * BigUint::from(trials - j + 1) / BigUint::from(j);
        }
        numer += &coeff
            * BigUint::from(a).pow(j as u32)
            * BigUint::from(b - a).pow((trials - j) as u32);
    }
    let denom = BigUint::from(b).pow(trials as u32);
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn r(a: u64, b: u64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn tail_examples() {
        assert_eq!(binom_tail_lt(0, r(1, 2), r(1, 1)), 1.0);
        assert!((binom_tail_lt(2, r(1, 2), r(1, 1)) - 0.25).abs() < 1e-15);
        let exact = binom_tail_lt_exact(10, r(4, 5), r(5, 1));
        assert_eq!(exact, BigRational::new(62201.into(), 9765625.into()));
        let approx = binom_tail_lt(10, r(4, 5), r(5, 1));
        assert!((approx / 0.006_369_382_4 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn threshold_edges() {
        assert_eq!(binom_tail_lt(5, r(1, 3), r(0, 1)), 0.0);
        assert_eq!(binom_tail_lt(5, r(1, 3), r(6, 1)), 1.0);
        assert_eq!(binom_tail_lt(5, r(0, 1), r(1, 2)), 1.0);
        assert_eq!(binom_tail_lt(5, r(1, 1), r(5, 1)), 0.0);
        // X < 5/2 means X <= 2
        assert_eq!(
            binom_tail_lt_exact(4, r(1, 2), r(5, 2)),
            BigRational::new(11.into(), 16.into())
        );
    }

    #[test]
    fn ln_choose_precision() {
        let t = LogPmfTable::new(300, 5);
        // C(60, 30) = 118264581564861424 exactly
        assert!((t.ln_choose(60, 30) - 118_264_581_564_861_424f64.ln()).abs() < 1e-9);
        let facts = LnFactorials::new(3000);
        let mut exact = BigUint::one();
        for a in 1..=3000u32 {
            exact *= BigUint::from(a);
        }
        let bits = exact.bits();
        let top = (&exact >> (bits - 60)).to_f64().unwrap();
        let ln_exact = top.ln() + (bits - 60) as f64 * std::f64::consts::LN_2;
        assert!((facts.ln_factorial(3000) - ln_exact).abs() < 1e-9);
    }

    #[test]
    fn float_tail_matches_exact_on_grid() {
        let ps = [r(1, 2), r(2, 3), r(4, 5), r(6, 7), r(10, 11), r(1, 3), r(1, 7)];
        for trials in (0..=200u64).step_by(7).chain([1, 2, 199, 200]) {
            for &p in &ps {
                for th in [0u64, 1, 2, 5, 17, 50, 99, 150, 201] {
                    for th_frac in [r(th, 1), r(2 * th + 1, 2)] {
                        let exact = binom_tail_lt_exact(trials, p, th_frac).to_f64().unwrap();
                        let approx = binom_tail_lt(trials, p, th_frac);
                        if exact == 0.0 {
                            assert_eq!(approx, 0.0);
                        } else {
                            assert!(
                                (approx / exact - 1.0).abs() <= 1e-6,
                                "trials={trials} p={p} th={th_frac}: {approx} vs {exact}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn q_ary_table_tail_matches_generic() {
        let t = LogPmfTable::new(64, 7);
        for trials in [0usize, 1, 10, 64] {
            for th in [r(0, 1), r(3, 1), r(7, 2), r(40, 1), r(100, 1)] {
                let a = t.tail_lt(trials, th);
                let b = binom_tail_lt(trials as u64, r(6, 7), th);
                assert!((a - b).abs() <= 1e-12 * b.max(1e-300), "{trials} {th}");
            }
        }
    }
}
