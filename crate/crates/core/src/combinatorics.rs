//! Exact counting of LTPF encoding degeneracies.
//!
//! Locality structures over `m` labelled modes are set partitions whose blocks
//! all have at least two modes; target assignments add `|s_j| - 1` choices
//! per block. Everything here is exact integer (or rational) arithmetic.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Arbitrary-precision non-negative count.
pub type BigCount = BigUint;

/// Binomial coefficient in `u128`, `None` on overflow.
pub fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is exact at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

pub fn binomial(n: usize, k: usize) -> BigCount {
    if k > n {
        return BigCount::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigCount::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

pub fn factorial(n: usize) -> BigCount {
    (1..=n).fold(BigCount::one(), |acc, i| acc * i)
}

/// Partition `x_1 >= ... >= x_n > 0` of an integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IntegerPartition {
    parts: Vec<usize>,
}

impl IntegerPartition {
    /// Sorts `parts` into non-increasing order; zero parts are rejected.
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::Partition(format!("parts must be positive: {parts:?}")));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// All partitions of `m` into exactly `n` parts, each at least `min_part`.
///
/// Output is in decreasing lexicographic order, e.g. `(4, 2, 1)` gives
/// `[3, 1], [2, 2]`.
pub fn partitions(m: usize, n: usize, min_part: usize) -> Vec<IntegerPartition> {
    fn fill(remaining: usize, slots: usize, max: usize, min: usize, prefix: &mut Vec<usize>, out: &mut Vec<IntegerPartition>) {
        if slots == 0 {
            if remaining == 0 {
                out.push(IntegerPartition { parts: prefix.clone() });
            }
            return;
        }
        // the remaining slots - 1 parts need at least min each
        let Some(reserve) = (slots - 1).checked_mul(min) else { return };
        if remaining < reserve + min {
            return;
        }
        let upper = max.min(remaining - reserve);
        // the largest part must also leave room: part * slots >= remaining
        for part in (min..=upper).rev() {
            if part * slots < remaining {
                break;
            }
            prefix.push(part);
            fill(remaining - part, slots - 1, part, min, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if m == 0 || n == 0 {
        return out;
    }
    fill(m, n, m, min_part.max(1), &mut Vec::with_capacity(n), &mut out);
    out
}

/// Multinomial `m! / prod_j x_j!` (ordered block profiles).
pub fn multinomial(m: usize, partition: &IntegerPartition) -> Result<BigCount> {
    if partition.total() != m {
        return Err(Error::Partition(format!("{:?} does not sum to {m}", partition.parts())));
    }
    let mut remaining = m;
    let mut acc = BigCount::one();
    for &x in partition.parts() {
        acc *= binomial(remaining, x);
        remaining -= x;
    }
    Ok(acc)
}

/// Number of unordered set partitions of `m` labelled modes with block sizes
/// `partition`: the multinomial divided by the factorials of the multiplicity
/// of each part size.
pub fn multinomial_tilde(m: usize, partition: &IntegerPartition) -> Result<BigCount> {
    let mut count = multinomial(m, partition)?;
    let parts = partition.parts();
    let mut i = 0;
    while i < parts.len() {
        let run = parts[i..].iter().take_while(|&&p| p == parts[i]).count();
        count /= factorial(run);
        i += run;
    }
    Ok(count)
}

/// Table of associated Stirling numbers of the second kind `S_k^{m'}(n')`
/// for `m' <= m`, `n' <= n`, filled bottom-up from
/// `S_k^m(n) = n S_k^{m-1}(n) + C(m-1, k-1) S_k^{m-k}(n-1)`.
#[derive(Debug, Clone)]
pub struct StirlingTable {
    min_block: usize,
    rows: Vec<Vec<BigCount>>,
}

impl StirlingTable {
    pub fn new(min_block: usize, max_m: usize, max_n: usize) -> Self {
        let k = min_block.max(1);
        let mut rows = vec![vec![BigCount::zero(); max_n + 1]; max_m + 1];
        rows[0][0] = BigCount::one();
        for m in 1..=max_m {
            for n in 1..=max_n {
                if m < k * n {
                    continue;
                }
                let mut v = &rows[m - 1][n] * n;
                if m >= k {
                    v += binomial(m - 1, k - 1) * &rows[m - k][n - 1];
                }
                rows[m][n] = v;
            }
        }
        Self { min_block: k, rows }
    }

    pub fn min_block(&self) -> usize {
        self.min_block
    }

    pub fn get(&self, m: usize, n: usize) -> Option<&BigCount> {
        self.rows.get(m).and_then(|r| r.get(n))
    }
}

/// Set partitions of `m` labelled elements into `n` blocks of size at least `k`.
pub fn stirling_assoc(k: usize, m: usize, n: usize) -> BigCount {
    StirlingTable::new(k, m, n).get(m, n).cloned().unwrap_or_default()
}

fn check_modes(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::TooFewModes(m));
    }
    Ok(())
}

/// Number of locality structures over `m` modes (all blocks of size >= 2).
pub fn degeneracy_s(m: usize) -> Result<BigCount> {
    check_modes(m)?;
    let table = StirlingTable::new(2, m, m / 2);
    Ok((1..=m / 2).map(|n| table.get(m, n).cloned().unwrap_or_default()).sum())
}

/// The same count evaluated as a sum of shuffle-invariant multinomials.
pub fn degeneracy_s_by_partitions(m: usize) -> Result<BigCount> {
    check_modes(m)?;
    let mut total = BigCount::zero();
    for n in 1..=m / 2 {
        for x in partitions(m, n, 2) {
            total += multinomial_tilde(m, &x)?;
        }
    }
    Ok(total)
}

/// Number of complete `(S, K)` schemes over `m` modes.
pub fn degeneracy_sk(m: usize) -> Result<BigCount> {
    check_modes(m)?;
    let mut total = BigCount::zero();
    for n in 1..=m / 2 {
        for x in partitions(m, n, 2) {
            let choices: BigCount = x.parts().iter().map(|&p| BigCount::from(p - 1)).product();
            total += multinomial_tilde(m, &x)? * choices;
        }
    }
    Ok(total)
}

/// Locality structures compatible with a known target assignment.
///
/// Block sizes and target counts are both sorted in decreasing order and
/// matched position by position: the `j`-th largest block must hold at least
/// `k_(j) + 1` modes. Infeasible assignments count zero.
pub fn degeneracy_s_given_k(m: usize, targets: &[usize]) -> Result<BigCount> {
    if targets.is_empty() || targets.contains(&0) {
        return Err(Error::Assignment(format!("target counts must be >= 1: {targets:?}")));
    }
    let mut sorted = targets.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let min_part = sorted.last().copied().unwrap_or(1) + 1;
    let mut total = BigCount::zero();
    for x in partitions(m, sorted.len(), min_part) {
        if x.parts().iter().zip(&sorted).all(|(&size, &k)| size > k) {
            total += multinomial_tilde(m, &x)?;
        }
    }
    Ok(total)
}

/// Target assignments compatible with known block sizes: `prod_j (|s_j| - 1)`.
pub fn degeneracy_k_given_s(sizes: &[usize]) -> Result<BigCount> {
    if sizes.is_empty() || sizes.iter().any(|&s| s < 2) {
        return Err(Error::Partition(format!("block sizes must be >= 2: {sizes:?}")));
    }
    Ok(sizes.iter().map(|&s| BigCount::from(s - 1)).product())
}

/// Closed-form bound on `max_S G_{K|S}` over `m` modes.
///
/// `m - 1` for `2 <= m <= 7`, `4^(m/5)` when `5 | m`, and
/// `4^ceil(m/5) (3/4)^(5 - m mod 5)` otherwise. Returned as an exact rational
/// (the last branch is not always integral).
pub fn g_k_given_s(m: usize) -> Result<BigRational> {
    check_modes(m)?;
    let int = |v: BigCount| BigRational::from_integer(v.into());
    if m <= 7 {
        return Ok(int(BigCount::from(m - 1)));
    }
    let four = BigCount::from(4u32);
    if m.is_multiple_of(5) {
        return Ok(int(Pow::pow(&four, m / 5)));
    }
    let base = int(Pow::pow(&four, m.div_ceil(5)));
    let exponent = (5 - m % 5) as i32;
    let three_quarters = BigRational::new(3.into(), 4.into());
    Ok(base * Pow::pow(three_quarters, exponent))
}

/// Converts an exact rational to `f64` for display.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact decimal rendering when the denominator has only factors 2 and 5
/// (`81/4` becomes `20.25`); `p/q` otherwise.
pub fn rational_to_exact_string(r: &BigRational) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut d = r.denom().clone();
    let mut digits = 0usize;
    let (two, five, ten) = (BigInt::from(2), BigInt::from(5), BigInt::from(10));
    while (&d % &two).is_zero() || (&d % &five).is_zero() {
        d = if (&d % &ten).is_zero() {
            &d / &ten
        } else if (&d % &two).is_zero() {
            &d / &two
        } else {
            &d / &five
        };
        digits += 1;
    }
    if !d.is_one() {
        return r.to_string();
    }
    let scaled = r * BigRational::from_integer(Pow::pow(&ten, digits));
    let mut text = scaled.to_integer().magnitude().to_string();
    while text.len() <= digits {
        text.insert(0, '0');
    }
    let point = text.len() - digits;
    let body = format!("{}.{}", &text[..point], text[point..].trim_end_matches('0'));
    if r.numer().sign() == Sign::Minus { format!("-{body}") } else { body }
}
