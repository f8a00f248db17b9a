//! Median-of-means over equal-size blocks.
//!
//! The median of `Q` values is the `⌈Q/2⌉`-th order statistic (the lower
//! median for even `Q`), so it is always attained by some block. Odd `Q` is
//! the usual choice.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{invalid, MonkError, Result};

/// `Q` disjoint equal-size blocks of `[0, n)` induced by a permutation.
///
/// Block `q` holds `perm[q·m .. (q+1)·m]` with `m = ⌊n/Q⌋`. When `n` is not
/// a multiple of `Q` (drop-remainder mode), the trailing `n mod Q` entries of
/// the permutation belong to no block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    n: usize,
    perm: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl BlockPartition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_size(&self) -> usize {
        self.blocks.first().map_or(0, Vec::len)
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, q: usize) -> &[usize] {
        &self.blocks[q]
    }

    /// Indices covered by some block.
    pub fn covered(&self) -> usize {
        self.block_size() * self.q_count()
    }
}

/// Builds the partition `S_q = {σ(q·m), …, σ((q+1)·m − 1)}`, `m = n/Q`.
pub fn make_partition(
    n: usize,
    q: usize,
    perm: Vec<usize>,
    drop_remainder: bool,
) -> Result<BlockPartition> {
    if q == 0 {
        return Err(invalid("Q", "must be >= 1"));
    }
    if q > n {
        return Err(invalid("Q", format!("{q} blocks exceed {n} samples")));
    }
    if n % q != 0 && !drop_remainder {
        return Err(MonkError::NotDivisible { n, q });
    }
    if perm.len() != n {
        return Err(MonkError::DimensionMismatch {
            expected: n,
            got: perm.len(),
        });
    }
    let mut seen = vec![false; n];
    for &i in &perm {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(invalid("perm", format!("not a permutation of 0..{n}")));
        }
    }
    let m = n / q;
    let blocks = perm.chunks_exact(m).take(q).map(<[usize]>::to_vec).collect();
    Ok(BlockPartition { n, perm, blocks })
}

/// Partition induced by a uniformly random permutation drawn from `rng`.
pub fn random_partition<R: Rng + ?Sized>(
    n: usize,
    q: usize,
    drop_remainder: bool,
    rng: &mut R,
) -> Result<BlockPartition> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    make_partition(n, q, perm, drop_remainder)
}

/// Block means of `values` over `part`.
pub fn block_means(values: &[f64], part: &BlockPartition) -> Result<Vec<f64>> {
    if values.len() != part.n() {
        return Err(MonkError::DimensionMismatch {
            expected: part.n(),
            got: values.len(),
        });
    }
    Ok(part
        .blocks()
        .iter()
        .map(|b| b.iter().map(|&i| values[i]).sum::<f64>() / b.len() as f64)
        .collect())
}

/// Median of block means.
pub fn mon_estimate(values: &[f64], part: &BlockPartition) -> Result<f64> {
    let means = block_means(values, part)?;
    Ok(median_block(&means)?.1)
}

/// Position of the `⌈Q/2⌉`-th smallest value, together with that value.
/// Ties resolve to the lowest index.
pub fn median_block(block_values: &[f64]) -> Result<(usize, f64)> {
    if block_values.is_empty() {
        return Err(MonkError::Empty("median of zero blocks"));
    }
    let mut sorted = block_values.to_vec();
    let k = (block_values.len() + 1) / 2 - 1;
    let (_, median, _) = sorted.select_nth_unstable_by(k, f64::total_cmp);
    let median = *median;
    let q = block_values
        .iter()
        .position(|v| v.total_cmp(&median).is_eq())
        .expect("median is drawn from the input");
    Ok((q, median))
}
