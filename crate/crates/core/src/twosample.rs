//! Permutation two-sample test with kernel selection on a held-out split.
//!
//! The pooled data are split at random into three equal parts: the kernel is
//! chosen on the first, the null quantile is estimated by permuting the
//! second, and the test statistic is computed on the third.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::derive_seed;
use crate::error::{invalid, MonkError, Result};
use crate::kernels::{AggregatedGram, Kernel};
use crate::mmd::{Estimator, Method};
use crate::sample::Sample;

const SPLIT_STREAM: u64 = 0;
const TUNE_STREAM: u64 = 1;
const BOOT_STREAM: u64 = 2;
const STAT_STREAM: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub estimator: Method,
    /// Kernel selected on the first split.
    pub theta_hat: Kernel,
    /// Statistic on the third split.
    pub statistic: f64,
    /// Estimated `(1 − α)`-quantile of the permutation distribution.
    pub quantile: f64,
    pub alpha: f64,
    pub b_boot: usize,
    pub reject: bool,
    /// `statistic − quantile`; the null is rejected iff it is positive.
    pub diff: f64,
    /// Set when `3 ∤ N` and trailing shuffled points were left out.
    pub truncated: bool,
}

/// The `⌈(1 − α)·B⌉`-th smallest of `B` values.
pub fn empirical_quantile(values: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if values.is_empty() {
        return Err(MonkError::Empty("quantile of zero values"));
    }
    let b = values.len();
    // The small slack keeps e.g. 0.95·100 from rounding up to 96.
    let rank = (((1.0 - alpha) * b as f64) - 1e-9).ceil().clamp(1.0, b as f64) as usize;
    let mut sorted = values.to_vec();
    let (_, v, _) = sorted.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(*v)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(invalid("alpha", format!("must lie in (0, 1), got {alpha}")))
    }
}

fn check_pair(xs: &Sample, ys: &Sample) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(MonkError::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    Ok(())
}

/// Grid element with the largest statistic on `(xs1, ys1)`; ties go to the
/// earliest element and failing elements are skipped.
pub fn tune_kernel(xs1: &Sample, ys1: &Sample, grid: &[Kernel], estimator: &Estimator, seed: u64) -> Result<Kernel> {
    check_pair(xs1, ys1)?;
    let grams: Vec<Option<AggregatedGram>> = grid
        .iter()
        .map(|k| AggregatedGram::new(k, xs1, ys1).ok())
        .collect();
    pick_best(grid, &grams, estimator, seed).map(|i| grid[i])
}

fn pick_best(grid: &[Kernel], grams: &[Option<AggregatedGram>], estimator: &Estimator, seed: u64) -> Result<usize> {
    if grid.is_empty() {
        return Err(MonkError::Empty("kernel grid"));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, g) in grams.iter().enumerate() {
        let Some(g) = g else { continue };
        let Ok(e) = estimator.estimate(g, seed) else { continue };
        if !e.value.is_finite() {
            continue;
        }
        if best.map_or(true, |(_, v)| e.value > v) {
            best = Some((i, e.value));
        }
    }
    best.map(|(i, _)| i).ok_or(MonkError::AllGridPointsFailed)
}

/// Statistics of `b` random relabelings of the pooled `2n×2n` Gram matrix.
/// Replicate `i` uses its own derived seed, so the output does not depend on
/// scheduling.
fn permutation_statistics(pooled: &AggregatedGram, estimator: &Estimator, b: usize, seed: u64) -> Result<Vec<f64>> {
    let two_n = 2 * pooled.n();
    (0..b)
        .into_par_iter()
        .map(|i| {
            let s = derive_seed(seed, i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let mut perm: Vec<usize> = (0..two_n).collect();
            perm.shuffle(&mut rng);
            let g = AggregatedGram::from_matrix(pooled.entries().select(&perm, &perm))?;
            Ok(estimator.estimate(&g, derive_seed(s, 1))?.value)
        })
        .collect()
}

/// Permutation estimate of the `(1 − α)`-quantile of the statistic under the
/// null, from `b` relabelings of the pooled `(xs2, ys2)`.
pub fn bootstrap_quantile(
    xs2: &Sample,
    ys2: &Sample,
    k: &Kernel,
    estimator: &Estimator,
    b: usize,
    alpha: f64,
    seed: u64,
) -> Result<f64> {
    check_pair(xs2, ys2)?;
    check_alpha(alpha)?;
    if b == 0 {
        return Err(invalid("B", "must be >= 1"));
    }
    let pooled = AggregatedGram::new(k, xs2, ys2)?;
    empirical_quantile(&permutation_statistics(&pooled, estimator, b, seed)?, alpha)
}

/// Split, tune, calibrate, and test with a single estimator.
pub fn two_sample_test(
    xs: &Sample,
    ys: &Sample,
    grid: &[Kernel],
    estimator: &Estimator,
    b: usize,
    alpha: f64,
    seed: u64,
) -> Result<TestResult> {
    let runner = TwoSampleTest {
        grid: grid.to_vec(),
        b_boot: b,
        alpha,
    };
    Ok(runner.run(xs, ys, std::slice::from_ref(estimator), seed)?.remove(0))
}

/// Test settings shared across estimators. Running several estimators in
/// one call reuses the split and the Gram matrices between them.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSampleTest {
    pub grid: Vec<Kernel>,
    pub b_boot: usize,
    pub alpha: f64,
}

impl TwoSampleTest {
    pub fn run(&self, xs: &Sample, ys: &Sample, estimators: &[Estimator], seed: u64) -> Result<Vec<TestResult>> {
        check_pair(xs, ys)?;
        check_alpha(self.alpha)?;
        if self.b_boot == 0 {
            return Err(invalid("B", "must be >= 1"));
        }
        if self.grid.is_empty() {
            return Err(MonkError::Empty("kernel grid"));
        }
        let n = xs.len();
        if n < 3 {
            return Err(MonkError::TooFewSamples { needed: 3, got: n });
        }
        let m = n / 3;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, SPLIT_STREAM)));
        let parts: Vec<(Sample, Sample)> = perm
            .chunks_exact(m)
            .take(3)
            .map(|idx| (xs.select(idx), ys.select(idx)))
            .collect();
        let shared = std::ptr::eq(xs, ys);
        let gram_of = |part: &(Sample, Sample), k: &Kernel| {
            if shared {
                AggregatedGram::new(k, &part.0, &part.0)
            } else {
                AggregatedGram::new(k, &part.0, &part.1)
            }
        };

        let tune_grams: Vec<Option<AggregatedGram>> = if self.grid.len() == 1 {
            vec![None]
        } else {
            self.grid.iter().map(|k| gram_of(&parts[0], k).ok()).collect()
        };
        let mut calib: Vec<Option<AggregatedGram>> = (0..self.grid.len()).map(|_| None).collect();
        let mut stat: Vec<Option<AggregatedGram>> = (0..self.grid.len()).map(|_| None).collect();

        let mut out = Vec::with_capacity(estimators.len());
        for est in estimators {
            let ki = if self.grid.len() == 1 {
                0
            } else {
                pick_best(&self.grid, &tune_grams, est, derive_seed(seed, TUNE_STREAM))?
            };
            let k = self.grid[ki];
            if calib[ki].is_none() {
                calib[ki] = Some(gram_of(&parts[1], &k)?);
                stat[ki] = Some(gram_of(&parts[2], &k)?);
            }
            let boot = permutation_statistics(
                calib[ki].as_ref().expect("built above"),
                est,
                self.b_boot,
                derive_seed(seed, BOOT_STREAM),
            )?;
            let quantile = empirical_quantile(&boot, self.alpha)?;
            let statistic = est
                .estimate(stat[ki].as_ref().expect("built above"), derive_seed(seed, STAT_STREAM))?
                .value;
            let diff = statistic - quantile;
            out.push(TestResult {
                estimator: est.method(),
                theta_hat: k,
                statistic,
                quantile,
                alpha: self.alpha,
                b_boot: self.b_boot,
                reject: diff > 0.0,
                diff,
                truncated: n % 3 != 0,
            });
        }
        Ok(out)
    }
}
