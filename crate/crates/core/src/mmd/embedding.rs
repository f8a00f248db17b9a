//! Kernel expansions and the median-of-means mean embedding.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::BcdConfig;
use crate::error::{MonkError, Result};
use crate::kernels::{gram, Kernel};
use crate::linalg::Matrix;
use crate::mon::{median_block, random_partition};
use crate::sample::Sample;

/// `f = Σ a_n k(·,x_n) + Σ b_n k(·,y_n)` with `c = [a; b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefExpansion {
    pub base_x: Sample,
    pub base_y: Sample,
    pub c: Vec<f64>,
}

impl CoefExpansion {
    pub fn new(base_x: Sample, base_y: Sample, c: Vec<f64>) -> Result<Self> {
        let expected = base_x.len() + base_y.len();
        if c.len() != expected {
            return Err(MonkError::DimensionMismatch {
                expected,
                got: c.len(),
            });
        }
        if !base_y.is_empty() && base_x.kind() != base_y.kind() {
            return Err(MonkError::Unsupported(format!(
                "mixed sample kinds {} and {}",
                base_x.kind(),
                base_y.kind()
            )));
        }
        Ok(CoefExpansion { base_x, base_y, c })
    }

    /// `Σ c_n k(·,x_n)` over a single sample.
    pub fn over(xs: Sample, c: Vec<f64>) -> Result<Self> {
        let empty = xs.empty_like();
        CoefExpansion::new(xs, empty, c)
    }

    /// The empirical mean embedding `(1/n)·Σ k(·,x_n)`.
    pub fn empirical_mean(xs: &Sample) -> Result<Self> {
        if xs.is_empty() {
            return Err(MonkError::Empty("mean embedding of an empty sample"));
        }
        let w = 1.0 / xs.len() as f64;
        CoefExpansion::over(xs.clone(), vec![w; xs.len()])
    }

    fn points(&self) -> Result<Sample> {
        if self.base_y.is_empty() {
            Ok(self.base_x.clone())
        } else {
            self.base_x.concat(&self.base_y)
        }
    }
}

/// `⟨f, g⟩_k = fᵀ K_fg g`.
fn inner(f: &CoefExpansion, g: &CoefExpansion, k: &Kernel) -> Result<f64> {
    let (pf, pg) = (f.points()?, g.points()?);
    let kfg = gram(k, &pf, &pg)?;
    let kg = kfg.matvec(&g.c)?;
    Ok(f.c.iter().zip(&kg).map(|(a, b)| a * b).sum())
}

/// `‖f − g‖_k`, clamped at zero before the root.
pub fn rkhs_distance(f: &CoefExpansion, g: &CoefExpansion, k: &Kernel) -> Result<f64> {
    let pf = f.points()?;
    let pg = g.points()?;
    let ff = gram(k, &pf, &pf)?.quad_form(&f.c)?;
    let gg = gram(k, &pg, &pg)?.quad_form(&g.c)?;
    let fg = inner(f, g, k)?;
    Ok((ff - 2.0 * fg + gg).max(0.0).sqrt())
}

/// Median-of-means estimate of the mean embedding of `xs`.
///
/// A heuristic alternating solver: starting from `f = 0`, each iteration
/// reshuffles the blocks, scores block `q` by the block mean of
/// `x ↦ ‖f − k(·,x)‖² − ‖μ_{S_q} − k(·,x)‖²`, which equals
/// `‖f − μ_{S_q}‖²`, and moves `f` to the empirical embedding `μ_{S_{q_m}}`
/// of the median-scoring block. Uses `cfg.q`, `cfg.iterations`,
/// `cfg.drop_remainder` and `cfg.early_stop`.
pub fn monk_mean_embedding(k: &Kernel, xs: &Sample, cfg: &BcdConfig, seed: u64) -> Result<CoefExpansion> {
    let n = xs.len();
    if n == 0 {
        return Err(MonkError::Empty("mean embedding of an empty sample"));
    }
    if cfg.iterations == 0 {
        return Err(crate::error::invalid("T", "must be >= 1"));
    }
    if cfg.q == 0 || cfg.q > n {
        return Err(crate::error::invalid("Q", format!("must lie in [1, {n}], got {}", cfg.q)));
    }
    if n % cfg.q != 0 && !cfg.drop_remainder {
        return Err(MonkError::NotDivisible { n, q: cfg.q });
    }
    let kxx = gram(k, xs, xs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut f = vec![0.0; n];
    let mut kf = vec![0.0; n];
    let mut ff = 0.0;
    let mut last: Option<f64> = None;
    let mut flat = 0;
    for _ in 0..cfg.iterations {
        let part = random_partition(n, cfg.q, cfg.drop_remainder, &mut rng)?;
        let scores: Vec<f64> = part
            .blocks()
            .iter()
            .map(|b| {
                let m = b.len() as f64;
                let cross: f64 = b.iter().map(|&i| kf[i]).sum::<f64>() / m;
                ff - 2.0 * cross + block_self(&kxx, b) / (m * m)
            })
            .collect();
        let (qm, median) = median_block(&scores)?;
        let block = part.block(qm);
        f = vec![0.0; n];
        let w = 1.0 / block.len() as f64;
        for &i in block {
            f[i] = w;
        }
        kf = kxx.matvec(&f)?;
        ff = f.iter().zip(&kf).map(|(a, b)| a * b).sum();

        match last {
            Some(prev) if (median - prev).abs() < 1e-12 => flat += 1,
            _ => flat = 0,
        }
        last = Some(median);
        if cfg.early_stop && flat >= 10 {
            break;
        }
    }
    CoefExpansion::over(xs.clone(), f)
}

/// `Σ_{i,j∈S} K_ij`.
fn block_self(k: &Matrix, block: &[usize]) -> f64 {
    block
        .iter()
        .map(|&i| {
            let row = k.row(i);
            block.iter().map(|&j| row[j]).sum::<f64>()
        })
        .sum()
}
