//! Block-coordinate-descent solvers for the median-of-means MMD.
//!
//! Both solvers maximize `med_q ⟨f, μ_{S_q,P} − μ_{S_q,Q}⟩` over the unit ball
//! of the RKHS. With `f = Σ a_n k(·,x_n) + Σ b_n k(·,y_n)` and `c = [a; b]`,
//! block `q` contributes `|S_q|⁻¹·[1_q; −1_q]ᵀ K c` under `cᵀKc ≤ 1`. Each
//! step picks the block attaining the median and sets `c` to the maximizer of
//! that block's objective alone, `v / √(vᵀKv)` with `v = [1_q; −1_q]`.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Method, MmdEstimate};
use crate::error::{invalid, MonkError, Result};
use crate::kernels::{AggregatedGram, GramSource, Kernel, KernelGram};
use crate::linalg::Matrix;
use crate::mon::{median_block, random_partition, BlockPartition};
use crate::sample::Sample;

/// Consecutive near-identical median objectives that end the iteration.
const PLATEAU_LEN: usize = 10;
const PLATEAU_TOL: f64 = 1e-12;
/// `vᵀKv` below this fraction of `‖v‖²·mean diag(K)` is treated as zero.
const DEGENERATE_REL: f64 = 1e-13;

/// When the fast solver reshuffles and rebuilds its blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RebuildSchedule {
    /// Iterations `1, 1 + p, 1 + 2p, …`. `None` uses `p = 10`.
    Every(Option<usize>),
    /// Explicit 1-based iteration indices. Iteration 1 always rebuilds.
    At(BTreeSet<usize>),
}

impl RebuildSchedule {
    fn rebuilds_at(&self, t: usize) -> bool {
        if t == 1 {
            return true;
        }
        match self {
            RebuildSchedule::Every(period) => {
                let p = period.unwrap_or(10).max(1);
                (t - 1) % p == 0
            }
            RebuildSchedule::At(set) => set.contains(&t),
        }
    }
}

/// Starting point of the fast solver's per-block coefficients after each
/// reshuffle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FastInit {
    /// `c_q` maximizes its own block objective, so the iterate already
    /// solves the block-local problem.
    #[default]
    BlockOptimal,
    /// `c_q = 0`. Only the median block moves per iteration, so once more
    /// than half of the blocks have been updated the median stops changing:
    /// the output is then the smallest updated block value, and it is 0 if
    /// fewer than `⌈Q/2⌉` updates happen after the last reshuffle.
    Zero,
}

/// Settings shared by the two BCD solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct BcdConfig {
    /// Number of blocks `Q`.
    pub q: usize,
    /// Maximum number of iterations `T`.
    pub iterations: usize,
    /// Allow `Q ∤ n` by leaving `n mod Q` shuffled points out of every block.
    pub drop_remainder: bool,
    /// Stop once the median objective is flat for 10 iterations.
    pub early_stop: bool,
    /// Fast solver only.
    pub rebuild: RebuildSchedule,
    /// Fast solver only.
    pub fast_init: FastInit,
}

impl Default for BcdConfig {
    fn default() -> Self {
        BcdConfig {
            q: 1,
            iterations: 100,
            drop_remainder: false,
            early_stop: true,
            rebuild: RebuildSchedule::Every(None),
            fast_init: FastInit::BlockOptimal,
        }
    }
}

impl BcdConfig {
    pub fn new(q: usize, iterations: usize) -> Self {
        BcdConfig {
            q,
            iterations,
            ..Default::default()
        }
    }

    pub fn with_drop_remainder(mut self, drop: bool) -> Self {
        self.drop_remainder = drop;
        self
    }

    pub fn with_early_stop(mut self, early_stop: bool) -> Self {
        self.early_stop = early_stop;
        self
    }

    pub fn with_rebuild(mut self, rebuild: RebuildSchedule) -> Self {
        self.rebuild = rebuild;
        self
    }

    pub fn with_fast_init(mut self, init: FastInit) -> Self {
        self.fast_init = init;
        self
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(invalid("T", "must be >= 1"));
        }
        if self.q == 0 || self.q > n {
            return Err(invalid("Q", format!("must lie in [1, {n}], got {}", self.q)));
        }
        if n % self.q != 0 && !self.drop_remainder {
            return Err(MonkError::NotDivisible { n, q: self.q });
        }
        Ok(())
    }
}

struct Plateau {
    last: Option<f64>,
    run: usize,
}

impl Plateau {
    fn new() -> Self {
        Plateau { last: None, run: 0 }
    }

    /// Records a median value; true once it has been flat long enough.
    fn push(&mut self, value: f64) -> bool {
        match self.last {
            Some(prev) if (value - prev).abs() < PLATEAU_TOL => self.run += 1,
            _ => self.run = 0,
        }
        self.last = Some(value);
        self.run >= PLATEAU_LEN
    }

    fn reset(&mut self) {
        *self = Plateau::new();
    }
}

/// `[1_S; −1_S]` over `2n` pooled coordinates.
fn block_indicator(n: usize, block: &[usize]) -> Vec<f64> {
    let mut v = vec![0.0; 2 * n];
    for &i in block {
        v[i] = 1.0;
        v[n + i] = -1.0;
    }
    v
}

/// `√(vᵀKv)`, or `None` when the block's embedding difference vanishes
/// (every feasible `c` then scores zero on it).
fn unit_scale(vkv: f64, v_sq: f64, mean_diag: f64) -> Option<f64> {
    if vkv <= DEGENERATE_REL * v_sq * mean_diag.abs() || vkv <= 0.0 {
        None
    } else {
        Some(vkv.sqrt())
    }
}

/// Per-block objectives `(1/|S_q|)·Σ_{i∈S_q} ((Kc)_i − (Kc)_{n+i})` from a
/// precomputed `Kc`.
fn objectives_from_kc(kc: &[f64], n: usize, part: &BlockPartition) -> Vec<f64> {
    part.blocks()
        .iter()
        .map(|b| {
            let s: f64 = b.iter().map(|&i| kc[i] - kc[n + i]).sum();
            s / b.len() as f64
        })
        .collect()
}

/// `K·c` for symmetric `K`, skipping zero coefficients.
fn sparse_kc(k: &Matrix, c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; k.rows()];
    for (j, &cj) in c.iter().enumerate() {
        if cj == 0.0 {
            continue;
        }
        for (o, kv) in out.iter_mut().zip(k.row(j)) {
            *o += cj * kv;
        }
    }
    out
}

/// The projections `⟨f, μ_{S_q,P} − μ_{S_q,Q}⟩ = |S_q|⁻¹·[1_q; −1_q]ᵀ K c`.
pub fn block_objectives(g: &AggregatedGram, coefficients: &[f64], part: &BlockPartition) -> Result<Vec<f64>> {
    let n = g.n();
    if coefficients.len() != 2 * n {
        return Err(MonkError::DimensionMismatch {
            expected: 2 * n,
            got: coefficients.len(),
        });
    }
    if part.n() != n {
        return Err(MonkError::DimensionMismatch {
            expected: n,
            got: part.n(),
        });
    }
    let kc = sparse_kc(g.entries(), coefficients);
    Ok(objectives_from_kc(&kc, n, part))
}

/// MONK BCD on the full aggregated Gram matrix.
///
/// Every iteration draws a fresh permutation, rebuilds the blocks, finds the
/// median-attaining block `q_m` under the current `c`, and replaces `c` with
/// `v / ‖Lᵀv‖` for `v = [1_{q_m}; −1_{q_m}]` and `K = LLᵀ`. The estimate is
/// the median block objective of the final `c` under the last partition. The
/// iteration starts from `c = 0`.
///
/// `‖Lᵀv‖² = vᵀKv` is read off the product `Kv`, which the next iteration
/// needs anyway, so no factorization of `K` is formed and every iterate
/// satisfies `cᵀKc = 1`.
pub fn monk_bcd(g: &AggregatedGram, cfg: &BcdConfig, seed: u64) -> Result<MmdEstimate> {
    let n = g.n();
    cfg.check(n)?;
    let k = g.entries();
    let mean_diag = k.trace() / (2 * n) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut coefficients = vec![0.0; 2 * n];
    let mut kc = vec![0.0; 2 * n];
    let mut trace = Vec::with_capacity(cfg.iterations);
    let mut plateau = Plateau::new();
    let mut part = None;

    for _ in 0..cfg.iterations {
        let p = random_partition(n, cfg.q, cfg.drop_remainder, &mut rng)?;
        let objectives = objectives_from_kc(&kc, n, &p);
        let (qm, median) = median_block(&objectives)?;
        trace.push(median);

        let v = block_indicator(n, p.block(qm));
        let kv = sparse_kc(k, &v);
        let norm_sq: f64 = v.iter().zip(&kv).map(|(a, b)| a * b).sum();
        let v_sq = 2.0 * p.block(qm).len() as f64;
        if let Some(norm) = unit_scale(norm_sq, v_sq, mean_diag) {
            coefficients = v.iter().map(|x| x / norm).collect();
            kc = kv.iter().map(|x| x / norm).collect();
        } else {
            coefficients = vec![0.0; 2 * n];
            kc = vec![0.0; 2 * n];
        }
        part = Some(p);
        if cfg.early_stop && plateau.push(median) {
            break;
        }
    }

    let part = part.expect("at least one iteration");
    let objectives = objectives_from_kc(&kc, n, &part);
    let (qm, value) = median_block(&objectives)?;
    Ok(MmdEstimate {
        value,
        method: Method::MonkBcd,
        q_count: cfg.q,
        iterations_run: trace.len(),
        objective_trace: trace,
        seed,
        squared: None,
        median_block: Some(qm),
        coefficients,
        partition: Some(part),
    })
}

struct FastBlock {
    gram: Matrix,
    objective: f64,
    updated: bool,
}

impl FastBlock {
    /// Sets `c_q = v / √(vᵀK_qv)` with `v = [1; −1]` and records its
    /// objective `vᵀK_qc_q / m = √(vᵀK_qv) / m`.
    fn update(&mut self) {
        let m = self.gram.rows() / 2;
        let mut vkv = 0.0;
        for i in 0..2 * m {
            let row = self.gram.row(i);
            let s: f64 = row[..m].iter().sum::<f64>() - row[m..].iter().sum::<f64>();
            vkv += if i < m { s } else { -s };
        }
        let mean_diag = self.gram.trace() / (2 * m) as f64;
        self.objective = unit_scale(vkv, (2 * m) as f64, mean_diag).map_or(0.0, |norm| norm / m as f64);
        self.updated = true;
    }
}

fn build_blocks<G: GramSource + ?Sized>(source: &G, part: &BlockPartition, init: FastInit) -> Result<Vec<FastBlock>> {
    let n = source.side_len();
    part.blocks()
        .iter()
        .map(|b| {
            let idx: Vec<usize> = b.iter().copied().chain(b.iter().map(|&i| i + n)).collect();
            let gram = source.principal_submatrix(&idx)?;
            let mut block = FastBlock {
                gram,
                objective: 0.0,
                updated: false,
            };
            if init == FastInit::BlockOptimal {
                block.update();
            }
            Ok(block)
        })
        .collect()
}

/// MONK BCD-Fast on an arbitrary Gram source.
///
/// Each block keeps its own Gram matrix `K_q` and coefficients `c_q`; the
/// objective of block `q` only involves points of `S_q`. Blocks are
/// reshuffled and rebuilt at the iterations selected by
/// [`BcdConfig::rebuild`], with every `c_q` reset according to
/// [`BcdConfig::fast_init`]. Each iteration updates only `c_{q_m}`.
///
/// Early stopping is only considered once every block of the current
/// partition has been updated since the last rebuild.
pub fn monk_bcd_fast_with<G: GramSource + ?Sized>(source: &G, cfg: &BcdConfig, seed: u64) -> Result<MmdEstimate> {
    let n = source.side_len();
    cfg.check(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Vec::with_capacity(cfg.iterations);
    let mut plateau = Plateau::new();
    let mut blocks: Vec<FastBlock> = Vec::new();
    let mut part = None;

    for t in 1..=cfg.iterations {
        if cfg.rebuild.rebuilds_at(t) {
            let p = random_partition(n, cfg.q, cfg.drop_remainder, &mut rng)?;
            blocks = build_blocks(source, &p, cfg.fast_init)?;
            part = Some(p);
            plateau.reset();
        }
        let objectives: Vec<f64> = blocks.iter().map(|b| b.objective).collect();
        let (qm, median) = median_block(&objectives)?;
        trace.push(median);

        blocks[qm].update();

        let settled = blocks.iter().all(|b| b.updated);
        if cfg.early_stop && settled && plateau.push(median) {
            break;
        }
    }

    let objectives: Vec<f64> = blocks.iter().map(|b| b.objective).collect();
    let (qm, value) = median_block(&objectives)?;
    Ok(MmdEstimate {
        value,
        method: Method::MonkBcdFast,
        q_count: cfg.q,
        iterations_run: trace.len(),
        objective_trace: trace,
        seed,
        squared: None,
        median_block: Some(qm),
        coefficients: Vec::new(),
        partition: part,
    })
}

/// MONK BCD-Fast evaluating kernel entries on demand, so only the per-block
/// Gram matrices are ever formed.
pub fn monk_bcd_fast(k: &Kernel, xs: &Sample, ys: &Sample, cfg: &BcdConfig, seed: u64) -> Result<MmdEstimate> {
    let source = KernelGram::new(k, xs, ys)?;
    monk_bcd_fast_with(&source, cfg, seed)
}
