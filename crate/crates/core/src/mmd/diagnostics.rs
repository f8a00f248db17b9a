//! Empirical covariance summaries and the finite-sample error bounds built
//! from them.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{invalid, MonkError, Result};
use crate::kernels::{gram, Kernel};
use crate::sample::Sample;

/// Trace and operator norm of an (empirical) covariance operator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CovarianceSummary {
    pub trace: f64,
    pub opnorm: f64,
}

impl CovarianceSummary {
    /// Componentwise sum, used for the two-sample bound.
    pub fn sum(self, other: CovarianceSummary) -> CovarianceSummary {
        CovarianceSummary {
            trace: self.trace + other.trace,
            opnorm: self.opnorm + other.opnorm,
        }
    }
}

/// Empirical covariance summary of `k(·, x)` under the sample `xs`.
///
/// `trace = (1/n)Σ k(x_i,x_i) − (1/n²)ΣΣ k(x_i,x_j)` and `opnorm` is the
/// largest eigenvalue of `HKH / n` with `H` the centering matrix.
pub fn cov_diagnostics(k: &Kernel, xs: &Sample) -> Result<CovarianceSummary> {
    let n = xs.len();
    if n < 2 {
        return Err(MonkError::TooFewSamples { needed: 2, got: n });
    }
    let g = gram(k, xs, xs)?;
    let row_means: Vec<f64> = (0..n).map(|i| g.row(i).iter().sum::<f64>() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let centered = DMatrix::from_fn(n, n, |i, j| {
        (g[(i, j)] - row_means[i] - row_means[j] + grand) / n as f64
    });
    let trace = centered.trace().max(0.0);
    let top = SymmetricEigen::new(centered)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CovarianceSummary {
        trace,
        opnorm: top.max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Error of the mean embedding estimate of one distribution.
    MeanEmbedding,
    /// Error of the MMD estimate; uses the summed covariances of both samples.
    Mmd,
}

/// Inputs to the high-probability error bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundDiagnostics {
    pub cov: CovarianceSummary,
    pub delta: f64,
    pub eta: f64,
    pub n_corrupt: usize,
}

/// Bound value together with the block-count requirement it assumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub bound: f64,
    /// `72·δ⁻²·ln(1/η)`.
    pub q_required: f64,
    /// Whether `n_corrupt ≤ Q_required·(1/2 − δ)`.
    pub admissible: bool,
    /// Whether `⌈Q_required⌉ ≤ N`, so the required blocks can be formed.
    pub q_feasible: bool,
}

impl BoundDiagnostics {
    pub fn new(cov: CovarianceSummary, delta: f64, eta: f64, n_corrupt: usize) -> Result<Self> {
        if !(delta > 0.0 && delta <= 0.5) {
            return Err(invalid("delta", format!("must lie in (0, 1/2], got {delta}")));
        }
        if !(eta > 0.0 && eta < 1.0) {
            return Err(invalid("eta", format!("must lie in (0, 1), got {eta}")));
        }
        if !(cov.trace >= 0.0 && cov.opnorm >= 0.0) {
            return Err(invalid("cov", "trace and operator norm must be nonnegative"));
        }
        Ok(BoundDiagnostics {
            cov,
            delta,
            eta,
            n_corrupt,
        })
    }

    pub fn q_required(&self) -> f64 {
        72.0 * (1.0 / self.eta).ln() / (self.delta * self.delta)
    }

    /// Whether `n_corrupt ≤ q·(1/2 − δ)`.
    pub fn admissible_for(&self, q: usize) -> bool {
        self.n_corrupt as f64 <= q as f64 * (0.5 - self.delta)
    }
}

/// Right-hand side of the error bound at sample size `n`.
///
/// Mean embedding: `(12(1+√2)/δ)·max(√(6‖Σ‖ln(1/η)/(δN)), 2√(Tr Σ/N))`.
/// MMD: `(12/δ)·max(√((‖Σ_P‖+‖Σ_Q‖)ln(1/η)/(δN)), 2√((Tr Σ_P+Tr Σ_Q)/N))`,
/// with `d.cov` holding the summed covariances.
pub fn theorem_bound(d: &BoundDiagnostics, n: usize, which: BoundKind) -> Result<BoundReport> {
    if n == 0 {
        return Err(invalid("N", "must be >= 1"));
    }
    let n_f = n as f64;
    let log_term = (1.0 / d.eta).ln();
    let (lead, dev_factor) = match which {
        BoundKind::MeanEmbedding => (12.0 * (1.0 + 2f64.sqrt()) / d.delta, 6.0),
        BoundKind::Mmd => (12.0 / d.delta, 1.0),
    };
    let deviation = (dev_factor * d.cov.opnorm * log_term / (d.delta * n_f)).sqrt();
    let variance = 2.0 * (d.cov.trace / n_f).sqrt();
    let q_required = d.q_required();
    Ok(BoundReport {
        bound: lead * deviation.max(variance),
        q_required,
        admissible: d.n_corrupt as f64 <= q_required * (0.5 - d.delta),
        q_feasible: q_required.ceil() <= n_f,
    })
}
