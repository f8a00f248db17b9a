//! MMD estimators and the median-of-means mean embedding.

mod analytic;
mod bcd;
mod classical;
mod diagnostics;
mod embedding;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use analytic::analytic_mmd_gaussian;
pub use bcd::{
    block_objectives, monk_bcd, monk_bcd_fast, monk_bcd_fast_with, BcdConfig, FastInit,
    RebuildSchedule,
};
pub use classical::{mmd_ustat, mmd_vstat};
pub use diagnostics::{
    cov_diagnostics, theorem_bound, BoundDiagnostics, BoundKind, BoundReport, CovarianceSummary,
};
pub use embedding::{monk_mean_embedding, rkhs_distance, CoefExpansion};

use crate::error::{MonkError, Result};
use crate::kernels::AggregatedGram;
use crate::mon::BlockPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "vstat")]
    VStat,
    #[serde(rename = "ustat")]
    UStat,
    #[serde(rename = "monk_bcd")]
    MonkBcd,
    #[serde(rename = "monk_bcd_fast")]
    MonkBcdFast,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::VStat => "vstat",
            Method::UStat => "ustat",
            Method::MonkBcd => "monk_bcd",
            Method::MonkBcdFast => "monk_bcd_fast",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = MonkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vstat" | "v-stat" => Ok(Method::VStat),
            "ustat" | "u-stat" => Ok(Method::UStat),
            "monk_bcd" | "monk-bcd" => Ok(Method::MonkBcd),
            "monk_bcd_fast" | "monk-bcd-fast" => Ok(Method::MonkBcdFast),
            other => Err(MonkError::Parse(format!("unknown estimator `{other}`"))),
        }
    }
}

/// Result of one MMD estimation.
#[derive(Debug, Clone)]
pub struct MmdEstimate {
    /// MMD-scale value. V-statistic: nonnegative root. U-statistic: the
    /// signed root `sign(u)·√|u|`. MONK: the raw median objective, which may
    /// be negative.
    pub value: f64,
    pub method: Method,
    pub q_count: usize,
    pub iterations_run: usize,
    /// Median block objective observed at each BCD iteration.
    pub objective_trace: Vec<f64>,
    pub seed: u64,
    /// Squared-scale statistic, for the U-statistic.
    pub squared: Option<f64>,
    /// Block attaining the reported median.
    pub median_block: Option<usize>,
    /// Final coefficient vector `[a; b]` (MONK BCD only).
    pub coefficients: Vec<f64>,
    /// Partition in force at the final iterate (MONK BCD only).
    pub partition: Option<BlockPartition>,
}

impl MmdEstimate {
    fn closed_form(value: f64, method: Method, squared: Option<f64>) -> Self {
        MmdEstimate {
            value,
            method,
            q_count: 1,
            iterations_run: 0,
            objective_trace: Vec::new(),
            seed: 0,
            squared,
            median_block: None,
            coefficients: Vec::new(),
            partition: None,
        }
    }
}

/// An MMD estimator with its settings, evaluated on an aggregated Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    VStat,
    UStat,
    MonkBcd(BcdConfig),
    MonkBcdFast(BcdConfig),
}

impl Estimator {
    pub fn method(&self) -> Method {
        match self {
            Estimator::VStat => Method::VStat,
            Estimator::UStat => Method::UStat,
            Estimator::MonkBcd(_) => Method::MonkBcd,
            Estimator::MonkBcdFast(_) => Method::MonkBcdFast,
        }
    }

    pub fn from_method(method: Method, config: BcdConfig) -> Self {
        match method {
            Method::VStat => Estimator::VStat,
            Method::UStat => Estimator::UStat,
            Method::MonkBcd => Estimator::MonkBcd(config),
            Method::MonkBcdFast => Estimator::MonkBcdFast(config),
        }
    }

    /// Number of blocks, 1 for the classical estimators.
    pub fn q_count(&self) -> usize {
        match self {
            Estimator::VStat | Estimator::UStat => 1,
            Estimator::MonkBcd(c) | Estimator::MonkBcdFast(c) => c.q,
        }
    }

    pub fn estimate(&self, g: &AggregatedGram, seed: u64) -> Result<MmdEstimate> {
        match self {
            Estimator::VStat => mmd_vstat(g),
            Estimator::UStat => mmd_ustat(g),
            Estimator::MonkBcd(cfg) => monk_bcd(g, cfg, seed),
            Estimator::MonkBcdFast(cfg) => monk_bcd_fast_with(g, cfg, seed),
        }
    }
}
