//! Monte-Carlo experiment drivers behind the command-line interface.
//!
//! Both drivers are deterministic functions of their configuration apart
//! from the `wall_ms` column. Replications run in parallel; rows are emitted
//! in a fixed order.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{contaminate, sample_gaussian, sample_pareto, subsample, ContaminationSpec, SpliceData, SpliceLabel};
use crate::derive_seed;
use crate::error::{MonkError, Result};
use crate::kernels::{AggregatedGram, Kernel};
use crate::mmd::{analytic_mmd_gaussian, BcdConfig, Estimator, Method};
use crate::twosample::TwoSampleTest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    GaussClean,
    GaussOutliers,
    Pareto,
    Dna,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::GaussClean => "gauss_clean",
            ExperimentKind::GaussOutliers => "gauss_outliers",
            ExperimentKind::Pareto => "pareto",
            ExperimentKind::Dna => "dna",
        }
    }
}

/// A class pair of the splice-junction experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplicePair {
    #[serde(rename = "EI-IE")]
    EiIe,
    #[serde(rename = "EI-EI")]
    EiEi,
    #[serde(rename = "IE-IE")]
    IeIe,
}

impl SplicePair {
    pub const ALL: [SplicePair; 3] = [SplicePair::EiIe, SplicePair::EiEi, SplicePair::IeIe];

    pub fn as_str(&self) -> &'static str {
        match self {
            SplicePair::EiIe => "EI-IE",
            SplicePair::EiEi => "EI-EI",
            SplicePair::IeIe => "IE-IE",
        }
    }

    pub fn labels(&self) -> (SpliceLabel, SpliceLabel) {
        match self {
            SplicePair::EiIe => (SpliceLabel::EI, SpliceLabel::IE),
            SplicePair::EiEi => (SpliceLabel::EI, SpliceLabel::EI),
            SplicePair::IeIe => (SpliceLabel::IE, SpliceLabel::IE),
        }
    }
}

fn default_estimators() -> Vec<Method> {
    vec![Method::UStat, Method::VStat, Method::MonkBcd, Method::MonkBcdFast]
}
fn default_n_list() -> Vec<usize> {
    (1..=10).map(|i| 200 * i).collect()
}
fn default_q_list() -> Vec<usize> {
    vec![5]
}
fn default_reps() -> usize {
    100
}
fn default_t() -> usize {
    100
}
fn default_b() -> usize {
    150
}
fn default_alpha() -> f64 {
    0.05
}
fn default_m1() -> f64 {
    0.2
}
fn default_s1() -> f64 {
    0.7
}
fn default_m2() -> f64 {
    0.9
}
fn default_s2() -> f64 {
    0.4
}
fn default_pareto_alpha() -> f64 {
    3.0
}
fn default_pairs() -> Vec<SplicePair> {
    SplicePair::ALL.to_vec()
}

/// Flat JSON experiment description. Keys not listed here are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Defaults to `poly:degree=2,c=1`, or the default subsequence kernel
    /// for `dna`.
    #[serde(default)]
    pub kernel: Option<String>,
    /// Candidate kernels for the two-sample test; defaults to `[kernel]`.
    #[serde(default)]
    pub kernel_grid: Vec<String>,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<Method>,
    #[serde(rename = "N_list", default = "default_n_list")]
    pub n_list: Vec<usize>,
    #[serde(rename = "Q_list", default = "default_q_list")]
    pub q_list: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(rename = "T", default = "default_t")]
    pub t: usize,
    #[serde(rename = "B", default = "default_b")]
    pub b: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub drop_remainder: bool,
    #[serde(default)]
    pub contamination: Option<ContaminationSpec>,
    #[serde(default = "default_m1")]
    pub m1: f64,
    #[serde(default = "default_s1")]
    pub s1: f64,
    #[serde(default = "default_m2")]
    pub m2: f64,
    #[serde(default = "default_s2")]
    pub s2: f64,
    #[serde(default = "default_pareto_alpha")]
    pub pareto_alpha: f64,
    #[serde(default)]
    pub data: Option<PathBuf>,
    #[serde(default = "default_pairs")]
    pub pairs: Vec<SplicePair>,
    /// Debug switch: test each side against itself, so no test can reject.
    #[serde(default)]
    pub same_sample: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| MonkError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| MonkError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn kernel(&self) -> Result<Kernel> {
        match (&self.kernel, self.experiment) {
            (Some(s), _) => s.parse().map_err(|e: MonkError| MonkError::Config(e.to_string())),
            (None, ExperimentKind::Dna) => Ok(Kernel::ssk_default()),
            (None, _) => Ok(Kernel::quadratic()),
        }
    }

    pub fn grid(&self) -> Result<Vec<Kernel>> {
        if self.kernel_grid.is_empty() {
            return Ok(vec![self.kernel()?]);
        }
        self.kernel_grid
            .iter()
            .map(|s| s.parse().map_err(|e: MonkError| MonkError::Config(e.to_string())))
            .collect()
    }

    fn bcd(&self, q: usize) -> BcdConfig {
        BcdConfig::new(q, self.t).with_drop_remainder(self.drop_remainder)
    }

    /// Checks the settings that every driver relies on.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(MonkError::Config(m));
        self.grid()?;
        if self.estimators.is_empty() {
            return fail("`estimators` is empty".into());
        }
        if self.n_list.is_empty() || self.q_list.is_empty() {
            return fail("`N_list` and `Q_list` must be non-empty".into());
        }
        if self.reps == 0 {
            return fail("`reps` must be >= 1".into());
        }
        if self.t == 0 {
            return fail("`T` must be >= 1".into());
        }
        let split = |n: usize| if self.experiment == ExperimentKind::Dna { n / 3 } else { n };
        for &n in &self.n_list {
            let n_eff = split(n);
            if n_eff == 0 {
                return fail(format!("N={n} is too small"));
            }
            for &q in &self.q_list {
                if q == 0 || q > n_eff {
                    return fail(format!("Q={q} is out of range for N={n}"));
                }
                if n_eff % q != 0 && !self.drop_remainder {
                    return fail(format!(
                        "Q={q} does not divide {n_eff} (N={n}); enable drop_remainder"
                    ));
                }
            }
        }
        match self.experiment {
            ExperimentKind::GaussClean | ExperimentKind::GaussOutliers => {
                if !(self.s1 > 0.0 && self.s2 > 0.0) {
                    return fail("`s1` and `s2` must be positive".into());
                }
            }
            ExperimentKind::Pareto => {
                if !(self.pareto_alpha > 0.0) {
                    return fail("`pareto_alpha` must be positive".into());
                }
            }
            ExperimentKind::Dna => {
                if self.q_list.len() != 1 {
                    return fail("the dna experiment takes a single Q".into());
                }
                if self.b == 0 {
                    return fail("`B` must be >= 1".into());
                }
                if !(self.alpha > 0.0 && self.alpha < 1.0) {
                    return fail("`alpha` must lie in (0, 1)".into());
                }
                if self.pairs.is_empty() {
                    return fail("`pairs` is empty".into());
                }
            }
        }
        if let Some(c) = &self.contamination {
            if let Some(&n) = self.n_list.iter().find(|&&n| c.n_corrupt > n) {
                return fail(format!("n_corrupt={} exceeds N={n}", c.n_corrupt));
            }
        }
        Ok(())
    }

    fn contamination(&self) -> Option<ContaminationSpec> {
        match (self.experiment, self.contamination) {
            (ExperimentKind::GaussOutliers, None) => Some(ContaminationSpec {
                n_corrupt: 5,
                x_value: 2000.0,
                y_value: 4000.0,
            }),
            (_, c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exp1Row {
    pub experiment: &'static str,
    pub kernel: String,
    pub estimator: &'static str,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Q")]
    pub q: usize,
    pub rep: usize,
    pub seed: u64,
    pub mmd_hat: Option<f64>,
    pub mmd_true: f64,
    pub abs_error: Option<f64>,
    pub wall_ms: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exp2Row {
    pub pair: &'static str,
    #[serde(rename = "N")]
    pub n: usize,
    pub rep: usize,
    pub seed: u64,
    pub estimator: &'static str,
    pub mmd_hat: Option<f64>,
    pub q_hat: Option<f64>,
    pub diff: Option<f64>,
    pub error: String,
}

/// Seed of replication `rep` at sample size `n`.
pub fn replication_seed(seed: u64, n: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(seed, n as u64), rep as u64)
}

/// Value compared against the true MMD. MONK outputs are clamped at zero
/// since the true value is nonnegative.
fn comparison_value(method: Method, value: f64) -> f64 {
    match method {
        Method::MonkBcd | Method::MonkBcdFast => value.max(0.0),
        Method::VStat | Method::UStat => value,
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Synthetic-data sweep: one row per (estimator, N, Q, rep).
pub fn run_experiment1(cfg: &ExperimentConfig) -> Result<Vec<Exp1Row>> {
    if cfg.experiment == ExperimentKind::Dna {
        return Err(MonkError::Config("use the dna driver for the dna experiment".into()));
    }
    cfg.validate()?;
    let kernel = cfg.kernel()?;
    let mmd_true = match cfg.experiment {
        ExperimentKind::Pareto => 0.0,
        _ => analytic_mmd_gaussian(&kernel, cfg.m1, cfg.s1, cfg.m2, cfg.s2)
            .map_err(|e| MonkError::Config(e.to_string()))?,
    };
    let contamination = cfg.contamination();
    let kernel_name = kernel.to_string();

    let jobs: Vec<(usize, usize)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| (0..cfg.reps).map(move |rep| (n, rep)))
        .collect();
    // results[job][estimator][q]
    let results: Vec<Vec<Vec<Exp1Row>>> = jobs
        .par_iter()
        .map(|&(n, rep)| {
            let seed = replication_seed(cfg.seed, n, rep);
            let row = |method: Method, q: usize, value: Result<f64>, wall_ms: f64| {
                let (mmd_hat, abs_error, error) = match value {
                    Ok(v) => (Some(v), Some((comparison_value(method, v) - mmd_true).abs()), String::new()),
                    Err(e) => (None, None, e.to_string()),
                };
                Exp1Row {
                    experiment: cfg.experiment.as_str(),
                    kernel: kernel_name.clone(),
                    estimator: method.as_str(),
                    n,
                    q,
                    rep,
                    seed,
                    mmd_hat,
                    mmd_true,
                    abs_error,
                    wall_ms,
                    error,
                }
            };

            let start = Instant::now();
            let gram = generate_pair(cfg, n, seed, contamination.as_ref())
                .and_then(|(xs, ys)| AggregatedGram::new(&kernel, &xs, &ys));
            let gram_ms = elapsed_ms(start);

            cfg.estimators
                .iter()
                .map(|&method| {
                    cfg.q_list
                        .iter()
                        .map(|&q| {
                            let g = match &gram {
                                Ok(g) => g,
                                Err(e) => return row(method, q, Err(MonkError::Data(e.to_string())), gram_ms),
                            };
                            let est = Estimator::from_method(method, cfg.bcd(q));
                            let t = Instant::now();
                            let value = est.estimate(g, derive_seed(seed, q as u64)).map(|e| e.value);
                            row(method, q, value, gram_ms + elapsed_ms(t))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::with_capacity(jobs.len() * cfg.estimators.len() * cfg.q_list.len());
    for e in 0..cfg.estimators.len() {
        for (ni, _) in cfg.n_list.iter().enumerate() {
            for qi in 0..cfg.q_list.len() {
                for rep in 0..cfg.reps {
                    rows.push(results[ni * cfg.reps + rep][e][qi].clone());
                }
            }
        }
    }
    Ok(rows)
}

fn generate_pair(
    cfg: &ExperimentConfig,
    n: usize,
    seed: u64,
    contamination: Option<&ContaminationSpec>,
) -> Result<(crate::Sample, crate::Sample)> {
    let (xs, ys) = match cfg.experiment {
        ExperimentKind::Pareto => (
            sample_pareto(cfg.pareto_alpha, n, derive_seed(seed, 0))?,
            sample_pareto(cfg.pareto_alpha, n, derive_seed(seed, 1))?,
        ),
        _ => (
            sample_gaussian(cfg.m1, cfg.s1, n, derive_seed(seed, 0))?,
            sample_gaussian(cfg.m2, cfg.s2, n, derive_seed(seed, 1))?,
        ),
    };
    match contamination {
        Some(spec) => contaminate(&xs, &ys, spec),
        None => Ok((xs, ys)),
    }
}

/// Splice-junction two-sample tests: one row per (pair, N, rep, estimator).
pub fn run_experiment2(cfg: &ExperimentConfig, data: &SpliceData) -> Result<Vec<Exp2Row>> {
    if cfg.experiment != ExperimentKind::Dna {
        return Err(MonkError::Config("the dna driver needs experiment = dna".into()));
    }
    cfg.validate()?;
    let test = TwoSampleTest {
        grid: cfg.grid()?,
        b_boot: cfg.b,
        alpha: cfg.alpha,
    };
    let q = cfg.q_list[0];
    let estimators: Vec<Estimator> = cfg
        .estimators
        .iter()
        .map(|&m| Estimator::from_method(m, cfg.bcd(q)))
        .collect();
    for pair in &cfg.pairs {
        let (a, b) = pair.labels();
        for label in [a, b] {
            let have = data.class(label).len();
            if let Some(&n) = cfg.n_list.iter().find(|&&n| n > have) {
                return Err(MonkError::Data(format!("class {label} has {have} sequences, N={n} requested")));
            }
        }
    }

    let jobs: Vec<(usize, SplicePair, usize, usize)> = cfg
        .pairs
        .iter()
        .enumerate()
        .flat_map(|(pi, &pair)| {
            cfg.n_list
                .iter()
                .flat_map(move |&n| (0..cfg.reps).map(move |rep| (pi, pair, n, rep)))
        })
        .collect();
    let rows: Vec<Vec<Exp2Row>> = jobs
        .par_iter()
        .map(|&(pi, pair, n, rep)| {
            let seed = replication_seed(derive_seed(cfg.seed, pi as u64), n, rep);
            let (a, b) = pair.labels();
            let outcome = subsample(&data.class(a), n, derive_seed(seed, 0)).and_then(|xs| {
                if cfg.same_sample {
                    test.run(&xs, &xs, &estimators, seed)
                } else {
                    let ys = subsample(&data.class(b), n, derive_seed(seed, 1))?;
                    test.run(&xs, &ys, &estimators, seed)
                }
            });
            cfg.estimators
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let base = Exp2Row {
                        pair: pair.as_str(),
                        n,
                        rep,
                        seed,
                        estimator: m.as_str(),
                        mmd_hat: None,
                        q_hat: None,
                        diff: None,
                        error: String::new(),
                    };
                    match &outcome {
                        Ok(r) => Exp2Row {
                            mmd_hat: Some(r[i].statistic),
                            q_hat: Some(r[i].quantile),
                            diff: Some(r[i].diff),
                            ..base
                        },
                        Err(e) => Exp2Row {
                            error: e.to_string(),
                            ..base
                        },
                    }
                })
                .collect()
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Writes rows as comma-separated values with a header and LF line endings.
pub fn write_csv<W: Write, R: Serialize>(out: W, rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
