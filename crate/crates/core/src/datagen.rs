//! Synthetic samples, outlier injection and the splice-junction data set.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, MonkError, Result};
use crate::sample::Sample;

/// Length of every splice-junction sequence.
pub const SPLICE_LEN: usize = 60;

/// `n` draws from `N(m, s²)`.
pub fn sample_gaussian(m: f64, s: f64, n: usize, seed: u64) -> Result<Sample> {
    if !(s > 0.0 && s.is_finite()) || !m.is_finite() {
        return Err(invalid("s", format!("need finite m and s > 0, got m={m}, s={s}")));
    }
    let normal = Normal::new(m, s).map_err(|e| invalid("s", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Sample::Real((0..n).map(|_| rng.sample(normal)).collect()))
}

/// `n` draws from the Pareto law on `[1, ∞)` with tail index `alpha`, by
/// inversion `x = (1 − u)^{−1/alpha}`.
pub fn sample_pareto(alpha: f64, n: usize, seed: u64) -> Result<Sample> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid("alpha", format!("must be positive, got {alpha}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Sample::Real(
        (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                (1.0 - u).powf(-1.0 / alpha)
            })
            .collect(),
    ))
}

/// Replace the last `n_corrupt` entries of both samples by constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminationSpec {
    pub n_corrupt: usize,
    pub x_value: f64,
    pub y_value: f64,
}

pub fn contaminate(xs: &Sample, ys: &Sample, spec: &ContaminationSpec) -> Result<(Sample, Sample)> {
    let overwrite = |s: &Sample, value: f64| -> Result<Sample> {
        let mut v = s
            .as_real()
            .ok_or_else(|| MonkError::Unsupported("contamination needs real samples".into()))?
            .to_vec();
        if spec.n_corrupt > v.len() {
            return Err(invalid(
                "n_corrupt",
                format!("{} exceeds sample size {}", spec.n_corrupt, v.len()),
            ));
        }
        let start = v.len() - spec.n_corrupt;
        v[start..].fill(value);
        Ok(Sample::Real(v))
    };
    if xs.len() != ys.len() {
        return Err(MonkError::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    Ok((overwrite(xs, spec.x_value)?, overwrite(ys, spec.y_value)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpliceLabel {
    EI,
    IE,
    N,
}

impl fmt::Display for SpliceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpliceLabel::EI => "EI",
            SpliceLabel::IE => "IE",
            SpliceLabel::N => "N",
        })
    }
}

impl FromStr for SpliceLabel {
    type Err = MonkError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EI" => Ok(SpliceLabel::EI),
            "IE" => Ok(SpliceLabel::IE),
            "N" => Ok(SpliceLabel::N),
            other => Err(MonkError::Parse(format!("unknown splice label `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpliceRecord {
    pub label: SpliceLabel,
    pub id: String,
    pub sequence: String,
}

/// A rejected input line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineDiagnostic {
    /// 1-based.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct SpliceData {
    pub records: Vec<SpliceRecord>,
    pub diagnostics: Vec<LineDiagnostic>,
}

impl SpliceData {
    pub fn class_counts(&self) -> BTreeMap<SpliceLabel, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.records {
            *counts.entry(r.label).or_insert(0) += 1;
        }
        counts
    }

    /// All sequences of one class, in file order.
    pub fn class(&self, label: SpliceLabel) -> Sample {
        Sample::Text(
            self.records
                .iter()
                .filter(|r| r.label == label)
                .map(|r| r.sequence.clone())
                .collect(),
        )
    }
}

fn parse_splice_line(line: &str) -> std::result::Result<SpliceRecord, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 3 {
        return Err(format!("expected 3 comma-separated fields, found {}", fields.len()));
    }
    let label = fields[0].parse::<SpliceLabel>().map_err(|e| e.to_string())?;
    let id = fields[1].trim().to_string();
    let sequence: String = fields[2]
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| c.to_ascii_uppercase())
        .collect();
    if sequence.len() != SPLICE_LEN {
        return Err(format!(
            "sequence has length {}, expected {SPLICE_LEN}",
            sequence.len()
        ));
    }
    if let Some(bad) = sequence.chars().find(|c| !"ACGTDNSR".contains(*c)) {
        return Err(format!("unexpected symbol `{bad}` in sequence"));
    }
    Ok(SpliceRecord { label, id, sequence })
}

/// Parses `label, id, sequence` lines. Blank lines are ignored; malformed
/// lines are skipped and reported in [`SpliceData::diagnostics`].
pub fn parse_splice(text: &str) -> SpliceData {
    let mut data = SpliceData::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_splice_line(line) {
            Ok(r) => data.records.push(r),
            Err(message) => data.diagnostics.push(LineDiagnostic { line: i + 1, message }),
        }
    }
    data
}

pub fn load_splice(path: impl AsRef<Path>) -> Result<SpliceData> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    Ok(parse_splice(&text))
}

/// `n` distinct elements of `s`, chosen uniformly.
pub fn subsample(s: &Sample, n: usize, seed: u64) -> Result<Sample> {
    if n > s.len() {
        return Err(MonkError::TooFewSamples { needed: n, got: s.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = sample_indices(&mut rng, s.len(), n).into_vec();
    Ok(s.select(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_contract() {
        assert!(sample_gaussian(0.0, 1.0, 0, 1).unwrap().is_empty());
        assert_eq!(sample_gaussian(0.3, 2.0, 50, 9).unwrap(), sample_gaussian(0.3, 2.0, 50, 9).unwrap());
        assert!(sample_gaussian(0.0, 0.0, 5, 1).is_err());
        assert!(sample_gaussian(0.0, -1.0, 5, 1).is_err());

        let n = 1_000_000;
        let s = sample_gaussian(0.0, 1.0, n, 5).unwrap();
        let v = s.as_real().unwrap();
        let mean = v.iter().sum::<f64>() / n as f64;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
        assert!(mean.abs() < 0.005 && (sd - 1.0).abs() < 0.005, "{mean} {sd}");
    }

    #[test]
    fn pareto_contract() {
        let n = 1_000_000;
        let s = sample_pareto(3.0, n, 2).unwrap();
        let v = s.as_real().unwrap();
        assert!(v.iter().all(|&x| x >= 1.0));
        let mean = v.iter().sum::<f64>() / n as f64;
        assert!((mean - 1.5).abs() < 0.015, "{mean}");
        assert_eq!(sample_pareto(3.0, 20, 4).unwrap(), sample_pareto(3.0, 20, 4).unwrap());
        assert!(sample_pareto(0.0, 3, 1).is_err());
    }

    #[test]
    fn contamination() {
        let xs = Sample::Real(vec![1.0, 2.0, 3.0]);
        let ys = Sample::Real(vec![4.0, 5.0, 6.0]);
        let none = ContaminationSpec { n_corrupt: 0, x_value: 9.0, y_value: 9.0 };
        assert_eq!(contaminate(&xs, &ys, &none).unwrap(), (xs.clone(), ys.clone()));

        let spec = ContaminationSpec { n_corrupt: 2, x_value: 2000.0, y_value: 4000.0 };
        let (cx, cy) = contaminate(&xs, &ys, &spec).unwrap();
        assert_eq!(cx, Sample::Real(vec![1.0, 2000.0, 2000.0]));
        assert_eq!(cy, Sample::Real(vec![4.0, 4000.0, 4000.0]));
        assert_eq!(contaminate(&cx, &cy, &spec).unwrap(), (cx.clone(), cy.clone()));

        let all = ContaminationSpec { n_corrupt: 3, ..spec };
        assert_eq!(contaminate(&xs, &ys, &all).unwrap().0, Sample::Real(vec![2000.0; 3]));
        let over = ContaminationSpec { n_corrupt: 4, ..spec };
        assert!(contaminate(&xs, &ys, &over).is_err());
    }

    #[test]
    fn splice_parsing() {
        let a60 = "A".repeat(60);
        let text = format!(
            "EI,NAME-1,{a60}\n\n ie , X-2 ,  {}\nN,X-3,ACGT\nQQ,X-4,{a60}\n",
            "c".repeat(30) + "  " + &"g".repeat(30)
        );
        let d = parse_splice(&text);
        assert_eq!(d.records.len(), 2);
        assert_eq!(d.records[0].label, SpliceLabel::EI);
        assert_eq!(d.records[0].id, "NAME-1");
        assert_eq!(d.records[1].label, SpliceLabel::IE);
        assert_eq!(d.records[1].sequence, "C".repeat(30) + &"G".repeat(30));
        let lines: Vec<usize> = d.diagnostics.iter().map(|x| x.line).collect();
        assert_eq!(lines, vec![4, 5]);
        assert!(parse_splice("").records.is_empty());
    }

    #[test]
    fn unreadable_file_is_typed() {
        assert!(matches!(load_splice("/nonexistent/splice.data"), Err(MonkError::Io(_))));
    }

    #[test]
    fn subsampling_without_replacement() {
        let s = Sample::Real((0..50).map(f64::from).collect());
        let t = subsample(&s, 20, 3).unwrap();
        let mut v = t.as_real().unwrap().to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        assert_eq!(v.len(), 20);
        assert!(subsample(&s, 51, 3).is_err());
    }
}
