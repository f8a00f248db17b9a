//! Ordered point collections over the supported domains.

use std::path::Path;

use crate::error::{MonkError, Result};

/// A sample of points from one domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    Real(Vec<f64>),
    Vector(Vec<Vec<f64>>),
    Text(Vec<String>),
}

/// Borrowed view of a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point<'a> {
    Real(f64),
    Vector(&'a [f64]),
    Text(&'a [u8]),
}

impl Point<'_> {
    pub fn kind(&self) -> &'static str {
        match self {
            Point::Real(_) => "real",
            Point::Vector(_) => "vector",
            Point::Text(_) => "string",
        }
    }
}

impl Sample {
    pub fn len(&self) -> usize {
        match self {
            Sample::Real(v) => v.len(),
            Sample::Vector(v) => v.len(),
            Sample::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Sample::Real(_) => "real",
            Sample::Vector(_) => "vector",
            Sample::Text(_) => "string",
        }
    }

    /// An empty sample of the same domain.
    pub fn empty_like(&self) -> Sample {
        match self {
            Sample::Real(_) => Sample::Real(Vec::new()),
            Sample::Vector(_) => Sample::Vector(Vec::new()),
            Sample::Text(_) => Sample::Text(Vec::new()),
        }
    }

    pub fn point(&self, i: usize) -> Point<'_> {
        match self {
            Sample::Real(v) => Point::Real(v[i]),
            Sample::Vector(v) => Point::Vector(&v[i]),
            Sample::Text(v) => Point::Text(v[i].as_bytes()),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Point<'_>> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// The points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Sample {
        match self {
            Sample::Real(v) => Sample::Real(indices.iter().map(|&i| v[i]).collect()),
            Sample::Vector(v) => Sample::Vector(indices.iter().map(|&i| v[i].clone()).collect()),
            Sample::Text(v) => Sample::Text(indices.iter().map(|&i| v[i].clone()).collect()),
        }
    }

    pub fn truncated(&self, n: usize) -> Sample {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.select(&idx)
    }

    /// Concatenation of two samples from the same domain.
    pub fn concat(&self, other: &Sample) -> Result<Sample> {
        Ok(match (self, other) {
            (Sample::Real(a), Sample::Real(b)) => Sample::Real([a.as_slice(), b].concat()),
            (Sample::Vector(a), Sample::Vector(b)) => Sample::Vector([a.as_slice(), b].concat()),
            (Sample::Text(a), Sample::Text(b)) => Sample::Text([a.as_slice(), b].concat()),
            _ => {
                return Err(MonkError::Unsupported(format!(
                    "cannot concatenate {} and {} samples",
                    self.kind(),
                    other.kind()
                )))
            }
        })
    }

    pub fn as_real(&self) -> Option<&[f64]> {
        match self {
            Sample::Real(v) => Some(v),
            _ => None,
        }
    }

    /// Reads a single-column CSV with header `value` (reals) or `sequence`
    /// (strings).
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Sample> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let header = reader
            .headers()?
            .get(0)
            .map(str::to_owned)
            .unwrap_or_default();
        match header.as_str() {
            "value" => {
                let mut values = Vec::new();
                for (line, record) in reader.records().enumerate() {
                    let record = record?;
                    let field = record.get(0).unwrap_or("");
                    let v: f64 = field.parse().map_err(|_| {
                        MonkError::Parse(format!("row {}: `{field}` is not a number", line + 2))
                    })?;
                    values.push(v);
                }
                Ok(Sample::Real(values))
            }
            "sequence" => {
                let mut values = Vec::new();
                for record in reader.records() {
                    values.push(record?.get(0).unwrap_or("").to_owned());
                }
                Ok(Sample::Text(values))
            }
            other => Err(MonkError::Parse(format!(
                "expected header `value` or `sequence`, found `{other}`"
            ))),
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(path)?;
        match self {
            Sample::Real(v) => {
                writer.write_record(["value"])?;
                for x in v {
                    writer.write_record([x.to_string()])?;
                }
            }
            Sample::Text(v) => {
                writer.write_record(["sequence"])?;
                for s in v {
                    writer.write_record([s])?;
                }
            }
            Sample::Vector(_) => {
                return Err(MonkError::Unsupported(
                    "vector samples have no CSV representation".into(),
                ))
            }
        }
        writer.flush()?;
        Ok(())
    }
}

impl From<Vec<f64>> for Sample {
    fn from(v: Vec<f64>) -> Self {
        Sample::Real(v)
    }
}

impl From<Vec<String>> for Sample {
    fn from(v: Vec<String>) -> Self {
        Sample::Text(v)
    }
}

impl From<Vec<&str>> for Sample {
    fn from(v: Vec<&str>) -> Self {
        Sample::Text(v.into_iter().map(str::to_owned).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_reals_and_strings() {
        let dir = tempfile::tempdir().unwrap();
        let reals = Sample::Real(vec![0.5, -1.25, 3e10]);
        let p = dir.path().join("x.csv");
        reals.write_csv(&p).unwrap();
        assert_eq!(Sample::read_csv(&p).unwrap(), reals);

        let text = Sample::from(vec!["ACGT", "GGA"]);
        text.write_csv(&p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "sequence\nACGT\nGGA\n");
        assert_eq!(Sample::read_csv(&p).unwrap(), text);
    }

    #[test]
    fn bad_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        std::fs::write(&p, "x\n1\n").unwrap();
        assert!(matches!(Sample::read_csv(&p), Err(MonkError::Parse(_))));
    }

    #[test]
    fn concat_rejects_mixed_domains() {
        let a = Sample::Real(vec![1.0]);
        let b = Sample::from(vec!["A"]);
        assert!(a.concat(&b).is_err());
        assert_eq!(a.concat(&a).unwrap().len(), 2);
    }
}
