//! Positive-definite kernels on real, vector and string domains, and Gram
//! matrix assembly.

use std::fmt;
use std::str::FromStr;

use once_cell::sync::OnceCell;

use crate::error::{invalid, MonkError, Result};
use crate::linalg::{cholesky_psd, CholeskyFactor, Matrix};
use crate::sample::{Point, Sample};
use crate::ssk;

/// A kernel together with its hyperparameters.
///
/// Use the checked constructors; [`Kernel::eval`] re-validates in case a
/// variant was built directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `exp(−‖x−y‖² / (2σ²))`.
    Rbf { sigma: f64 },
    /// `(⟨x,y⟩ + offset)^degree`.
    Polynomial { degree: u32, offset: f64 },
    /// `⟨x,y⟩`.
    Linear,
    /// Length-`length` subsequence kernel with per-position `decay`.
    StringSubsequence {
        length: usize,
        decay: f64,
        normalized: bool,
    },
}

impl Kernel {
    pub fn rbf(sigma: f64) -> Result<Self> {
        let k = Kernel::Rbf { sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn polynomial(degree: u32, offset: f64) -> Result<Self> {
        let k = Kernel::Polynomial { degree, offset };
        k.validate()?;
        Ok(k)
    }

    /// The quadratic kernel `(xy + 1)²`.
    pub fn quadratic() -> Self {
        Kernel::Polynomial {
            degree: 2,
            offset: 1.0,
        }
    }

    pub fn ssk(length: usize, decay: f64, normalized: bool) -> Result<Self> {
        let k = Kernel::StringSubsequence {
            length,
            decay,
            normalized,
        };
        k.validate()?;
        Ok(k)
    }

    /// Subsequence kernel used for DNA by default: p = 3, λ = 0.8, normalized.
    pub fn ssk_default() -> Self {
        Kernel::StringSubsequence {
            length: 3,
            decay: 0.8,
            normalized: true,
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Kernel::Rbf { .. } => "rbf",
            Kernel::Polynomial { .. } => "poly",
            Kernel::Linear => "linear",
            Kernel::StringSubsequence { .. } => "ssk",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Rbf { sigma } => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(invalid("sigma", format!("must be > 0, got {sigma}")));
                }
            }
            Kernel::Polynomial { degree, offset } => {
                if degree < 1 {
                    return Err(invalid("degree", "must be >= 1"));
                }
                if !(offset.is_finite() && offset >= 0.0) {
                    return Err(invalid("c", format!("must be >= 0, got {offset}")));
                }
            }
            Kernel::Linear => {}
            Kernel::StringSubsequence { length, decay, .. } => {
                if length < 1 {
                    return Err(invalid("p", "must be >= 1"));
                }
                if !(decay > 0.0 && decay <= 1.0) {
                    return Err(invalid("lambda", format!("must lie in (0, 1], got {decay}")));
                }
            }
        }
        Ok(())
    }

    fn mismatch(&self, p: &Point<'_>) -> MonkError {
        MonkError::DomainMismatch {
            kernel: self.to_string(),
            point: p.kind(),
        }
    }

    /// Kernel value before any normalization.
    fn raw(&self, x: Point<'_>, y: Point<'_>) -> Result<f64> {
        match (*self, x, y) {
            (Kernel::StringSubsequence { length, decay, .. }, Point::Text(s), Point::Text(t)) => {
                Ok(ssk::ssk_raw(s, t, length, decay))
            }
            (Kernel::StringSubsequence { .. }, Point::Text(_), other)
            | (Kernel::StringSubsequence { .. }, other, _) => Err(self.mismatch(&other)),
            (_, Point::Text(_), _) => Err(self.mismatch(&x)),
            (_, _, Point::Text(_)) => Err(self.mismatch(&y)),
            (Kernel::Rbf { sigma }, x, y) => {
                let d2 = sq_dist(x, y)?;
                Ok((-d2 / (2.0 * sigma * sigma)).exp())
            }
            (Kernel::Polynomial { degree, offset }, x, y) => {
                Ok((dot(x, y)? + offset).powi(degree as i32))
            }
            (Kernel::Linear, x, y) => dot(x, y),
        }
    }

    /// Per-point self-similarity used for normalization, if any.
    fn normalizer(&self, x: Point<'_>) -> Result<Option<f64>> {
        match *self {
            Kernel::StringSubsequence {
                normalized: true, ..
            } => Ok(Some(self.raw(x, x)?)),
            _ => Ok(None),
        }
    }

    /// k(x, y).
    pub fn eval(&self, x: Point<'_>, y: Point<'_>) -> Result<f64> {
        self.validate()?;
        let raw = self.raw(x, y)?;
        match (self.normalizer(x)?, self.normalizer(y)?) {
            (Some(nx), Some(ny)) => Ok(ssk::normalize(raw, nx, ny)),
            _ => Ok(raw),
        }
    }

    /// Convenience for scalar inputs.
    pub fn eval_real(&self, x: f64, y: f64) -> Result<f64> {
        self.eval(Point::Real(x), Point::Real(y))
    }
}

fn sq_dist(x: Point<'_>, y: Point<'_>) -> Result<f64> {
    match (x, y) {
        (Point::Real(a), Point::Real(b)) => Ok((a - b) * (a - b)),
        (Point::Vector(a), Point::Vector(b)) if a.len() == b.len() => {
            Ok(a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum())
        }
        (Point::Vector(a), Point::Vector(b)) => Err(MonkError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        }),
        _ => Err(MonkError::Unsupported(format!(
            "mixed {} and {} points",
            x.kind(),
            y.kind()
        ))),
    }
}

fn dot(x: Point<'_>, y: Point<'_>) -> Result<f64> {
    match (x, y) {
        (Point::Real(a), Point::Real(b)) => Ok(a * b),
        (Point::Vector(a), Point::Vector(b)) if a.len() == b.len() => {
            Ok(a.iter().zip(b).map(|(u, v)| u * v).sum())
        }
        (Point::Vector(a), Point::Vector(b)) => Err(MonkError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        }),
        _ => Err(MonkError::Unsupported(format!(
            "mixed {} and {} points",
            x.kind(),
            y.kind()
        ))),
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Kernel::Rbf { sigma } => write!(f, "rbf:sigma={sigma}"),
            Kernel::Polynomial { degree, offset } => write!(f, "poly:degree={degree},c={offset}"),
            Kernel::Linear => write!(f, "linear"),
            Kernel::StringSubsequence {
                length,
                decay,
                normalized,
            } => write!(f, "ssk:p={length},lambda={decay},norm={}", u8::from(normalized)),
        }
    }
}

impl FromStr for Kernel {
    type Err = MonkError;

    /// Parses `rbf:sigma=1`, `poly:degree=2,c=1`, `ssk:p=3,lambda=0.8,norm=1`
    /// or `linear`. Omitted parameters take the defaults σ=1, degree=2, c=1,
    /// p=3, λ=0.8, norm=1.
    fn from_str(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (family, params) = spec.split_once(':').unwrap_or((spec, ""));
        let mut pairs = Vec::new();
        for item in params.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| MonkError::Parse(format!("expected key=value, got `{item}`")))?;
            pairs.push((key.trim().to_ascii_lowercase(), value.trim().to_owned()));
        }
        let num = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| MonkError::Parse(format!("`{v}` is not a number")))
        };
        let int = |v: &str| {
            v.parse::<u32>()
                .map_err(|_| MonkError::Parse(format!("`{v}` is not a non-negative integer")))
        };
        let unknown = |key: &str| MonkError::Parse(format!("unknown parameter `{key}` for `{family}`"));

        match family.trim().to_ascii_lowercase().as_str() {
            "rbf" | "gauss" | "gaussian" => {
                let mut sigma = 1.0;
                for (k, v) in &pairs {
                    match k.as_str() {
                        "sigma" | "bandwidth" => sigma = num(v)?,
                        _ => return Err(unknown(k)),
                    }
                }
                Kernel::rbf(sigma)
            }
            "poly" | "polynomial" => {
                let (mut degree, mut offset) = (2, 1.0);
                for (k, v) in &pairs {
                    match k.as_str() {
                        "degree" | "d" => degree = int(v)?,
                        "c" | "offset" => offset = num(v)?,
                        _ => return Err(unknown(k)),
                    }
                }
                Kernel::polynomial(degree, offset)
            }
            "quadratic" if pairs.is_empty() => Ok(Kernel::quadratic()),
            "linear" if pairs.is_empty() => Ok(Kernel::Linear),
            "ssk" => {
                let (mut length, mut decay, mut normalized) = (3, 0.8, true);
                for (k, v) in &pairs {
                    match k.as_str() {
                        "p" | "length" => length = int(v)? as usize,
                        "lambda" | "decay" => decay = num(v)?,
                        "norm" | "normalized" => {
                            normalized = match v.as_str() {
                                "1" | "true" => true,
                                "0" | "false" => false,
                                _ => return Err(MonkError::Parse(format!("bad norm flag `{v}`"))),
                            }
                        }
                        _ => return Err(unknown(k)),
                    }
                }
                Kernel::ssk(length, decay, normalized)
            }
            other => Err(MonkError::Parse(format!("unknown kernel `{other}`"))),
        }
    }
}

/// Raw-kernel evaluator with cached normalizers for one or two samples.
pub(crate) struct PreparedPair<'a> {
    kernel: Kernel,
    xs: &'a Sample,
    ys: &'a Sample,
    norm_x: Option<Vec<f64>>,
    norm_y: Option<Vec<f64>>,
}

impl<'a> PreparedPair<'a> {
    pub(crate) fn new(kernel: Kernel, xs: &'a Sample, ys: &'a Sample) -> Result<Self> {
        kernel.validate()?;
        let norms = |s: &Sample| -> Result<Option<Vec<f64>>> {
            match kernel {
                Kernel::StringSubsequence {
                    normalized: true, ..
                } => s
                    .points()
                    .map(|p| kernel.normalizer(p).map(|v| v.unwrap_or(1.0)))
                    .collect::<Result<Vec<_>>>()
                    .map(Some),
                _ => Ok(None),
            }
        };
        let norm_x = norms(xs)?;
        let norm_y = if std::ptr::eq(xs, ys) {
            norm_x.clone()
        } else {
            norms(ys)?
        };
        Ok(PreparedPair {
            kernel,
            xs,
            ys,
            norm_x,
            norm_y,
        })
    }

    pub(crate) fn eval(&self, i: usize, j: usize) -> Result<f64> {
        let raw = self.kernel.raw(self.xs.point(i), self.ys.point(j))?;
        Ok(match (&self.norm_x, &self.norm_y) {
            (Some(nx), Some(ny)) => ssk::normalize(raw, nx[i], ny[j]),
            _ => raw,
        })
    }
}

/// |xs|×|ys| matrix of kernel values. Passing the same sample twice yields an
/// exactly symmetric matrix, each unordered pair being evaluated once.
pub fn gram(k: &Kernel, xs: &Sample, ys: &Sample) -> Result<Matrix> {
    if let (Sample::Real(a), Sample::Real(b)) = (xs, ys) {
        if let Some(out) = real_gram(k, a, b)? {
            return Ok(out);
        }
    }
    let prepared = PreparedPair::new(*k, xs, ys)?;
    let (n, m) = (xs.len(), ys.len());
    let mut out = Matrix::zeros(n, m);
    if std::ptr::eq(xs, ys) {
        for i in 0..n {
            for j in 0..=i {
                let v = prepared.eval(i, j)?;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
    } else {
        for i in 0..n {
            for j in 0..m {
                out[(i, j)] = prepared.eval(i, j)?;
            }
        }
    }
    Ok(out)
}

/// Scalar kernels evaluated without per-entry dispatch. `None` for kernels
/// that cannot take real inputs, which the generic path then reports.
fn real_gram(k: &Kernel, a: &[f64], b: &[f64]) -> Result<Option<Matrix>> {
    k.validate()?;
    Ok(match *k {
        Kernel::Rbf { sigma } => {
            let scale = -1.0 / (2.0 * sigma * sigma);
            Some(fill_real(a, b, |x, y| (scale * (x - y) * (x - y)).exp()))
        }
        Kernel::Polynomial { degree, offset } => {
            Some(fill_real(a, b, |x, y| (x * y + offset).powi(degree as i32)))
        }
        Kernel::Linear => Some(fill_real(a, b, |x, y| x * y)),
        Kernel::StringSubsequence { .. } => None,
    })
}

fn fill_real(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Matrix {
    Matrix::from_fn(a.len(), b.len(), |i, j| f(a[i], b[j]))
}

/// Access to the pooled `2n×2n` Gram matrix `[Kxx Kxy; Kyx Kyy]`, where
/// indices `0..n` address the x sample and `n..2n` the y sample.
pub trait GramSource {
    /// Number of points per side.
    fn side_len(&self) -> usize;

    fn entry(&self, i: usize, j: usize) -> Result<f64>;

    /// Symmetric submatrix over pooled indices.
    fn principal_submatrix(&self, idx: &[usize]) -> Result<Matrix> {
        let mut out = Matrix::zeros(idx.len(), idx.len());
        for a in 0..idx.len() {
            for b in 0..=a {
                let v = self.entry(idx[a], idx[b])?;
                out[(a, b)] = v;
                out[(b, a)] = v;
            }
        }
        Ok(out)
    }
}

/// Gram entries evaluated on demand from a kernel and two samples.
pub struct KernelGram {
    pooled: Sample,
    n: usize,
    prepared_norms: Option<Vec<f64>>,
    kernel: Kernel,
}

impl KernelGram {
    pub fn new(kernel: &Kernel, xs: &Sample, ys: &Sample) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(MonkError::DimensionMismatch {
                expected: xs.len(),
                got: ys.len(),
            });
        }
        let pooled = xs.concat(ys)?;
        let prepared = PreparedPair::new(*kernel, &pooled, &pooled)?;
        let prepared_norms = prepared.norm_x;
        Ok(KernelGram {
            n: xs.len(),
            pooled,
            prepared_norms,
            kernel: *kernel,
        })
    }
}

impl GramSource for KernelGram {
    fn side_len(&self) -> usize {
        self.n
    }

    fn entry(&self, i: usize, j: usize) -> Result<f64> {
        let raw = self.kernel.raw(self.pooled.point(i), self.pooled.point(j))?;
        Ok(match &self.prepared_norms {
            Some(norms) => ssk::normalize(raw, norms[i], norms[j]),
            None => raw,
        })
    }
}

/// The aggregated Gram matrix `[Kxx Kxy; Kyx Kyy]` of two equal-size
/// samples, with a lazily computed Cholesky factor.
#[derive(Debug)]
pub struct AggregatedGram {
    n: usize,
    entries: Matrix,
    chol: OnceCell<CholeskyFactor>,
}

impl AggregatedGram {
    pub fn new(k: &Kernel, xs: &Sample, ys: &Sample) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(MonkError::DimensionMismatch {
                expected: xs.len(),
                got: ys.len(),
            });
        }
        if xs.is_empty() {
            return Err(MonkError::Empty("aggregated Gram needs n >= 1"));
        }
        let pooled = xs.concat(ys)?;
        let entries = gram(k, &pooled, &pooled)?;
        Ok(AggregatedGram {
            n: xs.len(),
            entries,
            chol: OnceCell::new(),
        })
    }

    /// Wraps a precomputed `2n×2n` matrix laid out as `[Kxx Kxy; Kyx Kyy]`.
    pub fn from_matrix(entries: Matrix) -> Result<Self> {
        if !entries.is_square() || entries.rows() % 2 != 0 || entries.rows() == 0 {
            return Err(MonkError::Unsupported(format!(
                "aggregated Gram must be square with even positive order, got {}x{}",
                entries.rows(),
                entries.cols()
            )));
        }
        Ok(AggregatedGram {
            n: entries.rows() / 2,
            entries,
            chol: OnceCell::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    /// Cholesky factor of the full matrix, computed on first use.
    pub fn cholesky(&self) -> Result<&CholeskyFactor> {
        self.chol.get_or_try_init(|| cholesky_psd(&self.entries))
    }

    pub fn has_cholesky(&self) -> bool {
        self.chol.get().is_some()
    }

    /// The aggregated Gram of the two samples restricted to the given
    /// within-sample indices (the same indices on both sides).
    pub fn restrict(&self, idx: &[usize]) -> AggregatedGram {
        let pooled: Vec<usize> = idx
            .iter()
            .copied()
            .chain(idx.iter().map(|&i| i + self.n))
            .collect();
        AggregatedGram {
            n: idx.len(),
            entries: self.entries.select(&pooled, &pooled),
            chol: OnceCell::new(),
        }
    }
}

impl GramSource for AggregatedGram {
    fn side_len(&self) -> usize {
        self.n
    }

    fn entry(&self, i: usize, j: usize) -> Result<f64> {
        Ok(self.entries[(i, j)])
    }

    fn principal_submatrix(&self, idx: &[usize]) -> Result<Matrix> {
        Ok(self.entries.select(idx, idx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kernel_eval_examples() {
        let rbf = Kernel::rbf(1.0).unwrap();
        assert_eq!(rbf.eval_real(0.0, 0.0).unwrap(), 1.0);
        assert!((rbf.eval_real(0.0, 1.0).unwrap() - 0.6065306597).abs() < 1e-10);
        assert_eq!(Kernel::quadratic().eval_real(1.0, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn kernel_errors_are_typed() {
        let rbf = Kernel::rbf(1.0).unwrap();
        assert!(matches!(
            rbf.eval(Point::Text(b"A"), Point::Real(1.0)),
            Err(MonkError::DomainMismatch { .. })
        ));
        assert!(matches!(
            Kernel::ssk_default().eval_real(1.0, 2.0),
            Err(MonkError::DomainMismatch { .. })
        ));
        assert!(matches!(Kernel::rbf(0.0), Err(MonkError::InvalidParameter { .. })));
        assert!(matches!(Kernel::polynomial(0, 1.0), Err(MonkError::InvalidParameter { .. })));
        assert!(matches!(Kernel::polynomial(2, -1.0), Err(MonkError::InvalidParameter { .. })));
        assert!(matches!(Kernel::ssk(0, 0.5, true), Err(MonkError::InvalidParameter { .. })));
        assert!(matches!(Kernel::ssk(2, 1.5, true), Err(MonkError::InvalidParameter { .. })));
        let bad = Kernel::Rbf { sigma: -1.0 };
        assert!(bad.eval_real(0.0, 0.0).is_err());
    }

    #[test]
    fn vector_points() {
        let k = Kernel::rbf(1.0).unwrap();
        let v = k.eval(Point::Vector(&[0.0, 0.0]), Point::Vector(&[1.0, 1.0])).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!(k.eval(Point::Vector(&[0.0]), Point::Vector(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["rbf:sigma=1", "poly:degree=2,c=1", "ssk:p=3,lambda=0.8,norm=1", "linear"] {
            let k: Kernel = s.parse().unwrap();
            assert_eq!(k.to_string().parse::<Kernel>().unwrap(), k);
        }
        assert_eq!("poly:degree=2,c=1".parse::<Kernel>().unwrap(), Kernel::quadratic());
        assert_eq!(
            "ssk:p=3,lambda=0.8,norm=1".parse::<Kernel>().unwrap(),
            Kernel::ssk_default()
        );
        assert!("rbf:sigma=abc".parse::<Kernel>().is_err());
        assert!("rbf:width=1".parse::<Kernel>().is_err());
        assert!("matern".parse::<Kernel>().is_err());
        assert!("rbf:sigma=0".parse::<Kernel>().is_err());
    }

    #[test]
    fn gram_examples() {
        let rbf = Kernel::rbf(1.0).unwrap();
        let g = gram(&rbf, &Sample::Real(vec![0.0]), &Sample::Real(vec![0.0])).unwrap();
        assert_eq!(g.as_slice(), &[1.0]);

        let g = gram(
            &Kernel::quadratic(),
            &Sample::Real(vec![0.0, 1.0]),
            &Sample::Real(vec![2.0]),
        )
        .unwrap();
        assert_eq!((g.rows(), g.cols()), (2, 1));
        assert_eq!(g.as_slice(), &[1.0, 9.0]);

        let g = gram(&rbf, &Sample::Real(vec![3.0]), &Sample::Real(vec![])).unwrap();
        assert_eq!((g.rows(), g.cols()), (1, 0));
    }

    #[test]
    fn aggregated_gram_examples() {
        let rbf = Kernel::rbf(1.0).unwrap();
        let g = AggregatedGram::new(&rbf, &Sample::Real(vec![0.0]), &Sample::Real(vec![0.0])).unwrap();
        assert_eq!(g.entries().as_slice(), &[1.0, 1.0, 1.0, 1.0]);

        let g = AggregatedGram::new(
            &Kernel::quadratic(),
            &Sample::Real(vec![0.0]),
            &Sample::Real(vec![1.0]),
        )
        .unwrap();
        assert_eq!(g.entries().as_slice(), &[1.0, 1.0, 1.0, 4.0]);

        let xs = Sample::Real(vec![0.3, -1.0, 2.0]);
        let g = AggregatedGram::new(&rbf, &xs, &xs).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let xx = g.entries()[(i, j)];
                assert_eq!(xx, g.entries()[(i + 3, j + 3)]);
                assert_eq!(xx, g.entries()[(i, j + 3)]);
            }
        }

        assert!(matches!(
            AggregatedGram::new(&rbf, &Sample::Real(vec![0.0]), &Sample::Real(vec![0.0, 1.0])),
            Err(MonkError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn lazy_cholesky_reconstructs() {
        let xs = Sample::Real(vec![0.0, 0.5, 1.5]);
        let ys = Sample::Real(vec![0.1, 2.0, -1.0]);
        let g = AggregatedGram::new(&Kernel::rbf(1.0).unwrap(), &xs, &ys).unwrap();
        assert!(!g.has_cholesky());
        let f = g.cholesky().unwrap();
        let l = f.lower();
        let llt = l.matmul(&l.transpose()).unwrap();
        let scale = g.entries().max_abs();
        for i in 0..6 {
            for j in 0..6 {
                let target = g.entries()[(i, j)] + if i == j { f.jitter() } else { 0.0 };
                assert!((llt[(i, j)] - target).abs() <= 1e-8 * scale);
            }
        }
        assert!(g.has_cholesky());
    }

    #[test]
    fn kernel_source_matches_materialized() {
        let xs = Sample::from(vec!["ACGTTA", "GGA", "TTTT"]);
        let ys = Sample::from(vec!["ACG", "AAGT", "CAT"]);
        let k = Kernel::ssk_default();
        let lazy = KernelGram::new(&k, &xs, &ys).unwrap();
        let full = AggregatedGram::new(&k, &xs, &ys).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((lazy.entry(i, j).unwrap() - full.entry(i, j).unwrap()).abs() < 1e-15);
            }
        }
        let idx = [4, 0, 2];
        assert_eq!(
            lazy.principal_submatrix(&idx).unwrap(),
            full.principal_submatrix(&idx).unwrap()
        );
    }

    fn min_eigenvalue(m: &Matrix) -> f64 {
        let n = m.rows();
        let dm = nalgebra::DMatrix::from_row_slice(n, n, m.as_slice());
        dm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    fn random_sample(kernel: &Kernel, rng: &mut ChaCha8Rng, n: usize) -> Sample {
        match kernel {
            Kernel::StringSubsequence { .. } => Sample::Text(
                (0..n)
                    .map(|_| {
                        let len = rng.gen_range(0..12);
                        (0..len).map(|_| b"ACGT"[rng.gen_range(0..4)] as char).collect()
                    })
                    .collect(),
            ),
            _ => Sample::Real((0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn gram_is_symmetric_psd(seed: u64, family in 0usize..4, n in 1usize..25) {
            let kernel = [
                Kernel::rbf(0.7).unwrap(),
                Kernel::quadratic(),
                Kernel::Linear,
                Kernel::ssk(2, 0.6, true).unwrap(),
            ][family];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let xs = random_sample(&kernel, &mut rng, n);
            let g = gram(&kernel, &xs, &xs).unwrap();
            prop_assert_eq!(g.relative_asymmetry(), 0.0);
            prop_assert!(min_eigenvalue(&g) >= -1e-10 * g.trace().max(f64::MIN_POSITIVE));
        }

        #[test]
        fn kernels_are_symmetric(x in -5.0f64..5.0, y in -5.0f64..5.0) {
            for k in [Kernel::rbf(1.3).unwrap(), Kernel::polynomial(3, 0.5).unwrap(), Kernel::Linear] {
                prop_assert_eq!(k.eval_real(x, y).unwrap(), k.eval_real(y, x).unwrap());
            }
        }
    }
}
