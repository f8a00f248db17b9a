//! Closed-form MMD between two univariate Gaussians.

use crate::error::{invalid, MonkError, Result};
use crate::kernels::Kernel;

/// `MMD(N(m1, s1²), N(m2, s2²))` for the RBF kernel and the quadratic
/// polynomial kernel `(xy + c)²`.
pub fn analytic_mmd_gaussian(k: &Kernel, m1: f64, s1: f64, m2: f64, s2: f64) -> Result<f64> {
    for (name, s) in [("s1", s1), ("s2", s2)] {
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid(name, format!("standard deviation must be positive, got {s}")));
        }
    }
    let sq = match *k {
        Kernel::Rbf { sigma } => {
            let s2_ = sigma * sigma;
            let cross = s2_ + s1 * s1 + s2 * s2;
            let dm = m1 - m2;
            sigma / (s2_ + 2.0 * s1 * s1).sqrt() + sigma / (s2_ + 2.0 * s2 * s2).sqrt()
                - 2.0 * sigma * (-dm * dm / (2.0 * cross)).exp() / cross.sqrt()
        }
        Kernel::Polynomial { degree: 2, offset } => {
            let a1 = m1 * m1 + s1 * s1;
            let a2 = m2 * m2 + s2 * s2;
            let dm = m1 - m2;
            (a1 - a2).powi(2) + 2.0 * offset * dm * dm
        }
        other => {
            return Err(MonkError::Unsupported(format!(
                "no closed-form Gaussian MMD for kernel {other}"
            )))
        }
    };
    Ok(sq.max(0.0).sqrt())
}
