use super::{Method, MmdEstimate};
use crate::error::{MonkError, Result};
use crate::kernels::AggregatedGram;

struct BlockSums {
    xx: f64,
    yy: f64,
    xy: f64,
    diag_xx: f64,
    diag_yy: f64,
}

fn block_sums(g: &AggregatedGram) -> BlockSums {
    let n = g.n();
    let k = g.entries();
    let mut s = BlockSums {
        xx: 0.0,
        yy: 0.0,
        xy: 0.0,
        diag_xx: 0.0,
        diag_yy: 0.0,
    };
    for i in 0..n {
        let row_x = &k.row(i)[..];
        let row_y = &k.row(n + i)[..];
        s.xx += row_x[..n].iter().sum::<f64>();
        s.xy += row_x[n..].iter().sum::<f64>();
        s.yy += row_y[n..].iter().sum::<f64>();
        s.diag_xx += row_x[i];
        s.diag_yy += row_y[n + i];
    }
    s
}

/// Biased (V-statistic) MMD: `√((1/n²)·Σ_ij (Kxx + Kyy − 2Kxy))`, with the
/// radicand clamped at zero.
pub fn mmd_vstat(g: &AggregatedGram) -> Result<MmdEstimate> {
    let s = block_sums(g);
    let n2 = (g.n() * g.n()) as f64;
    let sq = (s.xx + s.yy - 2.0 * s.xy) / n2;
    Ok(MmdEstimate::closed_form(sq.max(0.0).sqrt(), Method::VStat, Some(sq)))
}

/// Unbiased (U-statistic) MMD². The estimate's `value` is the signed root
/// `sign(u)·√|u|` and `squared` holds `u`.
pub fn mmd_ustat(g: &AggregatedGram) -> Result<MmdEstimate> {
    let n = g.n();
    if n < 2 {
        return Err(MonkError::TooFewSamples { needed: 2, got: n });
    }
    let s = block_sums(g);
    let nf = n as f64;
    let u = (s.xx - s.diag_xx + s.yy - s.diag_yy) / (nf * (nf - 1.0)) - 2.0 * s.xy / (nf * nf);
    let signed_root = u.signum() * u.abs().sqrt();
    let signed_root = if u == 0.0 { 0.0 } else { signed_root };
    Ok(MmdEstimate::closed_form(signed_root, Method::UStat, Some(u)))
}
