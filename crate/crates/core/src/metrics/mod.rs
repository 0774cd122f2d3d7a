//! Similarity between a counterfactual series and the empirical one.

pub mod special;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValue {
    pub p: f64,
    /// log10 of `p`, finite even when `p` underflows to 0.
    pub log10: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    pub p: PValue,
    pub n: usize,
}

fn check_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

/// Two-sided p-value of a sample correlation `r` over `n` points, from the
/// Student-t law with n − 2 degrees of freedom.
///
/// With t² = r²(n−2)/(1−r²) the tail mass is I_{1−r²}((n−2)/2, 1/2).
pub fn pearson_p_value(r: f64, n: usize) -> Result<PValue> {
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::Contract(format!("correlation {r} outside [-1, 1]")));
    }
    let df = (n - 2) as f64;
    let x = (1.0 - r) * (1.0 + r);
    let ln_p = special::ln_inc_beta_reg(df / 2.0, 0.5, x);
    Ok(PValue {
        p: ln_p.exp(),
        log10: ln_p / std::f64::consts::LN_10,
    })
}

/// Sample Pearson correlation with its two-sided p-value.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation> {
    check_lengths(x, y)?;
    let n = x.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantSeries);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(Correlation {
        r,
        p: pearson_p_value(r, n)?,
        n,
    })
}

pub fn euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y)?;
    if x.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Sum of absolute differences.
pub fn l1_loss(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum())
}

/// Dynamic time warping with |a − b| local cost, unconstrained window and
/// the match / insertion / deletion step pattern. Lengths may differ.
pub fn dtw(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::TooFewPoints {
            needed: 1,
            got: 0,
        });
    }
    let m = y.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut curr = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for &a in x {
        curr[0] = f64::INFINITY;
        for j in 1..=m {
            let best = prev[j - 1].min(prev[j]).min(curr[j - 1]);
            curr[j] = (a - y[j - 1]).abs() + best;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    Ok(prev[m])
}

/// DTW between two gap-free series.
pub fn dtw_series(x: &TimeSeries, y: &TimeSeries) -> Result<f64> {
    dtw(&x.dense_values()?, &y.dense_values()?)
}

/// All metrics for one pair of series, over the quarters defined in both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    /// `None` when fewer than 3 points are shared or either side is constant.
    pub pearson_r: Option<f64>,
    pub p_value: Option<f64>,
    pub log10_p: Option<f64>,
    pub euclidean: f64,
    pub dtw: f64,
    pub l1_loss: f64,
    pub n: usize,
}

impl SimilarityReport {
    /// Compares aligned values directly.
    pub fn from_aligned(x: &[f64], y: &[f64]) -> Result<Self> {
        check_lengths(x, y)?;
        if x.is_empty() {
            return Err(Error::TooFewPoints { needed: 1, got: 0 });
        }
        let corr = match pearson(x, y) {
            Ok(c) => Some(c),
            Err(Error::TooFewPoints { .. } | Error::ConstantSeries) => None,
            Err(e) => return Err(e),
        };
        Ok(SimilarityReport {
            pearson_r: corr.map(|c| c.r),
            p_value: corr.map(|c| c.p.p),
            log10_p: corr.map(|c| c.p.log10).filter(|l| l.is_finite()),
            euclidean: euclidean(x, y)?,
            dtw: dtw(x, y)?,
            l1_loss: l1_loss(x, y)?,
            n: x.len(),
        })
    }
}

/// Compares two series on their shared defined quarters.
pub fn compare(a: &TimeSeries, b: &TimeSeries) -> Result<SimilarityReport> {
    let (_, x, y) = a.align(b);
    SimilarityReport::from_aligned(&x, &y)
}
