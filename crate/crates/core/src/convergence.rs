//! Observed convergence orders.

use crate::error::{Error, Result};

/// `log2(e_coarse / e_fine)` for each successive pair of a halving sequence.
/// A zero error yields `None` for the affected pairs (saturation).
pub fn observed_order(errors: &[f64]) -> Result<Vec<Option<f64>>> {
    if errors.len() < 2 {
        return Err(Error::InvalidParameter("need at least two refinement levels".into()));
    }
    Ok(errors
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0].abs(), w[1].abs());
            (a > 0.0 && b > 0.0).then(|| (a / b).log2())
        })
        .collect())
}

/// Least-squares slope of `log e` against `log h`.
pub fn loglog_slope(h: &[f64], errors: &[f64]) -> Result<f64> {
    if h.len() != errors.len() {
        return Err(Error::DimensionMismatch { expected: h.len(), got: errors.len() });
    }
    if h.len() < 2 {
        return Err(Error::InvalidParameter("need at least two points".into()));
    }
    if errors.iter().any(|e| !(e.abs() > 0.0)) || h.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidParameter("errors and spacings must be nonzero".into()));
    }
    let xs: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.abs().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Least-squares order for errors on a grid-size sequence `n` (spacing
/// proportional to `1 / n`).
pub fn fitted_order(n: &[f64], errors: &[f64]) -> Result<f64> {
    let h: Vec<f64> = n.iter().map(|v| 1.0 / v).collect();
    loglog_slope(&h, errors)
}
