//! Green's function diagnostics: the closed form for constant-coefficient
//! second-order operators and columns of the discrete inverse on the PDE
//! block.

use crate::error::{Error, Result};
use crate::fdcore::BandMatrix;

/// `T = -d_xx - (kappa - 1) d_x + (kappa + lambda)`, the Black–Scholes
/// operator `25/(12k) - L_BS` after `S = K e^x`, scaled by `2 / sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedBsCoefficients {
    pub kappa: f64,
    pub lambda: f64,
    pub xi1: f64,
    pub xi2: f64,
}

impl TransformedBsCoefficients {
    /// `step = None` drops the time term (`lambda = 0`).
    pub fn new(sigma: f64, r: f64, step: Option<f64>) -> Result<Self> {
        if !(sigma > 0.0 && r > 0.0) {
            return Err(Error::InvalidParameter(format!("need sigma, r > 0, got {sigma}, {r}")));
        }
        let kappa = 2.0 * r / (sigma * sigma);
        let lambda = match step {
            Some(k) if k > 0.0 => 25.0 / (6.0 * k * sigma * sigma),
            Some(k) => return Err(Error::InvalidParameter(format!("step {k} must be positive"))),
            None => 0.0,
        };
        let root = ((kappa + 1.0).powi(2) + 4.0 * lambda).sqrt();
        Ok(Self { kappa, lambda, xi1: 0.5 * (-(kappa - 1.0) + root), xi2: 0.5 * (-(kappa - 1.0) - root) })
    }

    /// First-derivative coefficient of `-T`.
    pub fn drift(&self) -> f64 {
        self.kappa - 1.0
    }

    /// Zeroth-order coefficient of `-T`.
    pub fn reaction(&self) -> f64 {
        -(self.kappa + self.lambda)
    }
}

/// Green's function on `[a, b]` with zero ends for the operator whose
/// homogeneous solutions are `e^{xi1 x}`, `e^{xi2 x}` and whose leading
/// term is `-d_xx`.
pub fn analytic_green(xi1: f64, xi2: f64, a: f64, b: f64, x: f64, xbar: f64) -> f64 {
    let d = xi2 - xi1;
    let denom = d * (xi2 * xbar).exp() * ((d * b).exp() - (d * a).exp());
    if x < xbar {
        ((d * b).exp() - (d * xbar).exp()) / denom * ((xi2 * x).exp() - (d * a + xi1 * x).exp())
    } else {
        ((d * a).exp() - (d * xbar).exp()) / denom * ((xi2 * x).exp() - (d * b + xi1 * x).exp())
    }
}

/// Green's function of `-u''` on `[a, b]` with zero ends.
pub fn tent_green(a: f64, b: f64, x: f64, xbar: f64) -> f64 {
    let (lo, hi) = if x < xbar { (x, xbar) } else { (xbar, x) };
    (lo - a) * (b - hi) / (b - a)
}

/// Columns `cols` of `a^{-1}`.
pub fn discrete_green_columns(a: &BandMatrix, cols: &[usize]) -> Result<Vec<Vec<f64>>> {
    let n = a.dim();
    let lu = a.factor()?;
    cols.iter()
        .map(|&c| {
            if c >= n {
                return Err(Error::DimensionMismatch { expected: n, got: c + 1 });
            }
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            lu.solve(&e)
        })
        .collect()
}

/// Rows `rows` of `a^{-1}`, through the transpose.
pub fn discrete_green_rows(a: &BandMatrix, rows: &[usize]) -> Result<Vec<Vec<f64>>> {
    let n = a.dim();
    let (kl, ku) = a.bandwidths();
    let mut t = BandMatrix::zeros(n, ku, kl);
    for i in 0..n {
        for j in a.row_span(i) {
            t.set(j, i, a.get(i, j));
        }
    }
    discrete_green_columns(&t, rows)
}

/// `-L22`: rows and columns of `-l` for interior nodes `m+1..=M`, where
/// `S_1..=S_m` is the penalty region.
pub fn pde_block(l: &BandMatrix, m: usize) -> BandMatrix {
    l.scaled_plus_identity(-1.0, 0.0).trailing_block(m)
}

/// Largest magnitude in each vector.
pub fn max_abs(vectors: &[Vec<f64>]) -> Vec<f64> {
    vectors.iter().map(|v| v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))).collect()
}
