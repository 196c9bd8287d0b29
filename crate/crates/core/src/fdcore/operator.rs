use std::sync::Arc;

use super::banded::BandMatrix;
use super::weights::fd_weights;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Half-bandwidth of `L`: the one-sided rows 1 and M reach four nodes away.
pub const OPERATOR_BANDWIDTH: usize = 4;

/// Weights over a contiguous node window `start..start + weights.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub start: usize,
    pub weights: Vec<f64>,
    pub eval_index: usize,
    pub deriv_order: usize,
}

impl Stencil {
    pub fn on_window(grid: &Grid, start: usize, len: usize, eval_index: usize, deriv_order: usize) -> Result<Self> {
        let nodes = &grid.nodes()[start..start + len];
        let weights = fd_weights(nodes, grid.node(eval_index), deriv_order)?;
        Ok(Self { start, weights, eval_index, deriv_order })
    }

    #[inline]
    pub fn end(&self) -> usize {
        self.start + self.weights.len()
    }

    #[inline]
    pub fn node_indices(&self) -> std::ops::Range<usize> {
        self.start..self.end()
    }

    /// Weight attached to node `i`, zero outside the window.
    #[inline]
    pub fn weight_at(&self, i: usize) -> f64 {
        if i >= self.start && i < self.end() {
            self.weights[i - self.start]
        } else {
            0.0
        }
    }

    /// Apply to values indexed by node (length `M + 2`).
    #[inline]
    pub fn apply(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(&values[self.start..self.end()]).map(|(w, v)| w * v).sum()
    }
}

/// Node window `(start, len)` of the operator stencil for interior node `j`.
pub fn operator_window(j: usize, interior: usize) -> (usize, usize) {
    if j == 1 {
        (0, 6)
    } else if j == interior {
        (interior - 4, 6)
    } else {
        (j - 2, 5)
    }
}

/// Rows of the `M x (M+2)` matrices `L1bar` and `L2bar`; entry `r` belongs
/// to node `r + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorStencils {
    pub d1: Vec<Stencil>,
    pub d2: Vec<Stencil>,
}

impl OperatorStencils {
    pub fn new(grid: &Grid) -> Result<Self> {
        let m = grid.interior_len();
        if m < 4 {
            return Err(Error::InvalidGrid(format!("operator needs M >= 4, got {m}")));
        }
        let mut d1 = Vec::with_capacity(m);
        let mut d2 = Vec::with_capacity(m);
        for j in 1..=m {
            let (start, len) = operator_window(j, m);
            d1.push(Stencil::on_window(grid, start, len, j, 1)?);
            d2.push(Stencil::on_window(grid, start, len, j, 2)?);
        }
        Ok(Self { d1, d2 })
    }

    #[inline]
    pub fn interior_len(&self) -> usize {
        self.d2.len()
    }

    /// Dense `M x (M+2)` copy of `L1bar` or `L2bar` (`order` 1 or 2).
    pub fn dense(&self, order: usize) -> Vec<Vec<f64>> {
        let rows = if order == 1 { &self.d1 } else { &self.d2 };
        let width = rows.len() + 2;
        rows.iter().map(|s| (0..width).map(|i| s.weight_at(i)).collect()).collect()
    }
}

/// Coefficients of `p V'' + w V' + z V + g` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coefficients {
    pub p: f64,
    pub w: f64,
    pub z: f64,
    pub g: f64,
}

/// `L = P L2 + W L1 + Z` on interior nodes plus the boundary/source vector.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub stencils: Arc<OperatorStencils>,
    pub l: BandMatrix,
    pub b: Vec<f64>,
    pub p: Vec<f64>,
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub g: Vec<f64>,
}

impl DiscreteOperator {
    pub fn assemble<F>(grid: &Grid, coeffs: F, boundary: (f64, f64)) -> Result<Self>
    where
        F: Fn(f64) -> Coefficients,
    {
        let stencils = Arc::new(OperatorStencils::new(grid)?);
        Ok(Self::assemble_with(grid, stencils, coeffs, boundary))
    }

    /// Assemble reusing precomputed stencils for `grid`.
    pub fn assemble_with<F>(grid: &Grid, stencils: Arc<OperatorStencils>, coeffs: F, boundary: (f64, f64)) -> Self
    where
        F: Fn(f64) -> Coefficients,
    {
        let m = grid.interior_len();
        assert_eq!(stencils.interior_len(), m, "stencils built for another grid");
        let last = m + 1;
        let bw = OPERATOR_BANDWIDTH;
        let mut l = BandMatrix::zeros(m, bw, bw);
        let (mut p, mut w, mut z, mut g, mut b) =
            (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for r in 0..m {
            let c = coeffs(grid.node(r + 1));
            let (s1, s2) = (&stencils.d1[r], &stencils.d2[r]);
            for i in s2.node_indices() {
                if i == 0 || i == last {
                    continue;
                }
                let v = c.p * s2.weight_at(i) + c.w * s1.weight_at(i);
                l.add(r, i - 1, v);
            }
            l.add(r, r, c.z);
            let left = c.p * s2.weight_at(0) + c.w * s1.weight_at(0);
            let right = c.p * s2.weight_at(last) + c.w * s1.weight_at(last);
            b[r] = left * boundary.0 + right * boundary.1 + c.g;
            (p[r], w[r], z[r], g[r]) = (c.p, c.w, c.z, c.g);
        }
        Self { stencils, l, b, p, w, z, g }
    }

    #[inline]
    pub fn interior_len(&self) -> usize {
        self.b.len()
    }

    /// `L v + b`, the discrete residual of the operator including sources.
    pub fn residual(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.l.matvec(v);
        out.iter_mut().zip(&self.b).for_each(|(o, b)| *o += b);
        out
    }
}

/// `A = (25/12) I - k L`.
#[derive(Debug, Clone)]
pub struct Bdf4Matrix {
    pub a: BandMatrix,
    pub k: f64,
}

pub fn assemble_bdf4_matrix(op: &DiscreteOperator, k: f64) -> Result<Bdf4Matrix> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidParameter(format!("time step {k} must be nonnegative")));
    }
    Ok(Bdf4Matrix { a: op.l.scaled_plus_identity(-k, 25.0 / 12.0), k })
}
