//! Front location, derivative extrapolation across the front, and the
//! right-hand-side corrections `a1`, `a2` for stencils straddling it.
//!
//! The penalty region is assumed to be a single block on the left,
//! `S_1..=S_m`; the solution is smooth from `S_{m+2}` on.

use crate::error::{Error, Result};
use crate::fdcore::{fd_weights, lagrange_eval, lagrange_eval_with_slope, OperatorStencils, Stencil};
use crate::grid::Grid;

/// Derivative jumps and front position. Node indices follow the grid
/// (`0..=M+1`).
#[derive(Debug, Clone, PartialEq)]
pub struct JumpData {
    /// `S_m <= front < S_{m+1}`.
    pub m: usize,
    pub front: f64,
    /// Penalty side minus PDE side of `V''`, `V'''`, `V''''` at the front.
    pub jumps: [f64; 3],
    /// Number of leading entries of `jumps` that are populated.
    pub orders_present: usize,
}

impl JumpData {
    pub fn new(grid: &Grid, front: f64, jumps: &[f64]) -> Result<Self> {
        if jumps.len() > 3 {
            return Err(Error::InvalidParameter("at most three derivative jumps".into()));
        }
        if !(front >= grid.left() && front < grid.right()) {
            return Err(Error::FrontOutsideInterval { front, lo: grid.left(), hi: grid.right() });
        }
        let mut j = [0.0; 3];
        j[..jumps.len()].copy_from_slice(jumps);
        Ok(Self { m: grid.interval_of(front), front, jumps: j, orders_present: jumps.len() })
    }

    pub fn d2_jump(&self) -> f64 {
        self.jumps[0]
    }

    pub fn d3_jump(&self) -> f64 {
        self.jumps[1]
    }

    pub fn d4_jump(&self) -> f64 {
        self.jumps[2]
    }

    /// `sum_k d^k / k! * jump_k`, the Taylor difference of the two sides at
    /// offset `d` from the front.
    #[inline]
    fn taylor_gap(&self, d: f64) -> f64 {
        let d2 = d * d;
        0.5 * d2 * self.jumps[0] + d2 * d / 6.0 * self.jumps[1] + d2 * d2 / 24.0 * self.jumps[2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionVectors {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
}

impl CorrectionVectors {
    pub fn zeros(m: usize) -> Self {
        Self { a1: vec![0.0; m], a2: vec![0.0; m] }
    }

    /// `a1 + a2`.
    pub fn total(&self) -> Vec<f64> {
        self.a1.iter().zip(&self.a2).map(|(a, b)| a + b).collect()
    }
}

/// Index `m` of the last active node. `indicator[r]` belongs to node `r + 1`.
pub fn locate_penalty_front(indicator: &[bool]) -> Result<usize> {
    let m = indicator.iter().take_while(|&&a| a).count();
    if m == 0 {
        return Err(Error::NoPenaltyRegion);
    }
    if let Some(k) = indicator[m..].iter().position(|&a| a) {
        return Err(Error::NonMonotoneIndicator(m + k + 1));
    }
    Ok(m)
}

/// Decaying root `7 - 4 sqrt 3` of the centred fourth-order second
/// difference. A residual at a straddling row leaves a discrete layer
/// `A r^k` right of the front; its second differences are O(1) in `h`.
pub const PARASITIC_RATIO: f64 = 0.071_796_769_724_490_8;

/// Nodes in each derivative window.
pub const DERIVATIVE_WINDOW: usize = 7;

/// Stencils for the `order`-th derivative at nodes `m+2..=m+6`, on the
/// window `m+2..=m+8`. Weights are exact for quintics and annihilate the
/// layer `r^(i - m - 2)`.
pub fn one_sided_stencils(grid: &Grid, m: usize, order: usize) -> Result<Vec<Stencil>> {
    let last = grid.last();
    let first = m + 2;
    if first + DERIVATIVE_WINDOW - 1 > last {
        return Err(Error::InsufficientNodes { needed: first + DERIVATIVE_WINDOW - 1, available: last });
    }
    let window = &grid.nodes()[first..first + DERIVATIVE_WINDOW];
    let layer: Vec<f64> = (0..DERIVATIVE_WINDOW).map(|i| PARASITIC_RATIO.powi(i as i32)).collect();
    let dot = |w: &[f64]| w.iter().zip(&layer).map(|(a, b)| a * b).sum::<f64>();
    (first..=m + 6)
        .map(|j| {
            let x = grid.node(j);
            let mut w = fd_weights(window, x, order)?;
            let null = fd_weights(window, x, DERIVATIVE_WINDOW - 1)?;
            let c = -dot(&w) / dot(&null);
            w.iter_mut().zip(&null).for_each(|(a, b)| *a += c * b);
            Ok(Stencil { start: first, weights: w, eval_index: j, deriv_order: order })
        })
        .collect()
}

/// Derivative estimates at nodes `m+2..=m+6` from node values `values`
/// (length `M + 2`).
pub fn one_sided_derivatives(values: &[f64], grid: &Grid, m: usize, order: usize) -> Result<Vec<f64>> {
    if values.len() != grid.nodes().len() {
        return Err(Error::DimensionMismatch { expected: grid.nodes().len(), got: values.len() });
    }
    Ok(one_sided_stencils(grid, m, order)?.iter().map(|s| s.apply(values)).collect())
}

/// Lagrange extrapolation of values at `S_{m+2}, S_{m+3}, ...` to `front`.
pub fn extrapolate_to_front(values: &[f64], grid: &Grid, m: usize, front: f64) -> f64 {
    let xs = &grid.nodes()[m + 2..m + 2 + values.len()];
    lagrange_eval(xs, values, front)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontEstimate {
    pub front: f64,
    pub iterations: usize,
    /// False when no root was found inside the bracket and the midpoint was
    /// returned.
    pub found: bool,
}

/// Root of `fit(S) - obstacle_slope(S)`, where `fit` is the quartic
/// interpolant of `slopes` at `xs`. `obstacle_slope` returns the obstacle's
/// first and second derivatives. Newton, falling back to bisection when a
/// sign change is known; never leaves `bracket`.
pub fn locate_free_boundary<F>(
    slopes: &[f64],
    xs: &[f64],
    obstacle_slope: F,
    initial: f64,
    bracket: (f64, f64),
    tol: f64,
) -> FrontEstimate
where
    F: Fn(f64) -> (f64, f64),
{
    let (lo, hi) = bracket;
    let eval = |s: f64| {
        let (v, dv) = lagrange_eval_with_slope(xs, slopes, s);
        let (o, d_o) = obstacle_slope(s);
        (v - o, dv - d_o)
    };
    let (flo, fhi) = (eval(lo).0, eval(hi).0);
    let mut sign_bracket = (flo * fhi <= 0.0).then_some((lo, hi, flo));
    let midpoint = 0.5 * (lo + hi);
    let mut x = initial.clamp(lo, hi);
    for it in 1..=200 {
        let (f, df) = eval(x);
        if f == 0.0 {
            return FrontEstimate { front: x, iterations: it, found: true };
        }
        let mut next = x - f / df;
        if let Some((a, b, fa)) = sign_bracket.as_mut() {
            if f * *fa > 0.0 {
                *a = x;
                *fa = f;
            } else {
                *b = x;
            }
            let (a, b) = (a.min(*b), a.max(*b));
            if !next.is_finite() || next <= a || next >= b {
                next = 0.5 * (a + b);
            }
            if (b - a) <= tol {
                return FrontEstimate { front: next, iterations: it, found: true };
            }
        } else if !next.is_finite() || next < lo || next > hi {
            break;
        }
        if (next - x).abs() <= tol {
            return FrontEstimate { front: next, iterations: it, found: true };
        }
        x = next;
    }
    if sign_bracket.is_some() {
        return FrontEstimate { front: x, iterations: 200, found: true };
    }
    log::warn!("front root not bracketed in [{lo}, {hi}]; using midpoint");
    FrontEstimate { front: midpoint, iterations: 0, found: false }
}

/// `a1`, `a2` for the jumps in `jumps`; `p`, `w` are the interior samples
/// of the operator coefficients.
pub fn correction_vectors(
    grid: &Grid,
    stencils: &OperatorStencils,
    jumps: &JumpData,
    p: &[f64],
    w: &[f64],
) -> Result<CorrectionVectors> {
    let mm = grid.interior_len();
    let (m, sf) = (jumps.m, jumps.front);
    if !(m < grid.last() && grid.node(m) <= sf && sf < grid.node(m + 1)) {
        let lo = grid.node(m.min(grid.last()));
        let hi = grid.node((m + 1).min(grid.last()));
        return Err(Error::FrontOutsideInterval { front: sf, lo, hi });
    }
    let mut out = CorrectionVectors::zeros(mm);
    if jumps.jumps.iter().all(|&j| j == 0.0) {
        return Ok(out);
    }
    let correction = |s: &Stencil| -> f64 {
        let penalty_row = grid.node(s.eval_index) <= sf;
        s.node_indices()
            .filter(|&i| (grid.node(i) <= sf) != penalty_row)
            .map(|i| {
                let t = s.weight_at(i) * jumps.taylor_gap(grid.node(i) - sf);
                if penalty_row {
                    t
                } else {
                    -t
                }
            })
            .sum()
    };
    // a window reaches at most four nodes from its centre
    let first = m.saturating_sub(4).max(1);
    let last = (m + 5).min(mm);
    for j in first..=last {
        let r = j - 1;
        out.a2[r] = p[r] * correction(&stencils.d2[r]);
        out.a1[r] = w[r] * correction(&stencils.d1[r]);
    }
    Ok(out)
}

/// Estimate the front and the jumps from a solution.
///
/// `values` holds node values (length `M + 2`), `indicator` the interior
/// penalty indicator, `obstacle(S)` the obstacle and its first four
/// derivatives. `orders` jumps (0..=3) are extrapolated, starting with
/// `V''`.
pub fn estimate_jumps<F>(
    values: &[f64],
    grid: &Grid,
    indicator: &[bool],
    obstacle: F,
    initial_front: Option<f64>,
    orders: usize,
) -> Result<(JumpData, FrontEstimate)>
where
    F: Fn(f64) -> [f64; 5],
{
    let m = locate_penalty_front(indicator)?;
    let slopes = one_sided_derivatives(values, grid, m, 1)?;
    let xs = &grid.nodes()[m + 2..=m + 6];
    let bracket = (grid.node(m.saturating_sub(1)), grid.node(m + 2));
    let initial = initial_front.unwrap_or(0.5 * (grid.node(m) + grid.node(m + 1)));
    let tol = 1e-12 * (grid.right() - grid.left());
    let est = locate_free_boundary(
        &slopes,
        xs,
        |s| {
            let d = obstacle(s);
            (d[1], d[2])
        },
        initial,
        bracket,
        tol,
    );
    let sf = est.front;
    let pen = obstacle(sf);
    let orders = orders.min(3);
    let mut jumps = Vec::with_capacity(orders);
    for k in 0..orders {
        let order = k + 2;
        let d = one_sided_derivatives(values, grid, m, order)?;
        let pde_side = extrapolate_to_front(&d[..order + 1], grid, m, sf);
        jumps.push(pen[order] - pde_side);
    }
    Ok((JumpData::new(grid, sf, &jumps)?, est))
}
