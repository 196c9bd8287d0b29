//! Probes shared by the acceptance run.

use freebound::fdcore::OperatorStencils;
use freebound::grid::Grid;
use freebound::jump::{correction_vectors, JumpData};
use freebound::Result;

/// Uniform grid of `n` intervals on about `[-1, 1]` with the kink of
/// `f = x (x <= 0), e^x - 1 (x > 0)` at 0.37 of its interval. Returns the
/// spacing and the worst corrected second-difference error over the four
/// rows whose stencils straddle the kink.
pub fn straddle_error(n: usize, jumps: &[f64]) -> Result<(f64, f64)> {
    let h = 2.0 / n as f64;
    let half = (n / 2) as f64;
    let grid = Grid::from_nodes((0..=n).map(|j| (j as f64 - half - 0.37) * h).collect())?;
    let st = OperatorStencils::new(&grid)?;
    let mm = grid.interior_len();
    let jd = JumpData::new(&grid, 0.0, jumps)?;
    let c = correction_vectors(&grid, &st, &jd, &vec![1.0; mm], &vec![0.0; mm])?;
    let f = |x: f64| if x <= 0.0 { x } else { x.exp_m1() };
    let f2 = |x: f64| if x <= 0.0 { 0.0 } else { x.exp() };
    let vals: Vec<f64> = grid.nodes().iter().map(|&x| f(x)).collect();
    let m = grid.interval_of(0.0);
    let err = (m - 1..=m + 2)
        .map(|j| (st.d2[j - 1].apply(&vals) + c.a2[j - 1] - f2(grid.node(j))).abs())
        .fold(0.0, f64::max);
    Ok((h, err))
}

/// Worst relative failure over monomials `(x - x_eval)^q`, `q < degree_limit`.
pub fn monomial_defect(nodes: &[f64], weights: &[f64], x_eval: f64, order: usize, degree_limit: usize) -> (f64, f64) {
    let mut constant = 0.0;
    let mut worst: f64 = 0.0;
    for q in 0..degree_limit {
        let terms: Vec<f64> = nodes.iter().zip(weights).map(|(x, w)| w * (x - x_eval).powi(q as i32)).collect();
        let sum: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|t| t.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
        let exact = if q == order { (1..=q).product::<usize>() as f64 } else { 0.0 };
        let rel = (sum - exact).abs() / scale.max(exact.abs());
        if q == 0 {
            constant = rel;
        } else {
            worst = worst.max(rel);
        }
    }
    (constant, worst)
}
