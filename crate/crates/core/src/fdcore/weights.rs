use crate::error::{Error, Result};

/// Finite-difference weights for derivatives `0..=max_order` at `eval_point`,
/// using Fornberg's recurrence. Row `k` holds the weights of the `k`-th
/// derivative.
pub fn fornberg_table(nodes: &[f64], eval_point: f64, max_order: usize) -> Result<Vec<Vec<f64>>> {
    let n = nodes.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty stencil".into()));
    }
    let mut c = vec![vec![0.0; n]; max_order + 1];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - eval_point;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - eval_point;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            if c3 == 0.0 {
                return Err(Error::CoincidentNodes(i));
            }
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    Ok(c)
}

/// Weights approximating the `deriv_order`-th derivative at `eval_point`
/// from values at `nodes`. Exact on polynomials of degree `< nodes.len()`.
pub fn fd_weights(nodes: &[f64], eval_point: f64, deriv_order: usize) -> Result<Vec<f64>> {
    if nodes.len() < deriv_order + 1 {
        return Err(Error::InvalidParameter(format!(
            "{} nodes cannot resolve derivative order {deriv_order}",
            nodes.len()
        )));
    }
    let mut table = fornberg_table(nodes, eval_point, deriv_order)?;
    Ok(table.swap_remove(deriv_order))
}

/// Lagrange interpolation through `(xs, ys)` evaluated at `x`.
pub fn lagrange_eval(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    xs.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let basis: f64 = xs
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &xj)| (x - xj) / (xi - xj))
                .product();
            ys[i] * basis
        })
        .sum()
}

/// Value and first derivative of the Lagrange interpolant at `x`.
pub fn lagrange_eval_with_slope(xs: &[f64], ys: &[f64], x: f64) -> (f64, f64) {
    // weights of the interpolant and its derivative at x are the order-0/1
    // Fornberg weights on the same nodes
    match fornberg_table(xs, x, 1) {
        Ok(t) => {
            let v = t[0].iter().zip(ys).map(|(w, y)| w * y).sum();
            let d = t[1].iter().zip(ys).map(|(w, y)| w * y).sum();
            (v, d)
        }
        Err(_) => (f64::NAN, f64::NAN),
    }
}
