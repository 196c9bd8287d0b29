// Corrected second differences at the four nodes whose stencils straddle a
// second-derivative kink, on f(x) = x (x <= 0), e^x - 1 (x > 0).

use freebound::convergence::loglog_slope;
use freebound::fdcore::OperatorStencils;
use freebound::grid::Grid;
use freebound::jump::{correction_vectors, JumpData};
use num_rational::Ratio;

fn f(x: f64) -> f64 {
    if x <= 0.0 {
        x
    } else {
        x.exp_m1()
    }
}

fn f2(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x.exp()
    }
}

/// Uniform grid of `n` intervals on about [-1, 1] with the kink at a fixed
/// fraction `theta` of the interval containing it.
fn shifted_grid(n: usize, theta: f64) -> Grid {
    let h = 2.0 / n as f64;
    let half = (n / 2) as f64;
    Grid::from_nodes((0..=n).map(|j| (j as f64 - half - theta) * h).collect()).unwrap()
}

/// Max error of the corrected second difference at the straddling rows.
fn corrected_error(n: usize, jumps: &[f64], front_shift: f64) -> (f64, f64) {
    let grid = shifted_grid(n, 0.37);
    let st = OperatorStencils::new(&grid).unwrap();
    let mm = grid.interior_len();
    let h = grid.max_spacing();
    let front = front_shift * h * h;
    let jd = JumpData::new(&grid, front, jumps).unwrap();
    let c = correction_vectors(&grid, &st, &jd, &vec![1.0; mm], &vec![0.0; mm]).unwrap();
    let vals: Vec<f64> = grid.nodes().iter().map(|&x| f(x)).collect();
    let m = grid.interval_of(0.0);
    let err = (m - 1..=m + 2)
        .map(|j| (st.d2[j - 1].apply(&vals) + c.a2[j - 1] - f2(grid.node(j))).abs())
        .fold(0.0, f64::max);
    (h, err)
}

fn slope(jumps: &[f64], shift: f64) -> f64 {
    let (hs, es): (Vec<f64>, Vec<f64>) = [40, 80, 160, 320].iter().map(|&n| corrected_error(n, jumps, shift)).unzip();
    loglog_slope(&hs, &es).unwrap()
}

#[test]
fn all_jumps_third_order() {
    let s = slope(&[-1.0, -1.0, -1.0], 0.0);
    assert!((s - 3.0).abs() <= 0.4, "slope {s}");
}

#[test]
fn second_jump_only_first_order() {
    let s = slope(&[-1.0], 0.0);
    assert!((s - 1.0).abs() <= 0.4, "slope {s}");
}

#[test]
fn uncorrected_is_order_one_over_h_squared_times_h_squared() {
    // without corrections the error does not decay
    let (_, e1) = corrected_error(40, &[], 0.0);
    let (_, e2) = corrected_error(320, &[], 0.0);
    assert!(e2 > 0.5 * e1, "{e1} {e2}");
}

#[test]
fn front_error_of_order_h_squared_costs_one_order() {
    let s = slope(&[-1.0, -1.0, -1.0], 0.8);
    assert!(s >= 0.6, "slope {s}");
}

type Q = Ratio<i128>;

/// The four printed correction formulas for a uniform centred stencil.
fn printed_corrections(h: Q, delta: Q, d: [Q; 3]) -> [Q; 4] {
    let c = |k: i128| Q::from_integer(k) / (h * h * 12);
    let (cm2, cm1, c1, c2) = (c(-1), c(16), c(16), c(-1));
    let t = |x: Q| -> [Q; 3] { [x * x / 2, x * x * x / 6, x * x * x * x / 24] };
    let dot = |a: [Q; 3], s: [i128; 3]| -> Q {
        (0..3).map(|k| a[k] * d[k] * Q::from_integer(s[k])).fold(Q::from_integer(0), |x, y| x + y)
    };
    let add = |a: [Q; 3], b: [Q; 3]| -> [Q; 3] { [a[0] + b[0], a[1] + b[1], a[2] + b[2]] };
    let sc = |k: Q, a: [Q; 3]| -> [Q; 3] { [k * a[0], k * a[1], k * a[2]] };
    let r1 = dot(sc(c2, t(delta)), [1, 1, 1]);
    let r2 = dot(add(sc(c1, t(delta)), sc(c2, t(h + delta))), [1, 1, 1]);
    let r3 = dot(add(sc(cm2, t(h + h - delta)), sc(cm1, t(h - delta))), [-1, 1, -1]);
    let r4 = dot(sc(cm2, t(h - delta)), [-1, 1, -1]);
    [r1, r2, r3, r4]
}

fn check_against_printed(theta: (i128, i128)) {
    let n = 20usize;
    let h = Q::new(1, 10);
    let theta = Q::new(theta.0, theta.1);
    let d = [Q::new(-3, 2), Q::new(2, 3), Q::new(5, 4)];
    // nodes x_j = (j - 10) h - theta h, front at 0
    let nodes: Vec<f64> = (0..=n)
        .map(|j| {
            let q = (Q::from_integer(j as i128 - 10) - theta) * h;
            *q.numer() as f64 / *q.denom() as f64
        })
        .collect();
    let grid = Grid::from_nodes(nodes).unwrap();
    let st = OperatorStencils::new(&grid).unwrap();
    let to = |q: Q| *q.numer() as f64 / *q.denom() as f64;
    let jd = JumpData::new(&grid, 0.0, &[to(d[0]), to(d[1]), to(d[2])]).unwrap();
    let mm = grid.interior_len();
    let c = correction_vectors(&grid, &st, &jd, &vec![1.0; mm], &vec![0.0; mm]).unwrap();
    // delta is the distance from the front to the next node on the right
    let delta = (Q::from_integer(1) - theta) * h;
    let want = printed_corrections(h, delta, d);
    let m = jd.m;
    for (k, w) in want.iter().enumerate() {
        let got = c.a2[m - 2 + k];
        let w = to(*w);
        assert!((got - w).abs() <= 1e-9 * w.abs().max(1.0), "row {k}: {got} vs {w}");
    }
}

#[test]
fn matches_printed_formulas_generic_offset() {
    check_against_printed((37, 100));
    check_against_printed((9, 10));
}

#[test]
fn matches_printed_formulas_front_on_node() {
    // theta = 0 puts the front on S_m, i.e. delta = h
    check_against_printed((0, 1));
}
