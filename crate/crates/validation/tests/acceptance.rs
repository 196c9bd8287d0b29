// Acceptance criteria, one line each. Runs without the libtest harness so the
// lines are printed on every run; exits nonzero when any criterion fails.

use freebound::convergence::{fitted_order, loglog_slope};
use freebound::fdcore::{fd_weights, Coefficients, DiscreteOperator, OperatorStencils, Stencil};
use freebound::greens::{analytic_green, discrete_green_columns, discrete_green_rows, pde_block, tent_green, TransformedBsCoefficients};
use freebound::grid::{Grid, StretchParams, TimeGrid, TimeTransform};
use freebound::ivp::{solve_ivp, IvpProblem, Startup};
use freebound::jump::one_sided_stencils;
use freebound::model::{Model, MovingBoundaryTest};
use freebound::option::{price_american_put, AmericanConfig, MarketParams};
use freebound::study::{
    american_study, bvp_obstacle_study, moving_boundary_study, phase_orders, AmericanStudy, BvpStudy, Execution,
    LevelResult, MovingBoundaryStudy,
};
use rand::{RngExt, SeedableRng};
use freebound_validation::{monomial_defect, straddle_error};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_611;

struct Report {
    lines: Vec<(String, bool, String)>,
}

impl Report {
    fn record(&mut self, name: &str, ok: bool, detail: String) {
        println!("{name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
        self.lines.push((name.to_string(), ok, detail));
    }
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ")
}

fn errors(levels: &[LevelResult], phase: usize, front: bool) -> Vec<f64> {
    levels
        .iter()
        .map(|l| {
            let p = &l.phases[phase];
            if front { p.front_error.unwrap_or(f64::NAN) } else { p.error.unwrap_or(f64::NAN) }
        })
        .collect()
}

fn complementarity(levels: &[LevelResult]) -> bool {
    levels.iter().all(|l| l.phases.iter().all(|p| p.complementarity))
}

fn criteria_1_2(r: &mut Report, all_comp: &mut Vec<bool>) {
    let ns = [30usize, 60, 120, 240, 480];
    let published = [0.221530668, 0.221434987, 0.221410846, 0.221404784, 0.221403265];
    let cfg = BvpStudy { rho: 1e12, probe: 0.2, phases: 4, tol: 1e-9 };
    let levels = bvp_obstacle_study(&ns, &cfg, Execution::Parallel).expect("elliptic study");
    all_comp.push(complementarity(&levels));

    let dev = levels
        .iter()
        .zip(published)
        .map(|(l, p)| (l.phases[0].value - p).abs())
        .fold(0.0, f64::max);
    let e4 = levels[3].phases[3].error.unwrap();
    let n: Vec<f64> = ns[1..].iter().map(|&x| x as f64).collect();
    let slopes: Vec<f64> = (0..4).map(|k| fitted_order(&n, &errors(&levels, k, false)[1..]).unwrap()).collect();
    let slopes_ok = slopes.iter().zip([2.0, 3.0, 4.0, 5.0]).all(|(s, t)| (s - t).abs() <= 0.5);
    r.record(
        "criterion 1 (elliptic values, x = 0.2)",
        dev <= 1e-7 && e4 <= 1e-9 && slopes_ok,
        format!(
            "max phase-1 deviation {dev:.2e} <= 1e-7; phase-4 error at N=240 {e4:.2e} <= 1e-9; slopes N=60..480 [{}] vs 2/3/4/5 +- 0.5",
            fmt(&slopes)
        ),
    );

    let n3: Vec<f64> = ns[1..4].iter().map(|&x| x as f64).collect();
    let fslopes: Vec<f64> = (0..4).map(|k| fitted_order(&n3, &errors(&levels, k, true)[1..4]).unwrap()).collect();
    let fe4 = levels[3].phases[3].front_error.unwrap();
    let fok = fslopes.iter().zip([2.0, 3.0, 4.0, 5.0]).all(|(s, t)| (s - t).abs() <= 0.6);
    r.record(
        "criterion 2 (elliptic front)",
        fok && fe4 <= 1e-9,
        format!("front slopes N=60..240 [{}] vs 2/3/4/5 +- 0.6; phase-4 front error at N=240 {fe4:.2e} <= 1e-9", fmt(&fslopes)),
    );

    // properties from the driver description
    let mono = levels[2..].iter().all(|l| l.phases.windows(2).all(|w| w[1].error <= w[0].error));
    let per_level: Vec<String> = levels[2..]
        .iter()
        .map(|l| format!("N={}: [{}]", l.nx, l.phases.iter().map(|p| format!("{:.2e}", p.error.unwrap())).collect::<Vec<_>>().join(", ")))
        .collect();
    r.record("property (phase errors non-increasing for N >= 120)", mono, per_level.join("; "));
    let warm = levels.iter().all(|l| l.phases[1..].iter().all(|p| p.iterations <= 2));
    let its: Vec<String> = levels.iter().map(|l| format!("{:?}", l.phases.iter().map(|p| p.iterations).collect::<Vec<_>>())).collect();
    r.record("property (elliptic warm starts <= 2 iterations)", warm, its.join(" "));
}

fn criterion_3(r: &mut Report, all_comp: &mut Vec<bool>) {
    let pairs = [(20usize, 40usize), (40, 80), (80, 160), (160, 320), (320, 640)];
    let cfg = MovingBoundaryStudy { rho: 1e8, probe: 0.0, phases: 4, tol: 1e-9, horizon: 0.5 };
    let levels = moving_boundary_study(&pairs, &cfg, Execution::Parallel).expect("moving boundary study");
    all_comp.push(complementarity(&levels));
    let exact = MovingBoundaryTest.exact(0.5f64.sqrt(), 0.0).unwrap();
    let l = &levels[3];
    let v1 = l.phases[0].value;
    let v4 = l.phases[3].value;
    let orders = phase_orders(&levels, 3);
    let last: Vec<f64> = orders[3..].iter().map(|o| o.unwrap_or(f64::NAN)).collect();
    let ok = (v1 - 0.321007).abs() <= 2e-5 && (v4 - exact).abs() <= 1e-6 && last.iter().all(|&o| o >= 4.0);
    r.record(
        "criterion 3 (moving boundary, x = 0)",
        ok,
        format!(
            "phase-1 at (160,320) {v1:.7} vs 0.321007 +- 2e-5; phase-4 {v4:.8} vs exact {exact:.8} within 1e-6 ({:.2e}); phase-4 orders at the two finest pairs [{}] >= 4",
            (v4 - exact).abs(),
            fmt(&last)
        ),
    );

    // warm starts, per solve
    let grid = Grid::uniform(-2.0, 2.0, 159).unwrap();
    let time = TimeGrid::new(0.5, 320, TimeTransform::Square).unwrap();
    let out = solve_ivp(&IvpProblem::new(grid, time, &MovingBoundaryTest, 1e8, Startup::Exact)).unwrap();
    let worst = out.steps.iter().flat_map(|s| s.iterations[1..].iter().copied()).max().unwrap_or(0);
    r.record("property (moving boundary warm starts <= 2 iterations)", worst <= 2, format!("max post-phase-1 iterations per solve {worst}"));
}

fn american(sigma: f64) -> (AmericanStudy, Vec<(usize, usize)>) {
    let params = MarketParams::new(sigma, 0.1, 0.0, 100.0, 0.25).unwrap();
    if sigma == 0.2 {
        let cfg = AmericanStudy { params, s_max: 1000.0, alpha: 125.0 / 6.0, beta: 0.05, t_skip: 12, rho: 1e8, phases: 4, tol: 1e-9 };
        (cfg, vec![(53, 30), (104, 60), (206, 120), (410, 240), (818, 480), (1635, 960)])
    } else {
        let cfg = AmericanStudy { params, s_max: 1300.0, alpha: 65.0, beta: 0.125, t_skip: 12, rho: 1e8, phases: 4, tol: 1e-9 };
        (cfg, vec![(50, 30), (98, 60), (195, 120), (388, 240), (775, 480), (1548, 960)])
    }
}

fn criterion_4(r: &mut Report, all_comp: &mut Vec<bool>) {
    let mut ok = true;
    let mut details = Vec::new();
    for (sigma, target, tol, min_order) in [(0.2, 3.0701067, 1e-5, 3.5), (0.8, 14.6788783, 1e-4, 3.0)] {
        let (cfg, pairs) = american(sigma);
        let levels = american_study(&pairs, &cfg, Execution::Parallel).expect("american study");
        all_comp.push(complementarity(&levels));
        // the value is pinned at the second finest level
        let v4 = levels[levels.len() - 2].phases[3].value;
        let orders: Vec<f64> = phase_orders(&levels, 3)[levels.len() - 2..].iter().map(|o| o.unwrap_or(f64::NAN)).collect();
        ok &= (v4 - target).abs() <= tol && orders.iter().all(|&o| o >= min_order);
        details.push(format!(
            "sigma={sigma}: phase-4 at nt=480 {v4:.9} vs {target} +- {tol:.0e}; change orders over the last two refinements [{}] >= {min_order}",
            fmt(&orders)
        ));
        if sigma == 0.2 {
            let v1 = levels[0].phases[0].value;
            let coarse = (v1 - 3.068602382).abs() <= 2e-4;
            r.record("property (American (53,30) phase 1 near 3.068602382)", coarse, format!("{v1:.9}, within 2e-4"));
        }
    }
    r.record("criterion 4 (American put at S = K)", ok, details.join("; "));

    // exercise boundary
    let (cfg, _) = american(0.2);
    let stretch = StretchParams::new(100.0, cfg.alpha, cfg.beta, 0.0, cfg.s_max).unwrap();
    let config = AmericanConfig { nx: 410, nt: 240, stretch, t_skip: 12, rho: 1e8, phases: 4, tol: 1e-9 };
    let res = price_american_put(&cfg.params, &config).unwrap();
    let grid = &res.outcome.grid;
    let after: Vec<(f64, f64)> = res.outcome.steps.iter().filter(|s| s.n > 12).filter_map(|s| s.fronts[3].map(|f| (s.time, f))).collect();
    let monotone = after.windows(2).all(|w| {
        let h = grid.spacing(grid.interval_of(w[0].1).max(1));
        w[1].1 <= w[0].1 + h
    });
    let end = after.last().map(|x| x.1).unwrap_or(f64::NAN);
    r.record(
        "property (exercise boundary nonincreasing, ends near 89.7)",
        monotone && (end - 89.7).abs() <= 0.5,
        format!("monotone {monotone}; front at expiry {end:.3}"),
    );
}

fn criterion_5(r: &mut Report) {
    let slope = |jumps: &[f64]| {
        let (h, e): (Vec<f64>, Vec<f64>) = [40, 80, 160, 320].iter().map(|&n| straddle_error(n, jumps).unwrap()).unzip();
        loglog_slope(&h, &e).unwrap()
    };
    let all = slope(&[-1.0, -1.0, -1.0]);
    let one = slope(&[-1.0]);
    r.record(
        "criterion 5 (corrected stencils at the four straddling nodes)",
        (all - 3.0).abs() <= 0.4 && (one - 1.0).abs() <= 0.4,
        format!("all jumps slope {all:.3} vs 3 +- 0.4; V'' jump only slope {one:.3} vs 1 +- 0.4"),
    );
}

fn criterion_6(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut grids = vec![Grid::uniform(0.0, 1.0, 40).unwrap()];
    for _ in 0..3 {
        let n = 41;
        let h = 1.0 / n as f64;
        let nodes: Vec<f64> = (0..=n)
            .map(|j| if j == 0 || j == n { j as f64 * h } else { (j as f64 + rng.random_range(-0.3..0.3)) * h })
            .collect();
        grids.push(Grid::from_nodes(nodes).unwrap());
    }
    let (mut c_worst, mut m_worst, mut layer_worst): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let check = |grid: &Grid, s: &Stencil, limit: usize| -> (f64, f64) {
        let nodes = &grid.nodes()[s.start..s.end()];
        monomial_defect(nodes, &s.weights, grid.node(s.eval_index), s.deriv_order, limit)
    };
    for grid in &grids {
        let st = OperatorStencils::new(grid).unwrap();
        for s in st.d1.iter().chain(&st.d2) {
            let (c, m) = check(grid, s, s.weights.len());
            c_worst = c_worst.max(c);
            m_worst = m_worst.max(m);
        }
        for start in [0, 7, 20, 33] {
            let nodes = &grid.nodes()[start..start + 7];
            for order in 0..=4 {
                for x in [nodes[0], nodes[3], 0.5 * (nodes[1] + nodes[2])] {
                    let w = fd_weights(nodes, x, order).unwrap();
                    let (c, m) = monomial_defect(nodes, &w, x, order, 7);
                    if order > 0 {
                        c_worst = c_worst.max(c);
                    }
                    m_worst = m_worst.max(m);
                }
            }
        }
        // derivative windows annihilate the parasitic layer, which costs one degree
        for order in 1..=4 {
            for s in one_sided_stencils(grid, 10, order).unwrap() {
                let (c, m) = check(grid, &s, s.weights.len() - 1);
                c_worst = c_worst.max(c);
                layer_worst = layer_worst.max(m);
            }
        }
    }
    r.record(
        "criterion 6 (weight exactness, uniform and perturbed grids)",
        c_worst <= 1e-12 && m_worst <= 1e-10 && layer_worst <= 1e-10,
        format!(
            "seed {SEED}; constants {c_worst:.1e} <= 1e-12; monomials to window-1 {m_worst:.1e} <= 1e-10; layer-free derivative windows to window-2 {layer_worst:.1e}"
        ),
    );
}

fn criterion_8(r: &mut Report) {
    // analytic decay near the left end
    let c = TransformedBsCoefficients::new(0.2, 0.1, None).unwrap();
    let (a, b) = ((89.748f64 / 100.0).ln(), 10f64.ln());
    let (d, g): (Vec<f64>, Vec<f64>) = (0..=6)
        .map(|i| {
            let dist = 10f64.powf(-1.0 - 0.5 * i as f64);
            let xbar = a + dist;
            let peak = (0..=2000)
                .map(|k| analytic_green(c.xi1, c.xi2, a, b, a + (b - a) * k as f64 / 2000.0, xbar).abs())
                .fold(0.0, f64::max);
            (dist, peak)
        })
        .unzip();
    let decay = loglog_slope(&d, &g).unwrap();

    // first rows and columns of L22^{-1} for the Black-Scholes operator
    let sf = 89.748;
    let (mut hs, mut col_max, mut row_max) = (vec![], vec![], vec![]);
    for jf in [20usize, 40, 80, 160] {
        let h = sf / (jf as f64 + 0.4);
        let n = (1000.0 / h).ceil() as usize;
        let grid = Grid::from_nodes((0..=n).map(|j| j as f64 * h).collect()).unwrap();
        let op = DiscreteOperator::assemble(
            &grid,
            |s| Coefficients { p: 0.5 * 0.04 * s * s, w: 0.1 * s, z: -0.1, g: 0.0 },
            (100.0, 0.0),
        )
        .unwrap();
        let block = pde_block(&op.l, jf);
        let cols = discrete_green_columns(&block, &[0, 1]).unwrap();
        let rows = discrete_green_rows(&block, &[0, 1]).unwrap();
        let mx = |v: &[Vec<f64>]| v.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        hs.push(h);
        col_max.push(mx(&cols));
        row_max.push(mx(&rows));
    }
    let col_slope = loglog_slope(&hs, &col_max).unwrap();
    let row_slope = loglog_slope(&hs, &row_max).unwrap();

    // Laplacian against the tent
    let grid = Grid::uniform(0.0, 1.0, 99).unwrap();
    let h = grid.spacing(1);
    let op = DiscreteOperator::assemble(&grid, |_| Coefficients { p: 1.0, ..Default::default() }, (0.0, 0.0)).unwrap();
    let neg = op.l.scaled_plus_identity(-1.0, 0.0);
    let mut tent_worst: f64 = 0.0;
    for j in [10usize, 35, 50, 80] {
        let col = &discrete_green_columns(&neg, &[j - 1]).unwrap()[0];
        let peak = h * tent_green(0.0, 1.0, grid.node(j), grid.node(j));
        for i in 1..=grid.interior_len() {
            let t = h * tent_green(0.0, 1.0, grid.node(i), grid.node(j));
            tent_worst = tent_worst.max((col[i - 1] - t).abs() / peak);
        }
    }

    r.record(
        "criterion 8 (Green's function diagnostics)",
        (decay - 1.0).abs() <= 0.15 && (col_slope - 2.0).abs() <= 0.3 && (row_slope - 2.0).abs() <= 0.3 && tent_worst <= 0.05,
        format!(
            "analytic decay slope {decay:.3} vs 1 +- 0.15; L22^-1 first columns slope {col_slope:.3}, rows {row_slope:.3} vs 2 +- 0.3; Laplacian vs h*tent {:.2}% <= 5%",
            100.0 * tent_worst
        ),
    );
}

fn main() {
    let mut r = Report { lines: Vec::new() };
    let mut comp = Vec::new();
    criteria_1_2(&mut r, &mut comp);
    criterion_3(&mut r, &mut comp);
    criterion_4(&mut r, &mut comp);
    criterion_5(&mut r);
    criterion_6(&mut r);
    r.record(
        "criterion 7 (complementarity at every penalty exit, criteria 1-4)",
        comp.iter().all(|&c| c),
        format!("per study {comp:?}"),
    );
    criterion_8(&mut r);

    let failed: Vec<&str> = r.lines.iter().filter(|l| !l.1).map(|l| l.0.as_str()).collect();
    println!("{} of {} lines pass", r.lines.len() - failed.len(), r.lines.len());
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
