//! Refinement studies for the three experiments. Levels are independent, so
//! they run on the rayon pool when the `parallel` feature is on.

use crate::bvp::{solve_bvp, BvpProblem, InitialGuess};
use crate::convergence::observed_order;
use crate::error::Result;
use crate::grid::{Grid, StretchParams, TimeGrid, TimeTransform};
use crate::ivp::{solve_ivp, IvpProblem, Startup};
use crate::model::{EllipticObstacle, Model, MovingBoundaryTest};
use crate::option::{price_american_put, AmericanConfig, MarketParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

/// `f` over `items` in order. `Parallel` degrades to a loop without the
/// `parallel` feature.
pub fn map_levels<T, R, F>(items: &[T], mode: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRow {
    /// Penalty iterations of this phase alone.
    pub iterations: usize,
    pub value: f64,
    /// Distance to the exact value, or the change from the previous level
    /// when no exact value exists.
    pub error: Option<f64>,
    pub front: Option<f64>,
    pub front_error: Option<f64>,
    pub complementarity: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub level: usize,
    pub nx: usize,
    pub nt: Option<usize>,
    pub phases: Vec<PhaseRow>,
    pub degraded: bool,
}

impl LevelResult {
    /// Iterations through `phase`, counting earlier phases.
    pub fn cumulative_iterations(&self, phase: usize) -> usize {
        self.phases[..=phase].iter().map(|p| p.iterations).sum()
    }
}

/// Per-phase `log2(e_coarse / e_fine)` down the levels; `None` where an error
/// is missing or zero.
pub fn phase_orders(levels: &[LevelResult], phase: usize) -> Vec<Option<f64>> {
    let mut out = vec![None];
    for w in levels.windows(2) {
        let pair = (w[0].phases.get(phase).and_then(|p| p.error), w[1].phases.get(phase).and_then(|p| p.error));
        out.push(match pair {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 => observed_order(&[a, b]).ok().and_then(|v| v[0]),
            _ => None,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvpStudy {
    pub rho: f64,
    pub probe: f64,
    pub phases: usize,
    pub tol: f64,
}

/// Elliptic obstacle problem on `[-1, 1]`; `n` counts intervals.
pub fn bvp_obstacle_study(ns: &[usize], cfg: &BvpStudy, mode: Execution) -> Result<Vec<LevelResult>> {
    let model = EllipticObstacle;
    let exact = model.exact(0.0, cfg.probe).expect("closed form");
    let runs = map_levels(ns, mode, |&n| -> Result<LevelResult> {
        let grid = Grid::uniform(-1.0, 1.0, n.saturating_sub(1))?;
        let mut p = BvpProblem::new(grid, &model, cfg.rho);
        p.tol = cfg.tol;
        p.initial_guess = InitialGuess::Constant(1.0);
        let out = solve_bvp(&p, cfg.phases)?;
        let phases = out
            .phases
            .iter()
            .map(|ph| {
                let value = out.probe(ph.phase, cfg.probe);
                PhaseRow {
                    iterations: ph.iterations,
                    value,
                    error: Some((value - exact).abs()),
                    front: ph.front,
                    front_error: ph.front.map(f64::abs),
                    complementarity: ph.complementarity,
                }
            })
            .collect();
        Ok(LevelResult { level: 0, nx: n, nt: None, phases, degraded: out.aborted.is_some() })
    });
    number(runs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingBoundaryStudy {
    pub rho: f64,
    pub probe: f64,
    pub phases: usize,
    pub tol: f64,
    /// Physical end time.
    pub horizon: f64,
}

/// Moving boundary test on `[-2, 2]` with exact startup and `t = tau^2`.
pub fn moving_boundary_study(
    pairs: &[(usize, usize)],
    cfg: &MovingBoundaryStudy,
    mode: Execution,
) -> Result<Vec<LevelResult>> {
    let model = MovingBoundaryTest;
    let tau = cfg.horizon.sqrt();
    let exact = model.exact(tau, cfg.probe).expect("closed form");
    let runs = map_levels(pairs, mode, |&(nx, nt)| -> Result<LevelResult> {
        let grid = Grid::uniform(-2.0, 2.0, nx.saturating_sub(1))?;
        let time = TimeGrid::new(cfg.horizon, nt, TimeTransform::Square)?;
        let mut p = IvpProblem::new(grid, time, &model, cfg.rho, Startup::Exact);
        p.tol = cfg.tol;
        p.phases = cfg.phases;
        let out = solve_ivp(&p)?;
        let phases = (0..cfg.phases)
            .map(|l| {
                let value = out.probe(l, cfg.probe);
                let front = out.final_front(l);
                PhaseRow {
                    iterations: out.iterations(l) + if l == 0 { out.startup_iterations } else { 0 },
                    value,
                    error: Some((value - exact).abs()),
                    front,
                    front_error: front.map(|f| (f - MovingBoundaryTest::front(tau)).abs()),
                    complementarity: out.complementarity(l),
                }
            })
            .collect();
        Ok(LevelResult { level: 0, nx, nt: Some(nt), phases, degraded: out.degraded() })
    });
    number(runs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmericanStudy {
    pub params: MarketParams,
    pub s_max: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t_skip: usize,
    pub rho: f64,
    pub phases: usize,
    pub tol: f64,
}

/// American put at `S = K`; errors are changes from the previous level.
pub fn american_study(pairs: &[(usize, usize)], cfg: &AmericanStudy, mode: Execution) -> Result<Vec<LevelResult>> {
    let stretch = StretchParams::new(cfg.params.strike, cfg.alpha, cfg.beta, 0.0, cfg.s_max)?;
    let runs = map_levels(pairs, mode, |&(nx, nt)| -> Result<LevelResult> {
        let config = AmericanConfig { nx, nt, stretch, t_skip: cfg.t_skip, rho: cfg.rho, phases: cfg.phases, tol: cfg.tol };
        let res = price_american_put(&cfg.params, &config)?;
        let out = &res.outcome;
        let phases = (0..cfg.phases)
            .map(|l| PhaseRow {
                iterations: out.iterations(l) + if l == 0 { out.startup_iterations } else { 0 },
                value: res.prices[l],
                error: None,
                front: out.final_front(l),
                front_error: None,
                complementarity: out.complementarity(l),
            })
            .collect();
        Ok(LevelResult { level: 0, nx, nt: Some(nt), phases, degraded: out.degraded() })
    });
    let mut levels = number(runs)?;
    for i in 1..levels.len() {
        let prev: Vec<f64> = levels[i - 1].phases.iter().map(|p| p.value).collect();
        for (p, v) in levels[i].phases.iter_mut().zip(prev) {
            p.error = Some((p.value - v).abs());
        }
    }
    Ok(levels)
}

fn number(runs: Vec<Result<LevelResult>>) -> Result<Vec<LevelResult>> {
    runs.into_iter()
        .enumerate()
        .map(|(i, r)| r.map(|l| LevelResult { level: i, ..l }))
        .collect()
}
