//! BDF4 time marching with a four-phase deferred correction at every step.
//!
//! Problems are posed in solver time (`tau` under the square transform); the
//! model's coefficients must already carry the chain-rule factor.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::bvp::{augment, check_obstacle_derivatives, probe, MAX_PHASES};
use crate::error::{Error, Result};
use crate::fdcore::{BandMatrix, DiscreteOperator, OperatorStencils};
use crate::grid::{Grid, TimeGrid, MIN_SOLVER_INTERIOR};
use crate::jump::{correction_vectors, estimate_jumps, CorrectionVectors};
use crate::model::Model;
use crate::penalty::{penalty_iterate, PenaltyProblem, PenaltyResult, DEFAULT_MAX_ITER, DEFAULT_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Startup {
    /// Closed-form solution at steps 1..=3.
    Exact,
    /// RK4, then the three-level Simpson scheme, then BDF3.
    Rk4ThreeLevelBdf3,
}

#[derive(Clone)]
pub struct IvpProblem<'a> {
    pub grid: Grid,
    pub time: TimeGrid,
    pub model: &'a dyn Model,
    pub rho: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Steps `n <= t_skip` run uncorrected; later phases copy phase 0.
    pub t_skip: usize,
    pub startup: Startup,
    pub phases: usize,
}

impl<'a> IvpProblem<'a> {
    pub fn new(grid: Grid, time: TimeGrid, model: &'a dyn Model, rho: f64, startup: Startup) -> Self {
        Self {
            grid,
            time,
            model,
            rho,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            t_skip: 0,
            startup,
            phases: MAX_PHASES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.grid.interior_len();
        if m < MIN_SOLVER_INTERIOR {
            return Err(Error::InvalidGrid(format!("solver needs M >= {MIN_SOLVER_INTERIOR}, got {m}")));
        }
        if !(self.rho > 0.0) {
            return Err(Error::InvalidParameter(format!("rho = {} must be positive", self.rho)));
        }
        if !(1..=MAX_PHASES).contains(&self.phases) {
            return Err(Error::InvalidParameter(format!("phases = {} outside 1..={MAX_PHASES}", self.phases)));
        }
        if self.startup == Startup::Exact {
            for n in 1..=3 {
                if self.model.exact(self.time.solver_time(n), self.grid.left()).is_none() {
                    return Err(Error::InvalidParameter("exact startup needs a closed-form solution".into()));
                }
            }
        }
        check_obstacle_derivatives(self.model, self.time.solver_horizon(), &self.grid)
    }
}

/// Last four solutions of each phase, oldest first. Phases never share
/// entries after the startup values.
#[derive(Debug, Clone)]
pub struct History {
    per_phase: Vec<VecDeque<Vec<f64>>>,
}

impl History {
    /// Every phase starts from the same four startup solutions.
    pub fn seeded(start: [Vec<f64>; 4], phases: usize) -> Self {
        let q: VecDeque<Vec<f64>> = start.into_iter().collect();
        Self { per_phase: vec![q; phases] }
    }

    pub fn phase(&self, l: usize) -> [&[f64]; 4] {
        let q = &self.per_phase[l];
        [&q[0], &q[1], &q[2], &q[3]]
    }

    pub fn newest(&self, l: usize) -> &[f64] {
        &self.per_phase[l][3]
    }

    pub fn push(&mut self, l: usize, v: Vec<f64>) {
        let q = &mut self.per_phase[l];
        q.pop_front();
        q.push_back(v);
    }
}

/// `k b + 4 V^{n+3} - 3 V^{n+2} + 4/3 V^{n+1} - 1/4 V^n` with `history`
/// ordered `[V^n, V^{n+1}, V^{n+2}, V^{n+3}]`.
pub fn bdf4_rhs(history: [&[f64]; 4], b: &[f64], k: f64) -> Vec<f64> {
    let [h0, h1, h2, h3] = history;
    (0..b.len())
        .map(|i| k * b[i] + 4.0 * h3[i] - 3.0 * h2[i] + 4.0 / 3.0 * h1[i] - 0.25 * h0[i])
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    pub time: f64,
    pub fronts: Vec<Option<f64>>,
    pub iterations: Vec<usize>,
    pub complementarity: Vec<bool>,
    /// A front or jump estimate failed after `t_skip`; later phases of this
    /// step are uncorrected copies.
    pub degraded: bool,
}

#[derive(Debug, Clone)]
pub struct IvpOutcome {
    pub grid: Grid,
    pub time: TimeGrid,
    /// Boundary values at the final time.
    pub boundary: (f64, f64),
    /// Interior solution per phase at the final time.
    pub solutions: Vec<Vec<f64>>,
    pub steps: Vec<StepRecord>,
    /// Penalty iterations spent in the startup steps.
    pub startup_iterations: usize,
}

impl IvpOutcome {
    pub fn node_values(&self, phase: usize) -> Vec<f64> {
        augment(&self.solutions[phase], self.boundary)
    }

    pub fn final_front(&self, phase: usize) -> Option<f64> {
        self.steps.last().and_then(|s| s.fronts[phase])
    }

    pub fn probe(&self, phase: usize, x: f64) -> f64 {
        probe(&self.grid, &self.node_values(phase), self.final_front(phase), x)
    }

    /// Penalty iterations of `phase` summed over all BDF4 steps.
    pub fn iterations(&self, phase: usize) -> usize {
        self.steps.iter().map(|s| s.iterations[phase]).sum()
    }

    pub fn degraded(&self) -> bool {
        self.steps.iter().any(|s| s.degraded)
    }

    pub fn complementarity(&self, phase: usize) -> bool {
        self.steps.iter().all(|s| s.complementarity[phase])
    }
}

struct Setup<'p, 'a> {
    problem: &'p IvpProblem<'a>,
    stencils: Arc<OperatorStencils>,
}

impl Setup<'_, '_> {
    fn operator(&self, t: f64) -> DiscreteOperator {
        let model = self.problem.model;
        DiscreteOperator::assemble_with(
            &self.problem.grid,
            self.stencils.clone(),
            |s| model.coefficients(t, s),
            model.boundary(t),
        )
    }

    fn interior(&self) -> &[f64] {
        &self.problem.grid.nodes()[1..=self.problem.grid.interior_len()]
    }

    fn obstacle(&self, t: f64) -> Vec<f64> {
        self.interior().iter().map(|&s| self.problem.model.obstacle(t, s)[0]).collect()
    }

    fn solve(&self, a: &BandMatrix, y: &[f64], obstacle: &[f64], rho: f64, guess: &[f64]) -> Result<PenaltyResult> {
        let pp = PenaltyProblem::new(a, y, obstacle, rho)
            .with_tol(self.problem.tol)
            .with_max_iter(self.problem.max_iter);
        penalty_iterate(&pp, Some(guess))
    }

    /// `V^0..V^3` and the iterations spent producing them.
    fn startup(&self) -> Result<([Vec<f64>; 4], usize)> {
        let p = self.problem;
        let model = p.model;
        let tg = &p.time;
        let v0: Vec<f64> = self.interior().iter().map(|&s| model.initial(s)).collect();
        match p.startup {
            Startup::Exact => {
                let at = |n: usize| -> Vec<f64> {
                    let t = tg.solver_time(n);
                    self.interior().iter().map(|&s| model.exact(t, s).unwrap_or(f64::NAN)).collect()
                };
                Ok(([v0, at(1), at(2), at(3)], 0))
            }
            Startup::Rk4ThreeLevelBdf3 => {
                let k = tg.solver_step();
                let (t0, t1, t2, t3) = (tg.solver_time(0), tg.solver_time(1), tg.solver_time(2), tg.solver_time(3));
                let v1 = self.rk4_step(&v0, t0, k)?;
                let mut iters = 0;

                let (op0, op1, op2) = (self.operator(t0), self.operator(t1), self.operator(t2));
                let (r0, r1) = (op0.residual(&v0), op1.residual(&v1));
                let a2 = op2.l.scaled_plus_identity(-k / 3.0, 1.0);
                let y2: Vec<f64> = (0..v0.len())
                    .map(|i| v0[i] + k / 3.0 * (4.0 * r1[i] + r0[i]) + k / 3.0 * op2.b[i])
                    .collect();
                let res2 = self.solve(&a2, &y2, &self.obstacle(t2), 2.0 * p.rho, &v1)?;
                iters += res2.iterations;
                let v2 = res2.solution;

                let op3 = self.operator(t3);
                let a3 = op3.l.scaled_plus_identity(-k, 11.0 / 6.0);
                let y3: Vec<f64> = (0..v0.len())
                    .map(|i| 3.0 * v2[i] - 1.5 * v1[i] + v0[i] / 3.0 + k * op3.b[i])
                    .collect();
                let res3 = self.solve(&a3, &y3, &self.obstacle(t3), p.rho, &v2)?;
                iters += res3.iterations;
                Ok(([v0, v1, v2, res3.solution], iters))
            }
        }
    }

    /// Classical RK4 on `V' = L V + b`, followed by the implicit penalty
    /// projection `V = W + rho max(V* - V, 0)`, solved node by node.
    fn rk4_step(&self, v0: &[f64], t0: f64, k: f64) -> Result<Vec<f64>> {
        let f = |t: f64, v: &[f64]| self.operator(t).residual(v);
        let axpy = |v: &[f64], d: &[f64], s: f64| -> Vec<f64> { v.iter().zip(d).map(|(a, b)| a + s * b).collect() };
        let k1 = f(t0, v0);
        let k2 = f(t0 + 0.5 * k, &axpy(v0, &k1, 0.5 * k));
        let k3 = f(t0 + 0.5 * k, &axpy(v0, &k2, 0.5 * k));
        let k4 = f(t0 + k, &axpy(v0, &k3, k));
        let rho = self.problem.rho;
        let obstacle = self.obstacle(t0 + k);
        let out: Vec<f64> = (0..v0.len())
            .map(|i| {
                let w = v0[i] + k / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                if w < obstacle[i] {
                    (w + rho * obstacle[i]) / (1.0 + rho)
                } else {
                    w
                }
            })
            .collect();
        if let Some(i) = out.iter().position(|x| !x.is_finite()) {
            log::error!("RK4 startup produced a non-finite value at node {}; try smaller first steps", i + 1);
            return Err(Error::StartupUnstable(1));
        }
        Ok(out)
    }
}

pub fn solve_ivp(problem: &IvpProblem<'_>) -> Result<IvpOutcome> {
    problem.validate()?;
    let grid = &problem.grid;
    let tg = &problem.time;
    let model = problem.model;
    let phases = problem.phases;
    let setup = Setup { problem, stencils: Arc::new(OperatorStencils::new(grid)?) };
    let (start, startup_iterations) = setup.startup()?;
    let mut history = History::seeded(start, phases);
    let k = tg.solver_step();
    let mut prev_fronts: Vec<Option<f64>> = vec![None; phases];
    let mut steps = Vec::with_capacity(tg.steps.saturating_sub(3));

    for n in 4..=tg.steps {
        let t = tg.solver_time(n);
        let op = setup.operator(t);
        let a = op.l.scaled_plus_identity(-k, 25.0 / 12.0);
        let obstacle = setup.obstacle(t);
        let obstacle_fn = |s: f64| model.obstacle(t, s);
        let boundary = model.boundary(t);
        let skip = n <= problem.t_skip;

        let mut record = StepRecord {
            n,
            time: t,
            fronts: vec![None; phases],
            iterations: vec![0; phases],
            complementarity: vec![true; phases],
            degraded: false,
        };
        let mut current: Vec<Vec<f64>> = Vec::with_capacity(phases);
        let mut corrections: Option<CorrectionVectors> = None;
        for l in 0..phases {
            if l > 0 && corrections.is_none() {
                record.fronts[l] = record.fronts[l - 1];
                record.complementarity[l] = record.complementarity[l - 1];
                current.push(current[l - 1].clone());
                continue;
            }
            let mut y = bdf4_rhs(history.phase(l), &op.b, k);
            if let Some(c) = corrections.take() {
                y.iter_mut().zip(c.total()).for_each(|(y, c)| *y += k * c);
            }
            let guess = if l == 0 { history.newest(0) } else { &current[l - 1] };
            let res = setup.solve(&a, &y, &obstacle, problem.rho, guess)?;
            record.iterations[l] = res.iterations;
            record.complementarity[l] = res.complementarity;

            let values = augment(&res.solution, boundary);
            let orders = (l + 1).min(3);
            let initial = prev_fronts[l].or(if l > 0 { record.fronts[l - 1] } else { None });
            match estimate_jumps(&values, grid, &res.indicator, obstacle_fn, initial, orders) {
                Ok((jumps, est)) => {
                    if !est.found {
                        log::warn!("step {n}, phase {l}: front fell back to the bracket midpoint");
                    }
                    record.fronts[l] = Some(jumps.front);
                    if !skip && l + 1 < phases {
                        match correction_vectors(grid, &setup.stencils, &jumps, &op.p, &op.w) {
                            Ok(c) => corrections = Some(c),
                            Err(e) => {
                                log::warn!("step {n}, phase {l}: {e}");
                                record.degraded = true;
                            }
                        }
                    }
                }
                Err(e) => {
                    if !skip {
                        log::warn!("step {n}, phase {l}: {e}");
                        record.degraded = true;
                    }
                }
            }
            current.push(res.solution);
        }
        for (l, v) in current.into_iter().enumerate() {
            history.push(l, v);
        }
        prev_fronts.clone_from(&record.fronts);
        steps.push(record);
    }

    let solutions = (0..phases).map(|l| history.newest(l).to_vec()).collect();
    Ok(IvpOutcome {
        grid: grid.clone(),
        time: tg.clone(),
        boundary: model.boundary(tg.solver_horizon()),
        solutions,
        steps,
        startup_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdcore::Coefficients;
    use crate::grid::TimeTransform;
    use crate::model::MovingBoundaryTest;

    #[test]
    fn bdf4_rhs_identities() {
        let v = [1.5, -2.0];
        let y = bdf4_rhs([&v, &v, &v, &v], &[0.0, 0.0], 0.3);
        for (a, b) in y.iter().zip(v) {
            assert!((a - 25.0 / 12.0 * b).abs() < 1e-14);
        }
        let z = [0.0; 3];
        assert_eq!(bdf4_rhs([&z, &z, &z, &z], &[1.0, 0.0, 0.0], 0.5), vec![0.5, 0.0, 0.0]);
    }

    #[test]
    fn bdf4_exact_on_quartic_in_time() {
        // u' = 4 t^3 + 1 has u = t^4 + t; BDF4 on a scalar is exact for it
        let k = 0.1;
        let u = |t: f64| t.powi(4) + t;
        let n = 4.0;
        let hist = [[u(0.0)], [u(k)], [u(2.0 * k)], [u(3.0 * k)]];
        let tn = n * k;
        let y = bdf4_rhs([&hist[0], &hist[1], &hist[2], &hist[3]], &[4.0 * tn.powi(3) + 1.0], k);
        assert!((y[0] * 12.0 / 25.0 - u(tn)).abs() < 1e-13);
    }

    #[test]
    fn history_keeps_phases_apart() {
        let start = [vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let mut h = History::seeded(start, 2);
        h.push(1, vec![9.0]);
        assert_eq!(h.phase(0)[3], &[3.0]);
        assert_eq!(h.phase(1)[3], &[9.0]);
        assert_eq!(h.phase(1)[0], &[1.0]);
    }

    struct Heat;
    impl Model for Heat {
        fn coefficients(&self, _t: f64, _s: f64) -> Coefficients {
            Coefficients { p: 1.0, ..Default::default() }
        }
        fn obstacle(&self, _t: f64, _s: f64) -> [f64; 5] {
            [-1e6, 0.0, 0.0, 0.0, 0.0]
        }
        fn boundary(&self, _t: f64) -> (f64, f64) {
            (0.0, 0.0)
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let grid = Grid::uniform(0.0, 1.0, 15).unwrap();
        let tg = TimeGrid::new(0.1, 8, TimeTransform::Identity).unwrap();
        let mut p = IvpProblem::new(grid, tg, &Heat, 1e8, Startup::Rk4ThreeLevelBdf3);
        p.phases = 1;
        let out = solve_ivp(&p).unwrap();
        assert!(out.solutions[0].iter().all(|&v| v == 0.0));
        assert!(out.steps.iter().all(|s| s.fronts[0].is_none()));
    }

    #[test]
    fn t_skip_copies_phase_zero() {
        let grid = Grid::uniform(-2.0, 2.0, 39).unwrap();
        let tg = TimeGrid::new(0.5, 40, TimeTransform::Square).unwrap();
        let mut p = IvpProblem::new(grid, tg, &MovingBoundaryTest, 1e8, Startup::Exact);
        p.t_skip = 6;
        let out = solve_ivp(&p).unwrap();
        for s in &out.steps {
            let same = s.iterations[1..].iter().all(|&i| i == 0);
            assert_eq!(same, s.n <= 6, "step {}", s.n);
        }
    }

    #[test]
    fn exact_startup_requires_closed_form() {
        let grid = Grid::uniform(0.0, 1.0, 15).unwrap();
        let tg = TimeGrid::new(0.1, 8, TimeTransform::Identity).unwrap();
        assert!(solve_ivp(&IvpProblem::new(grid, tg, &Heat, 1e8, Startup::Exact)).is_err());
    }

    #[test]
    fn moving_boundary_phases_converge() {
        let grid = Grid::uniform(-2.0, 2.0, 79).unwrap();
        let tg = TimeGrid::new(0.5, 160, TimeTransform::Square).unwrap();
        let out = solve_ivp(&IvpProblem::new(grid, tg, &MovingBoundaryTest, 1e8, Startup::Exact)).unwrap();
        let exact = MovingBoundaryTest.exact(0.5f64.sqrt(), 0.0).unwrap();
        let e0 = (out.probe(0, 0.0) - exact).abs();
        let e3 = (out.probe(3, 0.0) - exact).abs();
        assert!(e3 < e0 / 5.0, "{e0} {e3}");
        assert!(!out.degraded());
        let front = out.final_front(3).unwrap();
        assert!((front + 0.5f64.sqrt()).abs() < 1e-3, "{front}");
    }
}
