//! Four-phase deferred-correction solve of steady free boundary problems.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fdcore::{lagrange_eval, DiscreteOperator, OperatorStencils};
use crate::grid::{Grid, MIN_SOLVER_INTERIOR};
use crate::jump::{correction_vectors, estimate_jumps, CorrectionVectors, JumpData};
use crate::model::Model;
use crate::penalty::{penalty_iterate, PenaltyProblem, DEFAULT_MAX_ITER, DEFAULT_TOL};

pub const MAX_PHASES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialGuess {
    Constant(f64),
    Obstacle,
}

#[derive(Clone)]
pub struct BvpProblem<'a> {
    pub grid: Grid,
    pub model: &'a dyn Model,
    pub rho: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub initial_guess: InitialGuess,
}

impl<'a> BvpProblem<'a> {
    pub fn new(grid: Grid, model: &'a dyn Model, rho: f64) -> Self {
        Self { grid, model, rho, tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, initial_guess: InitialGuess::Obstacle }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.grid.interior_len();
        if m < MIN_SOLVER_INTERIOR {
            return Err(Error::InvalidGrid(format!("solver needs M >= {MIN_SOLVER_INTERIOR}, got {m}")));
        }
        if !(self.rho > 0.0) {
            return Err(Error::InvalidParameter(format!("rho = {} must be positive", self.rho)));
        }
        check_obstacle_derivatives(self.model, 0.0, &self.grid)
    }
}

/// Compare the obstacle's derivatives against fourth-order central
/// differences of the next-lower one at a few interior sample points.
pub fn check_obstacle_derivatives(model: &dyn Model, t: f64, grid: &Grid) -> Result<()> {
    let span = grid.right() - grid.left();
    let e = 1e-3 * span;
    for k in 1..8 {
        let s = grid.left() + span * k as f64 / 8.0;
        let f = |x: f64| model.obstacle(t, x);
        let (a, b, c, d) = (f(s - 2.0 * e), f(s - e), f(s + e), f(s + 2.0 * e));
        let here = f(s);
        for order in 1..=4 {
            let fd = (a[order - 1] - 8.0 * b[order - 1] + 8.0 * c[order - 1] - d[order - 1]) / (12.0 * e);
            let scale = here[order].abs().max(here[order - 1].abs() / span).max(1.0);
            if (fd - here[order]).abs() > 1e-6 * scale {
                return Err(Error::InconsistentObstacle { order, at: s });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseResult {
    pub phase: usize,
    /// Interior values `V_1..=V_M`.
    pub solution: Vec<f64>,
    pub front: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub complementarity: bool,
    /// Jumps extracted from this phase's solution.
    pub jumps: Option<JumpData>,
}

#[derive(Debug, Clone)]
pub struct BvpOutcome {
    pub grid: Grid,
    pub boundary: (f64, f64),
    pub phases: Vec<PhaseResult>,
    /// Why later phases were skipped, if they were.
    pub aborted: Option<Error>,
}

impl BvpOutcome {
    pub fn node_values(&self, phase: usize) -> Vec<f64> {
        augment(&self.phases[phase].solution, self.boundary)
    }

    /// Value at `x` for `phase` (see [`probe`]).
    pub fn probe(&self, phase: usize, x: f64) -> f64 {
        let p = &self.phases[phase];
        probe(&self.grid, &self.node_values(phase), p.front, x)
    }
}

pub(crate) fn augment(interior: &[f64], boundary: (f64, f64)) -> Vec<f64> {
    let mut v = Vec::with_capacity(interior.len() + 2);
    v.push(boundary.0);
    v.extend_from_slice(interior);
    v.push(boundary.1);
    v
}

/// Node value when `x` is a node, else quintic interpolation through the
/// six nodes nearest `x` that lie right of `front`.
pub fn probe(grid: &Grid, values: &[f64], front: Option<f64>, x: f64) -> f64 {
    if let Some(j) = grid.find_node(x, 1e-12) {
        return values[j];
    }
    let last = grid.last();
    let first_allowed = front.map_or(0, |f| grid.interval_of(f) + 1);
    let j = grid.interval_of(x);
    let start = j.saturating_sub(2).max(first_allowed).min(last - 5);
    lagrange_eval(&grid.nodes()[start..start + 6], &values[start..start + 6], x)
}

pub fn solve_bvp(problem: &BvpProblem<'_>, phases: usize) -> Result<BvpOutcome> {
    problem.validate()?;
    let phases = phases.clamp(1, MAX_PHASES);
    let grid = &problem.grid;
    let model = problem.model;
    let boundary = model.boundary(0.0);
    let stencils = Arc::new(OperatorStencils::new(grid)?);
    let op = DiscreteOperator::assemble_with(grid, stencils.clone(), |s| model.coefficients(0.0, s), boundary);
    let a = op.l.scaled_plus_identity(-1.0, 0.0);
    let interior = &grid.nodes()[1..=grid.interior_len()];
    let obstacle: Vec<f64> = interior.iter().map(|&s| model.obstacle(0.0, s)[0]).collect();
    let mut guess: Vec<f64> = match problem.initial_guess {
        InitialGuess::Constant(c) => vec![c; interior.len()],
        InitialGuess::Obstacle => obstacle.clone(),
    };
    let mut corrections = CorrectionVectors::zeros(interior.len());
    let mut prev_front = None;
    let mut out = BvpOutcome { grid: grid.clone(), boundary, phases: Vec::with_capacity(phases), aborted: None };
    for phase in 0..phases {
        let y: Vec<f64> = op.b.iter().zip(corrections.total()).map(|(b, c)| b + c).collect();
        let pp = PenaltyProblem::new(&a, &y, &obstacle, problem.rho)
            .with_tol(problem.tol)
            .with_max_iter(problem.max_iter);
        let res = penalty_iterate(&pp, Some(&guess))?;
        let values = augment(&res.solution, boundary);
        let orders = (phase + 1).min(3);
        let est = estimate_jumps(&values, grid, &res.indicator, |s| model.obstacle(0.0, s), prev_front, orders);
        let (front, jumps) = match est {
            Ok((j, e)) => {
                if !e.found {
                    log::warn!("phase {phase}: front not bracketed");
                }
                (Some(j.front), Some(j))
            }
            Err(e) => {
                out.aborted = Some(e);
                (None, None)
            }
        };
        out.phases.push(PhaseResult {
            phase,
            solution: res.solution.clone(),
            front,
            iterations: res.iterations,
            converged: res.converged,
            complementarity: res.complementarity,
            jumps: jumps.clone(),
        });
        let Some(jumps) = jumps else { break };
        if phase + 1 < phases {
            corrections = correction_vectors(grid, &stencils, &jumps, &op.p, &op.w)?;
        }
        prev_front = front;
        guess = res.solution;
    }
    Ok(out)
}
