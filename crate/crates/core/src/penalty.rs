//! Discrete penalty iteration for `A V = y + rho I(V) (V* - V)`.

use crate::error::{Error, Result};
use crate::fdcore::{solve_banded, BandMatrix};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone)]
pub struct PenaltyProblem<'a> {
    pub a: &'a BandMatrix,
    pub y: &'a [f64],
    pub obstacle: &'a [f64],
    pub rho: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl<'a> PenaltyProblem<'a> {
    pub fn new(a: &'a BandMatrix, y: &'a [f64], obstacle: &'a [f64], rho: f64) -> Self {
        Self { a, y, obstacle, rho, tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyResult {
    pub solution: Vec<f64>,
    pub indicator: Vec<bool>,
    pub iterations: usize,
    pub converged: bool,
    /// Exit complementarity held at every node.
    pub complementarity: bool,
}

/// `I_i = 1` exactly when `V*_i > V_i`.
pub fn indicator(v: &[f64], obstacle: &[f64]) -> Vec<bool> {
    v.iter().zip(obstacle).map(|(v, o)| o > v).collect()
}

/// Complementarity slack for node value `obstacle` at penalty `rho`.
#[inline]
pub fn complementarity_eps(obstacle: f64, rho: f64) -> f64 {
    1e3 * obstacle.abs().max(1.0) / rho
}

/// First node violating exit complementarity, if any.
pub fn complementarity_violation(solution: &[f64], indicator: &[bool], obstacle: &[f64], rho: f64) -> Option<usize> {
    (0..solution.len()).find(|&i| {
        let eps = complementarity_eps(obstacle[i], rho);
        let ok = if indicator[i] {
            (solution[i] - obstacle[i]).abs() <= eps
        } else {
            solution[i] >= obstacle[i] - eps
        };
        !ok
    })
}

pub fn penalty_iterate(problem: &PenaltyProblem<'_>, initial_guess: Option<&[f64]>) -> Result<PenaltyResult> {
    let n = problem.a.dim();
    for len in [problem.y.len(), problem.obstacle.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    if !(problem.rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho = {} must be positive", problem.rho)));
    }
    if problem.rho < 1e3 * problem.a.max_abs() {
        log::warn!(
            "penalty rho = {:e} is not much larger than max|A| = {:e}",
            problem.rho,
            problem.a.max_abs()
        );
    }
    let rho = problem.rho;
    let mut v = match initial_guess {
        Some(g) if g.len() == n => g.to_vec(),
        Some(g) => return Err(Error::DimensionMismatch { expected: n, got: g.len() }),
        None => problem.obstacle.to_vec(),
    };
    let mut active = indicator(&v, problem.obstacle);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < problem.max_iter {
        iterations += 1;
        let shift: Vec<f64> = active.iter().map(|&a| if a { rho } else { 0.0 }).collect();
        let rhs: Vec<f64> = problem
            .y
            .iter()
            .zip(&shift)
            .zip(problem.obstacle)
            .map(|((y, s), o)| y + s * o)
            .collect();
        let next = solve_banded(&problem.a.with_diagonal_shift(&shift), &rhs)?;
        let next_active = indicator(&next, problem.obstacle);
        let update = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
            .fold(0.0, f64::max);
        v = next;
        let same = next_active == active;
        active = next_active;
        if same || update <= problem.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("penalty iteration hit max_iter = {}", problem.max_iter);
    }
    let complementarity = complementarity_violation(&v, &active, problem.obstacle, rho).is_none();
    Ok(PenaltyResult { solution: v, indicator: active, iterations, converged, complementarity })
}
