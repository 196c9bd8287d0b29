//! Space grids (uniform and erfc-stretched) and time grids.

use crate::error::{Error, Result};
use crate::special::erfc;
use std::f64::consts::PI;

/// Smallest interior node count accepted by [`Grid`].
pub const MIN_INTERIOR: usize = 3;

/// Smallest interior node count the deferred-correction drivers accept; the
/// front diagnostics need nodes `m+2..m+6` inside the PDE region.
pub const MIN_SOLVER_INTERIOR: usize = 7;

/// Ordered space nodes `S_0 < S_1 < ... < S_{M+1}`; nodes `1..=M` are interior.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    nodes: Vec<f64>,
}

impl Grid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_INTERIOR + 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least {} nodes, got {}",
                MIN_INTERIOR + 2,
                nodes.len()
            )));
        }
        if let Some(i) = nodes.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid(format!("node {i} is not finite")));
        }
        if let Some(i) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "nodes not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self { nodes })
    }

    /// `M + 2` equally spaced nodes on `[a, b]`.
    pub fn uniform(a: f64, b: f64, interior: usize) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGrid(format!("bad bounds [{a}, {b}]")));
        }
        if interior < MIN_INTERIOR {
            return Err(Error::InvalidGrid(format!(
                "M = {interior} is below the minimum {MIN_INTERIOR}"
            )));
        }
        let n = interior + 1;
        let h = (b - a) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|j| a + j as f64 * h).collect();
        nodes[n] = b;
        Self::from_nodes(nodes)
    }

    /// Nodes `S_j` with `xi(S_j) = j / (M + 1)` for the erfc stretching map.
    pub fn stretched(interior: usize, params: &StretchParams) -> Result<Self> {
        if interior < MIN_INTERIOR {
            return Err(Error::InvalidGrid(format!(
                "M = {interior} is below the minimum {MIN_INTERIOR}"
            )));
        }
        let n = interior + 1;
        let span = params.s_max - params.s_min;
        let tol = 1e-12 * span;
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(params.s_min);
        let mut guess = params.s_min;
        for j in 1..n {
            let target = j as f64 / n as f64;
            let s = invert_monotone(
                |s| params.map_unchecked(s) - target,
                |s| params.density(s),
                params.s_min,
                params.s_max,
                guess,
                tol,
            )?;
            nodes.push(s);
            guess = s;
        }
        nodes.push(params.s_max);
        Self::from_nodes(nodes)
    }

    #[inline]
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        self.nodes[j]
    }

    /// Interior node count `M`.
    #[inline]
    pub fn interior_len(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Index of the last node, `M + 1`.
    #[inline]
    pub fn last(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Spacing `S_j - S_{j-1}` for `j >= 1`.
    #[inline]
    pub fn spacing(&self, j: usize) -> f64 {
        self.nodes[j] - self.nodes[j - 1]
    }

    pub fn min_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn left(&self) -> f64 {
        self.nodes[0]
    }

    pub fn right(&self) -> f64 {
        self.nodes[self.last()]
    }

    /// Index `j` with `S_j <= x < S_{j+1}`, clamped to `0..=M`.
    pub fn interval_of(&self, x: f64) -> usize {
        let k = self.nodes.partition_point(|&s| s <= x);
        k.saturating_sub(1).min(self.last() - 1)
    }

    /// Index of the node equal to `x` up to `rel_tol * (b - a)`.
    pub fn find_node(&self, x: f64, rel_tol: f64) -> Option<usize> {
        let tol = rel_tol * (self.right() - self.left());
        let j = self.interval_of(x);
        [j, j + 1]
            .into_iter()
            .find(|&i| i <= self.last() && (self.nodes[i] - x).abs() <= tol)
    }
}

/// Parameters of the erfc stretching map, which concentrates nodes with
/// relative density `1 / beta` over a band of width about `6 alpha` around
/// `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StretchParams {
    pub center: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s_min: f64,
    pub s_max: f64,
}

impl StretchParams {
    pub fn new(center: f64, alpha: f64, beta: f64, s_min: f64, s_max: f64) -> Result<Self> {
        let p = Self { center, alpha, beta, s_min, s_max };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidParameter(format!("beta = {} not in (0, 1]", self.beta)));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha = {} must be positive", self.alpha)));
        }
        if !(self.s_min < self.center && self.center < self.s_max) {
            return Err(Error::InvalidParameter(format!(
                "need s_min < center < s_max, got {} < {} < {}",
                self.s_min, self.center, self.s_max
            )));
        }
        Ok(())
    }

    fn amplitude(&self) -> f64 {
        0.5 * PI.sqrt() * (1.0 - self.beta) / self.beta * self.alpha
    }

    fn normalization(&self) -> (f64, f64) {
        let c = self.amplitude();
        let e_max = erfc((self.s_max - self.center) / self.alpha);
        let e_min = erfc((self.s_min - self.center) / self.alpha);
        let c1 = 1.0 / ((self.s_max - self.s_min) - c * (e_max - e_min));
        let c2 = (c * e_min - self.s_min) * c1;
        (c1, c2)
    }

    fn map_unchecked(&self, s: f64) -> f64 {
        let (c1, c2) = self.normalization();
        (s - self.amplitude() * erfc((s - self.center) / self.alpha)) * c1 + c2
    }

    /// `xi(S)`, mapping `[s_min, s_max]` monotonically onto `[0, 1]`.
    pub fn map(&self, s: f64) -> Result<f64> {
        self.validate()?;
        if !(self.s_min <= s && s <= self.s_max) {
            return Err(Error::InvalidParameter(format!(
                "S = {s} outside [{}, {}]",
                self.s_min, self.s_max
            )));
        }
        Ok(self.map_unchecked(s))
    }

    /// `xi'(S) = C1 (1 + (1 - beta) / beta * exp(-((S - center) / alpha)^2))`.
    pub fn density(&self, s: f64) -> f64 {
        let (c1, _) = self.normalization();
        let u = (s - self.center) / self.alpha;
        c1 * (1.0 + (1.0 - self.beta) / self.beta * (-u * u).exp())
    }
}

/// Safeguarded Newton for an increasing function on `[lo, hi]`.
fn invert_monotone(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    guess: f64,
    tol: f64,
) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::Bracket(format!("no sign change on [{lo}, {hi}]")));
    }
    let mut x = guess.clamp(lo, hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let mut next = x - fx / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= tol || hi - lo <= tol {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::Bracket("inversion did not converge".into()))
}

/// Time-axis transform applied to a uniform solver grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeTransform {
    Identity,
    /// `t = tau^2` with `tau` uniform; steps are dense near `t = 0`.
    Square,
}

/// Physical times `0 = t_0 < ... < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub horizon: f64,
    pub steps: usize,
    pub transform: TimeTransform,
    pub times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize, transform: TimeTransform) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter(format!("horizon {horizon} must be positive")));
        }
        if steps < 4 {
            return Err(Error::InvalidParameter(format!("need at least 4 steps, got {steps}")));
        }
        let n = steps as f64;
        let times = (0..=steps)
            .map(|i| {
                let f = i as f64 / n;
                match transform {
                    TimeTransform::Identity => horizon * f,
                    TimeTransform::Square => horizon * (f * f),
                }
            })
            .collect();
        Ok(Self { horizon, steps, transform, times })
    }

    /// End of the solver-time axis: `T` or `sqrt(T)`.
    pub fn solver_horizon(&self) -> f64 {
        match self.transform {
            TimeTransform::Identity => self.horizon,
            TimeTransform::Square => self.horizon.sqrt(),
        }
    }

    /// Uniform step in solver time.
    pub fn solver_step(&self) -> f64 {
        self.solver_horizon() / self.steps as f64
    }

    /// Solver time of step `n`.
    pub fn solver_time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.solver_horizon()
        } else {
            self.solver_horizon() * (n as f64 / self.steps as f64)
        }
    }

    /// Physical time for a solver time.
    pub fn physical_time(&self, solver_time: f64) -> f64 {
        match self.transform {
            TimeTransform::Identity => solver_time,
            TimeTransform::Square => solver_time * solver_time,
        }
    }
}
