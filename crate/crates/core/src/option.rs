//! Black–Scholes put closed forms and the American put via the difference
//! `V - V^E` to the European price.

use crate::error::{Error, Result};
use crate::fdcore::Coefficients;
use crate::grid::{Grid, StretchParams, TimeGrid, TimeTransform};
use crate::ivp::{solve_ivp, IvpOutcome, IvpProblem, Startup};
use crate::model::Model;
use crate::special::{norm_cdf, norm_pdf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    pub sigma: f64,
    pub r: f64,
    pub d: f64,
    pub strike: f64,
    pub expiry: f64,
}

impl MarketParams {
    pub fn new(sigma: f64, r: f64, d: f64, strike: f64, expiry: f64) -> Result<Self> {
        let p = Self { sigma, r, d, strike, expiry };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.strike > 0.0 && self.expiry > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need sigma, K, T > 0, got {}, {}, {}",
                self.sigma, self.strike, self.expiry
            )));
        }
        if !(self.r.is_finite() && self.d.is_finite()) {
            return Err(Error::InvalidParameter("rates must be finite".into()));
        }
        Ok(())
    }
}

/// Value and `S`-derivatives up to order four.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuropeanGreeks {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    /// Time derivative in backward time.
    pub dt: f64,
    /// `t = 0` at `S = K`, where the derivatives do not exist.
    pub singular: bool,
}

impl EuropeanGreeks {
    pub fn derivatives(&self) -> [f64; 5] {
        [self.value, self.d1, self.d2, self.d3, self.d4]
    }
}

/// European put at backward time `t` (time to expiry).
pub fn european_put(params: &MarketParams, t: f64, s: f64) -> EuropeanGreeks {
    let MarketParams { sigma, r, d, strike: k, .. } = *params;
    if t <= 0.0 || s <= 0.0 {
        let value = (k - s).max(0.0);
        let d1 = if s < k { -1.0 } else if s > k { 0.0 } else { -0.5 };
        return EuropeanGreeks { value, d1, d2: 0.0, d3: 0.0, d4: 0.0, dt: 0.0, singular: t <= 0.0 && s == k };
    }
    let a = sigma * t.sqrt();
    let x1 = ((s / k).ln() + (r - d + 0.5 * sigma * sigma) * t) / a;
    let x2 = x1 - a;
    let (disc_r, disc_d) = ((-r * t).exp(), (-d * t).exp());
    let phi = norm_pdf(x1);
    let value = k * disc_r * norm_cdf(-x2) - s * disc_d * norm_cdf(-x1);
    let d1 = -disc_d * norm_cdf(-x1);
    let d2 = disc_d * phi / (s * a);
    // S d/dS of phi(x1)/S is -(x1/a + 1) phi(x1)/S
    let c = x1 / a + 1.0;
    let d3 = -d2 * c / s;
    let d4 = -d3 * c / s - d2 / (a * a * s * s) + d2 * c / (s * s);
    let dt = 0.5 * sigma * sigma * s * s * d2 + (r - d) * s * d1 - r * value;
    EuropeanGreeks { value, d1, d2, d3, d4, dt, singular: false }
}

/// American put difference problem in `tau = sqrt(t)`:
/// `V_tau = 2 tau L_BS V + rho max((K - S) - V^E - V, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct AmericanPutDiff {
    pub params: MarketParams,
}

impl Model for AmericanPutDiff {
    fn coefficients(&self, tau: f64, s: f64) -> Coefficients {
        let MarketParams { sigma, r, d, .. } = self.params;
        Coefficients { p: tau * sigma * sigma * s * s, w: 2.0 * tau * (r - d) * s, z: -2.0 * tau * r, g: 0.0 }
    }

    fn obstacle(&self, tau: f64, s: f64) -> [f64; 5] {
        let e = european_put(&self.params, tau * tau, s).derivatives();
        [self.params.strike - s - e[0], -1.0 - e[1], -e[2], -e[3], -e[4]]
    }

    fn boundary(&self, tau: f64) -> (f64, f64) {
        let k = self.params.strike;
        (k - k * (-self.params.r * tau * tau).exp(), 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmericanConfig {
    /// Space intervals; the grid has `nx - 1` interior nodes.
    pub nx: usize,
    pub nt: usize,
    pub stretch: StretchParams,
    pub t_skip: usize,
    pub rho: f64,
    pub phases: usize,
    pub tol: f64,
}

#[derive(Debug, Clone)]
pub struct AmericanResult {
    /// American price at `S = K`, `t = T`, per phase.
    pub prices: Vec<f64>,
    /// `(physical time, front)` of the last phase, per BDF4 step.
    pub boundary_path: Vec<(f64, f64)>,
    pub outcome: IvpOutcome,
}

pub fn price_american_put(params: &MarketParams, config: &AmericanConfig) -> Result<AmericanResult> {
    params.validate()?;
    if config.nx < 2 {
        return Err(Error::InvalidGrid(format!("nx = {} too small", config.nx)));
    }
    let grid = Grid::stretched(config.nx - 1, &config.stretch)?;
    let time = TimeGrid::new(params.expiry, config.nt, TimeTransform::Square)?;
    let model = AmericanPutDiff { params: *params };
    let mut problem = IvpProblem::new(grid, time, &model, config.rho, Startup::Rk4ThreeLevelBdf3);
    problem.t_skip = config.t_skip;
    problem.phases = config.phases;
    problem.tol = config.tol;
    let outcome = solve_ivp(&problem)?;
    let k = params.strike;
    let european = european_put(params, params.expiry, k).value;
    let prices = (0..config.phases).map(|l| outcome.probe(l, k) + european).collect();
    let last = config.phases - 1;
    let boundary_path = outcome
        .steps
        .iter()
        .filter_map(|s| s.fronts[last].map(|f| (outcome.time.physical_time(s.time), f)))
        .collect();
    Ok(AmericanResult { prices, boundary_path, outcome })
}
