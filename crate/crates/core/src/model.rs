//! Problem definitions consumed by the drivers.

use crate::fdcore::Coefficients;

/// A penalized problem `V_t = p V'' + w V' + z V + g + rho max(V* - V, 0)`
/// with a single left penalty region. Time arguments are solver time
/// (`tau` when the time axis is transformed). Steady problems ignore `t`.
pub trait Model: Sync {
    fn coefficients(&self, t: f64, s: f64) -> Coefficients;

    /// Obstacle `V*` and its first four `S`-derivatives.
    fn obstacle(&self, t: f64, s: f64) -> [f64; 5];

    /// Dirichlet values at the left and right ends.
    fn boundary(&self, t: f64) -> (f64, f64);

    fn initial(&self, _s: f64) -> f64 {
        0.0
    }

    fn exact(&self, _t: f64, _s: f64) -> Option<f64> {
        None
    }
}

/// `f'' - f - 1 + rho max(x - f, 0) = 0` on `[-1, 1]` with
/// `f(-1) = -1`, `f(1) = e - 1`; the solution is `x` left of 0 and
/// `e^x - 1` right of it.
#[derive(Debug, Clone, Copy, Default)]
pub struct EllipticObstacle;

impl Model for EllipticObstacle {
    fn coefficients(&self, _t: f64, _s: f64) -> Coefficients {
        Coefficients { p: 1.0, w: 0.0, z: -1.0, g: -1.0 }
    }

    fn obstacle(&self, _t: f64, s: f64) -> [f64; 5] {
        [s, 1.0, 0.0, 0.0, 0.0]
    }

    fn boundary(&self, _t: f64) -> (f64, f64) {
        (-1.0, std::f64::consts::E - 1.0)
    }

    fn exact(&self, _t: f64, s: f64) -> Option<f64> {
        Some(if s <= 0.0 { s } else { s.exp_m1() })
    }
}

/// Moving-boundary test problem on `[-2, 2]` written in `tau = sqrt(t)`:
/// `f_tau = f'' - 1 + rho max(x - f, 0)`, exact solution
/// `e^{x + tau} - tau - 1` right of `x_f = -tau` and `x` left of it.
#[derive(Debug, Clone, Copy, Default)]
pub struct MovingBoundaryTest;

impl MovingBoundaryTest {
    pub fn front(tau: f64) -> f64 {
        -tau
    }
}

impl Model for MovingBoundaryTest {
    fn coefficients(&self, _t: f64, _s: f64) -> Coefficients {
        Coefficients { p: 1.0, w: 0.0, z: 0.0, g: -1.0 }
    }

    fn obstacle(&self, _t: f64, s: f64) -> [f64; 5] {
        [s, 1.0, 0.0, 0.0, 0.0]
    }

    fn boundary(&self, t: f64) -> (f64, f64) {
        (-2.0, (2.0 + t).exp() - t - 1.0)
    }

    fn initial(&self, s: f64) -> f64 {
        if s < 0.0 {
            s
        } else {
            s.exp_m1()
        }
    }

    fn exact(&self, t: f64, s: f64) -> Option<f64> {
        Some(if s < -t { s } else { (s + t).exp() - t - 1.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_exact_satisfies_equation_and_pasting() {
        let m = EllipticObstacle;
        for x in [0.1, 0.5, 0.9] {
            let f = m.exact(0.0, x).unwrap();
            // f'' - f - 1 = e^x - (e^x - 1) - 1 = 0
            assert!((x.exp() - f - 1.0).abs() < 1e-15);
        }
        assert_eq!(m.exact(0.0, 0.0), Some(0.0));
        assert!((m.boundary(0.0).1 - m.exact(0.0, 1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn moving_boundary_exact_value() {
        let m = MovingBoundaryTest;
        let tau = 0.5f64.sqrt();
        let v = m.exact(tau, 0.0).unwrap();
        assert!((v - 0.321_008_2).abs() < 1e-7);
        let (l, r) = m.boundary(tau);
        assert_eq!(l, m.exact(tau, -2.0).unwrap());
        assert!((r - m.exact(tau, 2.0).unwrap()).abs() < 1e-13);
        assert_eq!(MovingBoundaryTest::front(tau), -tau);
        // at tau = 0 the exact solution matches the initial condition
        for x in [-1.0, -0.1, 0.0, 0.3] {
            assert!((m.exact(0.0, x).unwrap() - m.initial(x)).abs() < 1e-15);
        }
    }
}
