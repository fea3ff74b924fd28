//! Rayleigh oscillator in van der Pol form, integrated with classic RK4:
//!   ẋ = v
//!   v̇ = ε·v·(1 − δ·x²) − ω²·x

use serde::{Deserialize, Serialize};

use crate::error::{QdmError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayleighSpec {
    /// Nonlinearity strength ε.
    pub epsilon: f64,
    /// Damping strength δ.
    pub delta: f64,
    /// Angular frequency ω.
    pub omega: f64,
    pub x0: f64,
    pub v0: f64,
    /// Integration step.
    pub dt: f64,
    /// Integration steps.
    pub steps: usize,
    /// Keep every k-th sample (k ≥ 1); the output grid spacing is k·dt.
    #[serde(default = "default_subsample")]
    pub subsample: usize,
}

fn default_subsample() -> usize {
    1
}

impl RayleighSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return Err(QdmError::DomainViolation { value: self.dt, domain: "(0, inf)" });
        }
        if self.subsample == 0 {
            return Err(QdmError::InvalidConfig("subsample must be >= 1".into()));
        }
        for v in [self.epsilon, self.delta, self.omega, self.x0, self.v0] {
            if !v.is_finite() {
                return Err(QdmError::NonFinite("Rayleigh parameter"));
            }
        }
        Ok(())
    }

    fn rhs(&self, x: f64, v: f64) -> (f64, f64) {
        (
            v,
            self.epsilon * v * (1.0 - self.delta * x * x) - self.omega * self.omega * x,
        )
    }
}

/// Integrate and return the (x, v) series on the subsampled grid, including
/// the initial point.
pub fn rayleigh_trajectory(spec: &RayleighSpec) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    let mut x = spec.x0;
    let mut v = spec.v0;
    let mut out = vec![vec![x, v]];
    for step in 1..=spec.steps {
        let h = spec.dt;
        let (k1x, k1v) = spec.rhs(x, v);
        let (k2x, k2v) = spec.rhs(x + 0.5 * h * k1x, v + 0.5 * h * k1v);
        let (k3x, k3v) = spec.rhs(x + 0.5 * h * k2x, v + 0.5 * h * k2v);
        let (k4x, k4v) = spec.rhs(x + h * k3x, v + h * k3v);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if !x.is_finite() || !v.is_finite() {
            return Err(QdmError::NonFinite("Rayleigh integration diverged"));
        }
        if step % spec.subsample == 0 {
            out.push(vec![x, v]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn equilibrium_stays_at_zero() {
        let spec = RayleighSpec {
            epsilon: PI,
            delta: 3.0,
            omega: PI,
            x0: 0.0,
            v0: 0.0,
            dt: 1e-3,
            steps: 1000,
            subsample: 100,
        };
        let traj = rayleigh_trajectory(&spec).unwrap();
        for row in traj {
            assert_eq!(row, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn harmonic_limit_matches_cosine() {
        // ε = 0, ω = π, x(0) = 1: x(t) = cos(πt); at t = 1, x = -1
        let spec = RayleighSpec {
            epsilon: 0.0,
            delta: 3.0,
            omega: PI,
            x0: 1.0,
            v0: 0.0,
            dt: 1e-3,
            steps: 1000,
            subsample: 1000,
        };
        let traj = rayleigh_trajectory(&spec).unwrap();
        assert_abs_diff_eq!(traj[1][0], -1.0, epsilon = 1e-6);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        // halving dt shrinks the endpoint error ~16x against a fine reference
        let run = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            let spec = RayleighSpec {
                epsilon: PI,
                delta: 3.0,
                omega: PI,
                x0: 0.3,
                v0: 0.0,
                dt,
                steps,
                subsample: steps,
            };
            rayleigh_trajectory(&spec).unwrap()[1][0]
        };
        let reference = run(1e-5);
        let e1 = (run(2e-2) - reference).abs();
        let e2 = (run(1e-2) - reference).abs();
        let ratio = e1 / e2;
        assert!(
            (8.0..32.0).contains(&ratio),
            "expected ~16x error reduction, got {ratio} (e1={e1:.3e}, e2={e2:.3e})"
        );
    }

    #[test]
    fn paper_settings_reach_bounded_limit_cycle() {
        // amplitude stabilizes: max |x| over late windows stops growing
        let spec = RayleighSpec {
            epsilon: PI,
            delta: 3.0,
            omega: PI,
            x0: 0.0,
            v0: 0.01,
            dt: 1e-3,
            steps: 20_000,
            subsample: 50,
        };
        let traj = rayleigh_trajectory(&spec).unwrap();
        let window_max = |lo: usize, hi: usize| {
            traj[lo..hi].iter().map(|r| r[0].abs()).fold(0.0f64, f64::max)
        };
        let a = window_max(200, 300);
        let b = window_max(300, 400);
        assert!(a > 0.5, "cycle amplitude should exceed init scale, got {a}");
        assert!((a - b).abs() < 0.02, "amplitude drift {a} vs {b}");
    }

    #[test]
    fn invalid_dt_rejected() {
        let spec = RayleighSpec {
            epsilon: 1.0,
            delta: 1.0,
            omega: 1.0,
            x0: 0.0,
            v0: 0.0,
            dt: 0.0,
            steps: 10,
            subsample: 1,
        };
        assert!(rayleigh_trajectory(&spec).is_err());
    }
}
