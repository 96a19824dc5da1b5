use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The learner's full parameter schedule. `defaults` derives everything
/// from `(epsilon, delta)` and the game dimensions; the constants `c_j`
/// and `c_n` scale the per-cell sample floor and the visitation sample
/// count and are the usual knobs for desk-scale runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerParams {
    pub epsilon: f64,
    pub delta: f64,
    /// visitation threshold for admitting a `(step, state)` pair
    pub p: f64,
    /// per-cell sample floor
    pub j: f64,
    /// episodes per cover policy per step loop; `k = 8 j / p`
    pub k: f64,
    /// trajectories per visitation estimate
    pub n_visit: f64,
    pub eps_val: f64,
    pub eps_reg: f64,
    pub eps_tvd: f64,
    /// log factor `ln(S H max_A / (epsilon delta))`
    pub iota: f64,
    pub c_j: f64,
    pub c_n: f64,
}

impl LearnerParams {
    pub fn defaults(
        num_players: usize,
        num_states: usize,
        horizon: usize,
        max_actions: usize,
        epsilon: f64,
        delta: f64,
    ) -> Result<Self> {
        Self::with_constants(num_players, num_states, horizon, max_actions, epsilon, delta, 1.0, 1.0)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_constants(
        num_players: usize,
        num_states: usize,
        horizon: usize,
        max_actions: usize,
        epsilon: f64,
        delta: f64,
        c_j: f64,
        c_n: f64,
    ) -> Result<Self> {
        if num_players == 0 || num_states == 0 || horizon == 0 || max_actions == 0 {
            return Err(Error::InvalidParameter("game dimensions must be positive".into()));
        }
        if !(0.0 < epsilon && epsilon < 1.0) || !(0.0 < delta && delta < 1.0) {
            return Err(Error::InvalidParameter(
                "epsilon and delta must lie in (0, 1)".into(),
            ));
        }
        if c_j <= 0.0 || c_n <= 0.0 {
            return Err(Error::InvalidParameter("constants must be positive".into()));
        }
        let s = num_states as f64;
        let h = horizon as f64;
        let a = max_actions as f64;
        let iota = (s * h * a / (epsilon * delta)).ln();
        let p = epsilon / (16.0 * s * h * h);
        let j = c_j * h.powi(6) * iota * iota * a / (epsilon * epsilon);
        let k = 8.0 * j / p;
        let eps_tvd = p / 2.0;
        let n_visit = c_n * s * iota / (eps_tvd * eps_tvd);
        Ok(Self {
            epsilon,
            delta,
            p,
            j,
            k,
            n_visit,
            eps_val: epsilon / (4.0 * h),
            eps_reg: epsilon / (8.0 * h),
            eps_tvd,
            iota,
            c_j,
            c_n,
        })
    }

    /// Integer episode count per (cover policy, step) loop.
    pub fn episodes_per_policy(&self) -> usize {
        (self.k.ceil() as usize).max(1)
    }

    /// Integer trajectory count per visitation estimate.
    pub fn visit_samples(&self) -> usize {
        (self.n_visit.ceil() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("p", self.p),
            ("j", self.j),
            ("k", self.k),
            ("n_visit", self.n_visit),
            ("eps_val", self.eps_val),
            ("eps_reg", self.eps_reg),
            ("eps_tvd", self.eps_tvd),
            ("iota", self.iota),
            ("c_j", self.c_j),
            ("c_n", self.c_n),
        ];
        for (name, v) in fields {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if (self.k * self.p - 8.0 * self.j).abs() > 1e-6 * (1.0 + 8.0 * self.j) {
            return Err(Error::InvalidParameter("schedule requires k = 8 j / p".into()));
        }
        Ok(())
    }
}
