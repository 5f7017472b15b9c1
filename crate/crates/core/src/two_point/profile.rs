use crate::numerics::{log_add_exp, log_sum_exp};

use super::bracket::{Bracket, BracketFlag};

/// Time-resolved weights of first arrival at a target, with everything
/// needed to bound the part beyond the horizon.
///
/// `log_hit[k]` is `log Σ_{H = k} P[path] exp(-potential(H))`; the two-point
/// expectation at killing rate λ is `Σ_k exp(log_hit[k] - λ k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingProfile {
    pub horizon: usize,
    pub log_hit: Vec<f64>,
    /// `P[H > horizon]` upper bound (from exact path counts), if tracked.
    pub unhit_probability: Option<f64>,
    /// Lower bound on the potential paid by any path hitting after the horizon.
    pub late_potential_floor: f64,
    /// `log` of the total weight of paths alive at the horizon, if tracked.
    pub log_survivor: Option<f64>,
    /// `(t, log weight)` of paths that left the known region at time `t`.
    pub log_escape: Vec<(usize, f64)>,
    pub oracle: &'static str,
}

impl HittingProfile {
    /// The profile of a target containing the origin: `H = 0`.
    pub fn immediate(oracle: &'static str) -> Self {
        HittingProfile {
            horizon: 0,
            log_hit: vec![0.0],
            unhit_probability: Some(0.0),
            late_potential_floor: 0.0,
            log_survivor: Some(f64::NEG_INFINITY),
            log_escape: Vec::new(),
            oracle,
        }
    }

    /// `log E_N(λ)`.
    pub fn log_expectation(&self, lambda: f64) -> f64 {
        log_sum_exp(self.log_hit.iter().enumerate().map(|(k, w)| w - lambda * k as f64))
    }

    /// `log` of the certified bound on the contribution of unresolved paths.
    pub fn log_tail(&self, lambda: f64) -> f64 {
        let late = (self.horizon + 1) as f64;
        let mut alive = f64::INFINITY;
        if let Some(p) = self.unhit_probability {
            alive = alive.min(p.max(0.0).ln() - self.late_potential_floor);
        }
        if let Some(s) = self.log_survivor {
            alive = alive.min(s);
        }
        if alive == f64::INFINITY {
            alive = -self.late_potential_floor;
        }
        let mut tail = alive - lambda * late;
        for &(t, w) in &self.log_escape {
            tail = log_add_exp(tail, w - lambda * t as f64);
        }
        tail
    }

    /// `[-log(E_N + τ), -log E_N]` before any a-priori clipping.
    pub fn raw_bracket(&self, lambda: f64) -> Bracket {
        let log_e = self.log_expectation(lambda);
        let log_t = self.log_tail(lambda);
        if log_e == f64::NEG_INFINITY {
            return Bracket { lower: -log_t, upper: f64::INFINITY, flag: BracketFlag::Invalid };
        }
        Bracket::new(-log_add_exp(log_e, log_t), -log_e)
    }

    /// Masses `mass(k)` normalized by the upper bound `E_N + τ` of the
    /// normalization (so each is a certified lower bound of the true mass),
    /// and the defect `τ / E_N` bounding the unassigned mass.
    pub fn tilted_masses(&self, lambda: f64) -> Option<(Vec<f64>, f64)> {
        let log_e = self.log_expectation(lambda);
        if log_e == f64::NEG_INFINITY {
            return None;
        }
        let log_t = self.log_tail(lambda);
        let log_z = log_add_exp(log_e, log_t);
        let masses = self.log_hit.iter().enumerate().map(|(k, w)| (w - lambda * k as f64 - log_z).exp()).collect();
        Some((masses, (log_t - log_e).exp()))
    }
}
