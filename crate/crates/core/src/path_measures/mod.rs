//! Exact finite-n partition functions and endpoint laws of the tilted path
//! measures `Q^h_n ∝ exp(h·S(n) - Φ(n))` (annealed) and
//! `Q^h_{n,ω} ∝ exp(h·S(n) - Ψ(n, ω))` (quenched).
//!
//! Endpoint weights do not depend on h; one set of weights serves a whole
//! drift grid.

use serde::Serialize;

use crate::convex_phase::{l1_ball_grid, Family, RateFunctionModel};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lattice::LatticePoint;
use crate::lyapunov::replica_seed;
use crate::numerics::log_sum_exp;
use crate::potential::{OneSitePotential, PotentialField, SiteDistribution};
use crate::two_point::{
    annealed_endpoint_log_weights, quenched_endpoint_log_weights, quenched_endpoint_transfer,
    range_dp_endpoint_log_weights, straight_path_potential, Backend, Bracket, RANGE_DP_BUDGET,
};

pub const SCAN_FORMAT_VERSION: u32 = 1;
/// Largest n served by the d = 1 range DP.
pub const RANGE_DP_MAX_N: usize = 200;
pub const DEFAULT_DELTA: f64 = 0.1;

/// `log Σ_{paths to y} (2d)^{-n} e^{-potential}` per endpoint, h-free.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointWeights {
    pub dim: usize,
    pub n: usize,
    pub setting: String,
    pub oracle: &'static str,
    pub log_weights: Vec<(LatticePoint, f64)>,
    /// `Ψ` (or `Φ`) of the straight path along each signed axis
    /// `(-e_1, e_1, -e_2, ...)`, for the lower sandwich.
    pub straight_costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointLaw {
    pub n: usize,
    pub h: Vec<f64>,
    pub setting: String,
    pub oracle: &'static str,
    pub log_z: f64,
    pub law: Vec<(LatticePoint, f64)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl EndpointWeights {
    pub fn log_z(&self, h: &[f64]) -> f64 {
        log_sum_exp(self.log_weights.iter().map(|(y, w)| w + y.dot(h)))
    }

    pub fn law(&self, h: &[f64]) -> Result<EndpointLaw> {
        if h.len() != self.dim || h.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("drift must be a finite vector of dimension {}", self.dim)));
        }
        let log_z = self.log_z(h);
        if !log_z.is_finite() {
            return Err(Error::Precondition(format!("every path of length {} has zero weight", self.n)));
        }
        let law = self.log_weights.iter().map(|(y, w)| (y.clone(), (w + y.dot(h) - log_z).exp())).collect();
        Ok(EndpointLaw { n: self.n, h: h.to_vec(), setting: self.setting.clone(), oracle: self.oracle, log_z, law })
    }

    /// `[max_e (h·e - cost_e/n) - log 2d, log M(h)]` for `(1/n) log Z^h_n`,
    /// with `cost_e` the potential of the straight path along `e`.
    pub fn sandwich(&self, h: &[f64]) -> Bracket {
        let d = self.dim as f64;
        let n = self.n as f64;
        let upper = (h.iter().map(|c| c.cosh()).sum::<f64>() / d).ln();
        if self.n == 0 {
            return Bracket::point(0.0);
        }
        let best = self
            .straight_costs
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 1 { h[i / 2] } else { -h[i / 2] } - c / n)
            .fold(f64::NEG_INFINITY, f64::max);
        let lower = best - (2.0 * d).ln();
        Bracket::new(lower.min(upper), upper)
    }
}

impl EndpointLaw {
    pub fn total_mass(&self) -> f64 {
        self.law.iter().map(|(_, p)| p).sum()
    }

    pub fn log_z_over_n(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.log_z / self.n as f64
        }
    }

    pub fn mean_displacement(&self) -> Vec<f64> {
        let d = self.h.len();
        let mut m = vec![0.0; d];
        for (y, p) in &self.law {
            for (a, c) in m.iter_mut().zip(y.coords()) {
                *a += p * *c as f64;
            }
        }
        m
    }

    /// `E_Q ‖S(n)‖₁ / n`.
    pub fn mean_speed(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.law.iter().map(|(y, p)| p * y.l1() as f64).sum::<f64>() / self.n as f64
    }

    /// `Q[S(n)/n ∈ A]` for the velocity-space set `A`.
    pub fn mass_where<F: Fn(&[f64]) -> bool>(&self, keep: F) -> f64 {
        let n = self.n.max(1) as f64;
        self.law
            .iter()
            .filter(|(y, _)| keep(&y.coords().iter().map(|c| *c as f64 / n).collect::<Vec<_>>()))
            .map(|(_, p)| p)
            .sum()
    }
}

fn straight_costs_annealed(dim: usize, phi: &OneSitePotential, n: usize) -> Vec<f64> {
    vec![phi.phi1() * n as f64; 2 * dim]
}

/// Endpoint weights of the annealed measure: range DP for d = 1 range
/// potentials and `n <= 200`, exhaustive enumeration otherwise.
pub fn annealed_endpoint_weights(dim: usize, phi: &OneSitePotential, n: usize, backend: Backend, budget: u128, exec: Exec) -> Result<EndpointWeights> {
    phi.validate()?;
    let dp_ok = dim == 1 && phi.range_cost().is_some() && n <= RANGE_DP_MAX_N;
    let use_dp = match backend {
        Backend::Auto => dp_ok,
        Backend::RangeDp if dp_ok => true,
        Backend::RangeDp => {
            return Err(Error::Precondition(format!(
                "the range DP needs d = 1, a potential constant on t >= 1 and n <= {RANGE_DP_MAX_N}"
            )))
        }
        Backend::Enumeration => false,
        Backend::Transfer | Backend::FixedPoint => {
            return Err(Error::InvalidInput("annealed partitions use the range DP or enumeration".into()))
        }
    };
    let (log_weights, oracle) = if use_dp {
        let w = range_dp_endpoint_log_weights(phi, n, RANGE_DP_BUDGET)?;
        let m = n as i64;
        let lw = w.into_iter().enumerate().filter(|(_, v)| v.is_finite()).map(|(i, v)| (LatticePoint(vec![i as i64 - m]), v)).collect();
        (lw, "range_dp")
    } else {
        let lw = annealed_endpoint_log_weights(dim, phi, n, budget, exec).map_err(|e| match e {
            Error::BudgetExceeded { needed, budget, .. } => Error::BudgetExceeded {
                what: "path enumeration (exact oracles: enumeration within budget, or the d = 1 range DP for n <= 200)",
                needed,
                budget,
            },
            e => e,
        })?;
        (lw, "enumeration")
    };
    Ok(EndpointWeights { dim, n, setting: "annealed".into(), oracle, log_weights, straight_costs: straight_costs_annealed(dim, phi, n) })
}

/// Endpoint weights of the quenched measure on one field.
pub fn quenched_endpoint_weights(field: &PotentialField, n: usize, backend: Backend, budget: u128, exec: Exec) -> Result<EndpointWeights> {
    let (log_weights, oracle) = match backend {
        Backend::Auto | Backend::Transfer => (quenched_endpoint_transfer(field, n)?, "transfer"),
        Backend::Enumeration => (quenched_endpoint_log_weights(field, n, budget, exec)?, "enumeration"),
        _ => return Err(Error::InvalidInput("quenched partitions use the transfer recursion or enumeration".into())),
    };
    let dim = field.dim();
    let straight_costs = (0..dim)
        .flat_map(|a| [-1, 1].map(|s| LatticePoint::unit(dim, a, s).scaled(n as i64)))
        .map(|y| straight_path_potential(field, &y))
        .collect::<Result<Vec<_>>>()?;
    Ok(EndpointWeights { dim, n, setting: "quenched".into(), oracle, log_weights, straight_costs })
}

pub fn partition_annealed(h: &[f64], n: usize, phi: &OneSitePotential, backend: Backend, budget: u128, exec: Exec) -> Result<EndpointLaw> {
    annealed_endpoint_weights(h.len(), phi, n, backend, budget, exec)?.law(h)
}

pub fn partition_quenched(h: &[f64], n: usize, field: &PotentialField) -> Result<EndpointLaw> {
    if h.len() != field.dim() {
        return Err(Error::InvalidInput("drift and field dimensions differ".into()));
    }
    quenched_endpoint_weights(field, n, Backend::Transfer, u128::MAX, Exec::Sequential)?.law(h)
}

/// Velocity-space events `S(n)/n ∈ A`.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityEvent {
    All,
    /// `ℓ·v >= c`.
    HalfSpace { ell: Vec<f64>, c: f64 },
    /// `inner <= ‖v‖₁ <= outer`.
    L1Annulus { inner: f64, outer: f64 },
    /// `‖v‖₁ > r`.
    L1Outside { r: f64 },
}

impl VelocityEvent {
    pub fn contains(&self, v: &[f64]) -> bool {
        const EPS: f64 = 1e-12;
        match self {
            VelocityEvent::All => true,
            VelocityEvent::HalfSpace { ell, c } => dot(ell, v) >= c - EPS,
            VelocityEvent::L1Annulus { inner, outer } => {
                let n: f64 = v.iter().map(|x| x.abs()).sum();
                n >= inner - EPS && n <= outer + EPS
            }
            VelocityEvent::L1Outside { r } => v.iter().map(|x| x.abs()).sum::<f64>() > r + EPS,
        }
    }

    pub fn label(&self) -> String {
        let j = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        match self {
            VelocityEvent::All => "all".into(),
            VelocityEvent::HalfSpace { ell, c } => format!("halfspace({};{c})", j(ell)),
            VelocityEvent::L1Annulus { inner, outer } => format!("l1_annulus({inner};{outer})"),
            VelocityEvent::L1Outside { r } => format!("l1_outside({r})"),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            VelocityEvent::HalfSpace { ell, c } if ell.len() != dim || !c.is_finite() => {
                Err(Error::InvalidInput("half-space event needs a direction of the walk dimension".into()))
            }
            VelocityEvent::L1Annulus { inner, outer } if !(*inner >= 0.0 && inner <= outer) => {
                Err(Error::InvalidInput(format!("annulus needs 0 <= inner <= outer, got [{inner}, {outer}]")))
            }
            _ => Ok(()),
        }
    }
}

/// One (h, n, event) cell of a scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub setting: String,
    pub d: usize,
    pub n: usize,
    pub h: Vec<f64>,
    pub z_log_over_n: f64,
    pub mean_speed: f64,
    pub event: String,
    /// `(1/n) log Q[S(n) ∈ nA]`, `-inf` for a null event.
    pub event_log_prob_over_n: f64,
    pub sandwich: Bracket,
    pub sandwich_ok: bool,
    pub oracle: &'static str,
}

/// `-inf_{x ∈ A} J_h(x)` with `J_h = J - h·x + F(h)`, over a grid of A.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventTarget {
    pub h: Vec<f64>,
    pub event: String,
    pub mid: f64,
    /// Spread over the lower and upper norm families.
    pub envelope: Bracket,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub format_version: u32,
    pub rows: Vec<ScanRow>,
    pub targets: Vec<EventTarget>,
}

fn make_row(w: &EndpointWeights, law: &EndpointLaw, event: &str, prob: f64) -> ScanRow {
    let z = law.log_z_over_n();
    let sandwich = w.sandwich(&law.h);
    ScanRow {
        setting: w.setting.clone(),
        d: w.dim,
        n: w.n,
        h: law.h.clone(),
        z_log_over_n: z,
        mean_speed: law.mean_speed(),
        event: event.to_string(),
        event_log_prob_over_n: if w.n == 0 { prob.ln() } else { prob.ln() / w.n as f64 },
        sandwich,
        sandwich_ok: sandwich.contains(z, 1e-12),
        oracle: w.oracle,
    }
}

fn velocity_grid(dim: usize) -> f64 {
    if dim == 1 {
        1e-3
    } else {
        0.01
    }
}

pub fn event_target(h: &[f64], event: &VelocityEvent, model: &RateFunctionModel) -> Result<EventTarget> {
    let grid: Vec<Vec<f64>> = l1_ball_grid(model.dim(), velocity_grid(model.dim())).into_iter().filter(|x| event.contains(x)).collect();
    let value = |f: Family| -> Result<f64> {
        let fe = model.free_energy(h, f)?.value;
        let inf = grid.iter().map(|x| model.rate_of(f, x) - dot(h, x)).fold(f64::INFINITY, f64::min);
        Ok(-(inf + fe))
    };
    let (lo, mid, hi) = (value(Family::Upper)?, value(Family::Mid)?, value(Family::Lower)?);
    Ok(EventTarget {
        h: h.to_vec(),
        event: event.label(),
        mid,
        envelope: Bracket::new(lo.min(hi).min(mid), hi.max(lo).max(mid)),
    })
}

/// Finite-n event probabilities along an n-grid, with the rate-function
/// target when a model is given.
pub fn ldp_scan<F>(h: &[f64], ns: &[usize], event: &VelocityEvent, weights_of: F, model: Option<&RateFunctionModel>, exec: Exec) -> Result<ScanResult>
where
    F: Fn(usize) -> Result<EndpointWeights> + Sync + Send,
{
    event.validate(h.len())?;
    let rows = exec.map(ns.to_vec(), |n| -> Result<ScanRow> {
        let w = weights_of(n)?;
        let law = w.law(h)?;
        let p = law.mass_where(|v| event.contains(v));
        Ok(make_row(&w, &law, &event.label(), p))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let targets = match model {
        Some(m) => vec![event_target(h, event, m)?],
        None => Vec::new(),
    };
    Ok(ScanResult { format_version: SCAN_FORMAT_VERSION, rows, targets })
}

/// Per drift: mean speed, the mass of `‖S(n)/n‖₁ <= δ` and, given velocity
/// sets, the mass within δ of them.
pub fn ballisticity_scan(
    hs: &[Vec<f64>],
    weights: &EndpointWeights,
    delta: f64,
    velocity_sets: Option<&[Vec<Vec<f64>>]>,
) -> Result<ScanResult> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput("δ must be positive".into()));
    }
    let small = format!("l1_le({delta})");
    let near = format!("near_velocity_set({delta})");
    let mut rows = Vec::new();
    for (i, h) in hs.iter().enumerate() {
        let law = weights.law(h)?;
        let p = law.mass_where(|v| v.iter().map(|x| x.abs()).sum::<f64>() <= delta + 1e-12);
        rows.push(make_row(weights, &law, &small, p));
        if let Some(sets) = velocity_sets {
            let set = &sets[i];
            if !set.is_empty() {
                let q = law.mass_where(|v| {
                    set.iter().any(|x| x.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= delta + 1e-12)
                });
                rows.push(make_row(weights, &law, &near, q));
            }
        }
    }
    Ok(ScanResult { format_version: SCAN_FORMAT_VERSION, rows, targets: Vec::new() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Consistency {
    pub reps: usize,
    pub annealed_z: f64,
    pub mean_z: f64,
    pub cv: f64,
    pub rel_gap: f64,
    /// `4 cv / √R`.
    pub bound: f64,
    pub ok: bool,
}

/// Average of `Z^h_{n,ω}` over `reps` seeded fields against `Z^h_n` with
/// `φ = φ_V`.
pub fn annealed_quenched_consistency(
    dist: &SiteDistribution,
    dim: usize,
    h: &[f64],
    n: usize,
    reps: usize,
    seed: u64,
    exec: Exec,
) -> Result<Consistency> {
    dist.validate()?;
    if reps < 2 {
        return Err(Error::InvalidInput("need at least two replicas".into()));
    }
    let phi = OneSitePotential::FromDistribution { dist: *dist };
    let annealed = annealed_endpoint_weights(dim, &phi, n, Backend::Enumeration, crate::lattice::DEFAULT_ENUMERATION_BUDGET, exec)?;
    let annealed_z = annealed.log_z(h).exp();
    let dist = *dist;
    let zs = exec.map_range(reps, |r| -> Result<f64> {
        let field = PotentialField::sample(dim, n, dist, replica_seed(seed, r))?;
        Ok(quenched_endpoint_transfer(&field, n)?.iter().map(|(y, w)| (w + y.dot(h)).exp()).sum())
    });
    let zs = zs.into_iter().collect::<Result<Vec<f64>>>()?;
    let mean_z = zs.iter().sum::<f64>() / reps as f64;
    let var = zs.iter().map(|z| (z - mean_z).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let cv = var.sqrt() / mean_z;
    let rel_gap = (mean_z - annealed_z).abs() / annealed_z;
    let bound = 4.0 * cv / (reps as f64).sqrt();
    Ok(Consistency { reps, annealed_z, mean_z, cv, rel_gap, bound, ok: rel_gap <= bound })
}
