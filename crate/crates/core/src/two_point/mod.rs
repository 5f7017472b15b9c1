//! Two-sided brackets for the point-to-point (and point-to-set) functions
//!
//! * quenched: `a_λ(x, ω) = -log E[exp(-λ H(x) - Ψ(H(x), ω)); H(x) < ∞]`
//! * annealed: `b_λ(x) = -log E[exp(-λ H(x) - Φ(H(x))); H(x) < ∞]`
//!
//! A [`HittingProfile`] resolves the first-arrival weights up to a horizon;
//! the remainder is bounded, and the resulting enclosure is intersected with
//! the a-priori sandwich of [`sandwich`].

mod bracket;
mod enumerate;
mod profile;
mod quenched;
mod range_dp;
mod target;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use bracket::{within_rounding, Bracket, BracketFlag};
pub use enumerate::{
    annealed_endpoint_log_weights, annealed_target_profile, quenched_endpoint_log_weights, quenched_target_profile, AllSiteProfiles,
};
pub use profile::HittingProfile;
pub use quenched::{quenched_endpoint_transfer, quenched_fixed_point, quenched_transfer_profile, FixedPoint, FIXED_POINT_MAX_ITER, FIXED_POINT_TOL};
pub use range_dp::{range_dp_endpoint_log_weights, range_dp_profile, RANGE_DP_BUDGET};
pub use target::Target;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lattice::{LatticePoint, DEFAULT_ENUMERATION_BUDGET};
use crate::numerics::{free_halfspace_exponent, free_hitting_exponent, log_sum_exp};
use crate::potential::{OneSitePotential, PotentialField};

/// Which exact oracle resolves the profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Range DP for annealed d = 1 range potentials, pruned enumeration for
    /// other annealed problems, fixed point for quenched ones.
    #[default]
    Auto,
    Enumeration,
    RangeDp,
    Transfer,
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointConfig {
    pub horizon: usize,
    /// Budget on `(2d)^N · N` for enumeration.
    pub budget: u128,
    pub width_tolerance: f64,
    pub backend: Backend,
    pub exec: Exec,
}

impl Default for TwoPointConfig {
    fn default() -> Self {
        TwoPointConfig {
            horizon: 24,
            budget: DEFAULT_ENUMERATION_BUDGET,
            width_tolerance: 1e-6,
            backend: Backend::Auto,
            exec: Exec::default(),
        }
    }
}

/// Annealed (law of φ) or quenched (one realization) potential.
#[derive(Debug, Clone, Copy)]
pub enum Setting<'a> {
    Annealed(OneSitePotential),
    Quenched(&'a PotentialField),
}

impl Setting<'_> {
    pub fn label(&self) -> String {
        match self {
            Setting::Annealed(phi) => format!("annealed:{}", phi.label()),
            Setting::Quenched(field) => format!("quenched:{}", field.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoPointResult {
    /// Final enclosure: the raw bracket intersected with the sandwich.
    pub bracket: Bracket,
    /// Enclosure from the oracle alone.
    pub raw: Bracket,
    pub sandwich: Bracket,
    pub oracle: &'static str,
    /// Horizon of the profile, or number of fixed-point sweeps.
    pub horizon: usize,
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("λ must be finite and >= 0, got {lambda}")))
    }
}

fn target_dim(target: &Target) -> usize {
    match target {
        Target::Point(x) => x.dim(),
        Target::Set(k) => k.first().map_or(0, |x| x.dim()),
        Target::HalfSpace { ell, .. } => ell.len(),
    }
}

/// `Ψ` along the axis-by-axis monotone path from the origin to `y`.
pub fn straight_path_potential(field: &PotentialField, y: &LatticePoint) -> Result<f64> {
    let mut pos = vec![0i64; y.dim()];
    let mut total = 0.0;
    for (axis, &target) in y.coords().iter().enumerate() {
        let step = target.signum();
        while pos[axis] != target {
            pos[axis] += step;
            total += field.value_at(&pos)?;
        }
    }
    Ok(total)
}

/// The a-priori bounds a bracket must respect.
///
/// Lower: every hitting path visits at least `m = min_steps` distinct sites
/// at times `1..=H`, and the free-walk martingale bound of
/// [`free_hitting_exponent`] (or its union over a set) controls
/// `E[exp(-λH)]`. Upper: the straight path to a nearest target point.
pub fn sandwich(setting: &Setting, target: &Target, lambda: f64) -> Result<Bracket> {
    check_lambda(lambda)?;
    let dim = target_dim(target);
    target.validate(dim)?;
    if target.contains_origin(dim) {
        return Ok(Bracket::point(0.0));
    }
    let m = target.min_steps() as f64;
    let kappa = match target {
        Target::Point(x) => free_hitting_exponent(&x.as_f64(), lambda),
        Target::Set(k) => -log_sum_exp(k.iter().map(|y| -free_hitting_exponent(&y.as_f64(), lambda))),
        Target::HalfSpace { ell, u } => free_halfspace_exponent(ell, *u, lambda),
    };
    let log2d = ((2 * dim) as f64).ln();
    // κ never exceeds the straight-path cost; the clamp only absorbs rounding
    let walk_lower = (lambda * m).max(kappa).min(m * (lambda + log2d));
    Ok(match setting {
        Setting::Annealed(phi) => {
            let phi1 = phi.phi1();
            let lower = phi1 * m + walk_lower;
            Bracket::new(lower, (m * (lambda + log2d + phi1)).max(lower))
        }
        Setting::Quenched(field) => {
            let upper = target
                .nearest_points(dim)
                .iter()
                .filter_map(|y| straight_path_potential(field, y).ok())
                .fold(f64::INFINITY, f64::min);
            Bracket::new(walk_lower, (m * (lambda + log2d) + upper).max(walk_lower))
        }
    })
}

/// `[‖x‖₁(λ + φ(1)), ‖x‖₁(λ + log 2d + φ(1))]`.
pub fn annealed_a_priori_bounds(x: &LatticePoint, lambda: f64, phi: &OneSitePotential) -> Bracket {
    let n = x.l1() as f64;
    let log2d = ((2 * x.dim()) as f64).ln();
    Bracket::new(n * (lambda + phi.phi1()), n * (lambda + log2d + phi.phi1()))
}

/// d = 1 targets that amount to first passage at a single site.
fn first_passage_site(target: &Target) -> Option<i64> {
    match target {
        Target::Point(x) if x.dim() == 1 => Some(x.coords()[0]),
        Target::HalfSpace { ell, u } if ell.len() == 1 && *u > 0.0 => {
            let k = (u / ell[0].abs() - 1e-12).ceil() as i64;
            Some(if ell[0] > 0.0 { k } else { -k })
        }
        _ => None,
    }
}

pub fn annealed_profile(dim: usize, target: &Target, phi: &OneSitePotential, cfg: &TwoPointConfig) -> Result<HittingProfile> {
    target.validate(dim)?;
    if target.contains_origin(dim) {
        return Ok(HittingProfile::immediate("exact"));
    }
    let site = if dim == 1 { first_passage_site(target) } else { None };
    match cfg.backend {
        Backend::Auto if site.is_some() && phi.range_cost().is_some() => {
            range_dp_profile(phi, site.unwrap(), cfg.horizon, RANGE_DP_BUDGET)
        }
        Backend::RangeDp => match site {
            Some(x) => range_dp_profile(phi, x, cfg.horizon, RANGE_DP_BUDGET),
            None => Err(Error::Precondition("range DP needs d = 1 and a single first-passage site".into())),
        },
        Backend::Auto | Backend::Enumeration => annealed_target_profile(dim, phi, target, cfg.horizon, cfg.budget, cfg.exec),
        Backend::Transfer | Backend::FixedPoint => {
            Err(Error::Precondition("transfer and fixed-point backends are quenched only".into()))
        }
    }
}

pub fn quenched_profile(field: &PotentialField, target: &Target, cfg: &TwoPointConfig) -> Result<HittingProfile> {
    match cfg.backend {
        Backend::Enumeration => quenched_target_profile(field, target, cfg.horizon, cfg.budget, cfg.exec),
        Backend::Auto | Backend::Transfer | Backend::FixedPoint => {
            quenched_transfer_profile(field, target, cfg.horizon, RANGE_DP_BUDGET)
        }
        Backend::RangeDp => Err(Error::Precondition("range DP is annealed only".into())),
    }
}

/// Turns a profile into the final bracket at one λ.
pub fn bracket_from_profile(
    profile: &HittingProfile,
    setting: &Setting,
    target: &Target,
    lambda: f64,
    tol: f64,
) -> Result<TwoPointResult> {
    let raw = profile.raw_bracket(lambda);
    let sandwich = sandwich(setting, target, lambda)?;
    Ok(TwoPointResult {
        bracket: raw.intersect(&sandwich).classify(tol),
        raw,
        sandwich,
        oracle: profile.oracle,
        horizon: profile.horizon,
    })
}

fn fixed_point_result(field: &PotentialField, target: &Target, lambda: f64, tol: f64) -> Result<TwoPointResult> {
    let fp = quenched_fixed_point(field, target, lambda, FIXED_POINT_TOL, FIXED_POINT_MAX_ITER)?;
    let mut raw = if fp.lower > 0.0 {
        Bracket::new(-fp.upper.ln(), -fp.lower.ln())
    } else {
        Bracket { lower: -fp.upper.ln(), upper: f64::INFINITY, flag: BracketFlag::Invalid }
    };
    if !fp.converged && raw.flag == BracketFlag::Ok {
        raw.flag = BracketFlag::Wide;
    }
    let sandwich = sandwich(&Setting::Quenched(field), target, lambda)?;
    Ok(TwoPointResult {
        bracket: raw.intersect(&sandwich).classify(tol),
        raw,
        sandwich,
        oracle: "fixed_point",
        horizon: fp.iterations,
    })
}

/// Bracket for a general target in either setting.
pub fn two_point(setting: &Setting, target: &Target, lambda: f64, cfg: &TwoPointConfig) -> Result<TwoPointResult> {
    check_lambda(lambda)?;
    match setting {
        Setting::Annealed(phi) => {
            phi.validate()?;
            let profile = annealed_profile(target_dim(target), target, phi, cfg)?;
            bracket_from_profile(&profile, setting, target, lambda, cfg.width_tolerance)
        }
        Setting::Quenched(field) => match cfg.backend {
            Backend::Auto | Backend::FixedPoint => fixed_point_result(field, target, lambda, cfg.width_tolerance),
            _ => {
                let profile = quenched_profile(field, target, cfg)?;
                bracket_from_profile(&profile, setting, target, lambda, cfg.width_tolerance)
            }
        },
    }
}

/// Bracket for `b_λ(x)`.
pub fn annealed_two_point(x: &LatticePoint, lambda: f64, phi: &OneSitePotential, cfg: &TwoPointConfig) -> Result<TwoPointResult> {
    two_point(&Setting::Annealed(*phi), &Target::Point(x.clone()), lambda, cfg)
}

/// Bracket for `a_λ(x, ω)` on the realization's box.
pub fn quenched_two_point(x: &LatticePoint, lambda: f64, field: &PotentialField, cfg: &TwoPointConfig) -> Result<TwoPointResult> {
    if !field.contains(x) {
        return Err(Error::OutsideBox { site: x.to_string(), radius: field.radius() });
    }
    two_point(&Setting::Quenched(field), &Target::Point(x.clone()), lambda, cfg)
}

/// Bracket for the set function, `H(K) = min_{y in K} H(y)`.
pub fn target_set_two_point(
    k: &[LatticePoint],
    lambda: f64,
    setting: &Setting,
    cfg: &TwoPointConfig,
) -> Result<TwoPointResult> {
    two_point(setting, &Target::Set(k.to_vec()), lambda, cfg)
}

/// The law `P^y_λ` of `H(y)` under the tilted measure, resolved up to the
/// horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltedHittingLaw {
    pub target: LatticePoint,
    pub lambda: f64,
    pub horizon: usize,
    /// Time → certified lower bound of its mass.
    pub support: BTreeMap<usize, f64>,
    /// Bound on the total mass missing from `support`.
    pub defect: f64,
    /// Floating-point allowance: `Σ masses + slack >= 1 - defect`.
    pub slack: f64,
}

impl TiltedHittingLaw {
    pub fn total_mass(&self) -> f64 {
        self.support.values().sum()
    }

    pub fn mass_where<F: Fn(usize) -> bool>(&self, keep: F) -> f64 {
        self.support.iter().filter(|(k, _)| keep(**k)).map(|(_, m)| m).sum()
    }
}

pub fn tilted_hitting_law(y: &LatticePoint, lambda: f64, setting: &Setting, cfg: &TwoPointConfig) -> Result<TiltedHittingLaw> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Err(Error::InvalidInput("the tilted hitting law needs λ > 0".into()));
    }
    let target = Target::Point(y.clone());
    let profile = match setting {
        Setting::Annealed(phi) => annealed_profile(y.dim(), &target, phi, cfg)?,
        Setting::Quenched(field) => {
            let cfg = TwoPointConfig { backend: Backend::Transfer, ..*cfg };
            quenched_profile(field, &target, &cfg)?
        }
    };
    let (masses, defect) = profile
        .tilted_masses(lambda)
        .ok_or_else(|| Error::Precondition(format!("no path reaches {y} within the horizon {}", profile.horizon)))?;
    // shrink by the rounding allowance so the masses stay lower bounds and
    // their floating-point sum stays below 1
    let slack = (masses.len() + 1) as f64 * f64::EPSILON;
    let support = masses.into_iter().enumerate().filter(|(_, m)| *m > 0.0).map(|(k, m)| (k, m * (1.0 - slack))).collect();
    Ok(TiltedHittingLaw { target: y.clone(), lambda, horizon: profile.horizon, support, defect, slack: 2.0 * slack })
}
