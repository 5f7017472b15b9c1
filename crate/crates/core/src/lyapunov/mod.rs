//! Lyapunov norms `α_λ`, `β_λ` from the subadditive representation
//! `β_λ(x) = inf_n b_λ(nx)/n`, their finite norm models, and shape ratios.

mod norm;

use std::collections::BTreeMap;

use serde::Serialize;

pub use norm::{default_directions, NormModel, NORM_MODEL_VERSION};

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::numerics::free_hitting_exponent;
use crate::potential::{splitmix64, OneSitePotential, PotentialField, SiteDistribution};
use crate::two_point::{
    bracket_from_profile, quenched_two_point, range_dp_profile, AllSiteProfiles, Backend, Bracket, BracketFlag,
    HittingProfile, Setting, Target, TwoPointConfig, TwoPointResult, RANGE_DP_BUDGET,
    within_rounding,
};

/// Horizon used for `b_λ(y)` by the range DP: `min(max, base + per_unit·‖y‖₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HorizonSchedule {
    pub base: usize,
    pub per_unit: usize,
    pub max: usize,
}

impl Default for HorizonSchedule {
    fn default() -> Self {
        HorizonSchedule { base: 40, per_unit: 6, max: 600 }
    }
}

impl HorizonSchedule {
    pub fn horizon(&self, l1: usize) -> usize {
        (self.base + self.per_unit * l1).min(self.max)
    }
}

/// λ-free hitting profiles of the annealed problem for a set of sites.
#[derive(Debug, Clone)]
pub struct AnnealedBank {
    dim: usize,
    phi: OneSitePotential,
    profiles: BTreeMap<LatticePoint, HittingProfile>,
}

impl AnnealedBank {
    /// Range DP per site for d = 1 range potentials, otherwise one
    /// all-sites enumeration at `cfg.horizon`.
    pub fn build(
        dim: usize,
        phi: &OneSitePotential,
        points: &[LatticePoint],
        schedule: &HorizonSchedule,
        cfg: &TwoPointConfig,
    ) -> Result<Self> {
        phi.validate()?;
        if let Some(x) = points.iter().find(|x| x.dim() != dim) {
            return Err(Error::InvalidInput(format!("{x} is not in dimension {dim}")));
        }
        let mut pts = points.to_vec();
        pts.sort();
        pts.dedup();
        let use_dp = dim == 1 && phi.range_cost().is_some() && cfg.backend != Backend::Enumeration;
        let profiles = if use_dp {
            let phi = *phi;
            let schedule = *schedule;
            let got = cfg.exec.map(pts.clone(), move |x| {
                range_dp_profile(&phi, x.coords()[0], schedule.horizon(x.l1() as usize), RANGE_DP_BUDGET)
            });
            pts.into_iter().zip(got).map(|(x, p)| p.map(|p| (x, p))).collect::<Result<BTreeMap<_, _>>>()?
        } else {
            let all = AllSiteProfiles::compute(dim, phi, cfg.horizon, cfg.budget, cfg.exec)?;
            pts.into_iter().map(|x| all.profile(&x).map(|p| (x, p))).collect::<Result<BTreeMap<_, _>>>()?
        };
        Ok(AnnealedBank { dim, phi: *phi, profiles })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi(&self) -> &OneSitePotential {
        &self.phi
    }

    pub fn profile(&self, x: &LatticePoint) -> Result<&HittingProfile> {
        self.profiles.get(x).ok_or_else(|| Error::Precondition(format!("no profile for {x} in the bank")))
    }

    pub fn bracket(&self, x: &LatticePoint, lambda: f64, tol: f64) -> Result<TwoPointResult> {
        bracket_from_profile(self.profile(x)?, &Setting::Annealed(self.phi), &Target::Point(x.clone()), lambda, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerN {
    pub n: usize,
    /// Enclosure of `b_λ(nx)/n` (annealed), or the range of the replica
    /// brackets of `a_λ(nx, ω)/n` (quenched).
    pub bracket: Bracket,
    pub mean: f64,
    pub se: f64,
    pub running_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub setting: &'static str,
    pub direction: LatticePoint,
    pub lambda: f64,
    pub per_n: Vec<PerN>,
    /// Final enclosure of the norm value.
    pub bracket: Bracket,
    pub raw: Bracket,
    pub sandwich: Bracket,
    pub oracle: &'static str,
}

fn check_direction(x: &LatticePoint) -> Result<()> {
    if x.is_origin() {
        return Err(Error::InvalidInput("the norm is estimated along a nonzero vector".into()));
    }
    Ok(())
}

/// `[‖x‖₁(λ + φ(1)), ‖x‖₁(λ + log 2d + φ(1))]`.
pub fn beta_sandwich(x: &LatticePoint, lambda: f64, phi: &OneSitePotential) -> Bracket {
    let n = x.l1() as f64;
    Bracket::new(n * (lambda + phi.phi1()), n * (lambda + ((2 * x.dim()) as f64).ln() + phi.phi1()))
}

/// `[‖x‖₁(λ - log E e^{-V}), ‖x‖₁(λ + log 2d + E V)]`.
pub fn alpha_sandwich(x: &LatticePoint, lambda: f64, dist: &SiteDistribution) -> Bracket {
    let n = x.l1() as f64;
    Bracket::new(n * (lambda - dist.laplace(1.0).ln()), n * (lambda + ((2 * x.dim()) as f64).ln() + dist.mean()))
}

/// Certified `φ(1)‖x‖₁ + κ_λ(x)`: `b_λ(nx) >= n(φ(1)‖x‖₁ + κ_λ(x))` for all
/// n, since κ is homogeneous.
pub fn beta_lower(x: &LatticePoint, lambda: f64, phi1: f64) -> f64 {
    phi1 * x.l1() as f64 + free_hitting_exponent(&x.as_f64(), lambda)
}

fn finish(
    setting: &'static str,
    x: &LatticePoint,
    lambda: f64,
    per_n: Vec<PerN>,
    lower: f64,
    sandwich: Bracket,
    oracle: &'static str,
) -> LyapunovEstimate {
    let upper = per_n.last().map_or(f64::INFINITY, |p| p.running_upper);
    let mut raw = Bracket { lower, upper: upper.max(lower), flag: BracketFlag::Ok };
    if !within_rounding(lower, upper) {
        raw.flag = BracketFlag::Invalid;
    } else if per_n.iter().all(|p| p.bracket.flag != BracketFlag::Ok) {
        raw.flag = BracketFlag::Wide;
    }
    let bracket = raw.intersect(&sandwich);
    LyapunovEstimate { setting, direction: x.clone(), lambda, per_n, bracket, raw, sandwich, oracle }
}

/// `β_λ(x)` from the per-n brackets of a bank holding `n x`, `n <= n_max`.
pub fn estimate_beta_from_bank(bank: &AnnealedBank, x: &LatticePoint, lambda: f64, n_max: usize, tol: f64) -> Result<LyapunovEstimate> {
    check_direction(x)?;
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    let mut per_n = Vec::with_capacity(n_max);
    let mut running = f64::INFINITY;
    let mut oracle = "exact";
    for n in 1..=n_max {
        let r = bank.bracket(&x.scaled(n as i64), lambda, tol)?;
        oracle = r.oracle;
        let b = r.bracket.scale(1.0 / n as f64);
        running = running.min(b.upper);
        per_n.push(PerN { n, bracket: b, mean: b.mid(), se: 0.0, running_upper: running });
    }
    let phi = bank.phi();
    let lower = beta_lower(x, lambda, phi.phi1()).max(beta_sandwich(x, lambda, phi).lower);
    Ok(finish("annealed", x, lambda, per_n, lower, beta_sandwich(x, lambda, phi), oracle))
}

pub fn estimate_beta(
    x: &LatticePoint,
    lambda: f64,
    phi: &OneSitePotential,
    n_max: usize,
    schedule: &HorizonSchedule,
    cfg: &TwoPointConfig,
) -> Result<LyapunovEstimate> {
    check_direction(x)?;
    let points: Vec<LatticePoint> = (1..=n_max as i64).map(|n| x.scaled(n)).collect();
    let bank = AnnealedBank::build(x.dim(), phi, &points, schedule, cfg)?;
    estimate_beta_from_bank(&bank, x, lambda, n_max, cfg.width_tolerance)
}

/// Seed of the r-th replica field.
pub fn replica_seed(seed: u64, r: usize) -> u64 {
    splitmix64(seed ^ splitmix64(r as u64 + 1))
}

/// Box radius for the quenched solves: large enough that the exit bound
/// `e^{-λR}` is negligible, capped by dimension.
pub fn quenched_box_radius(x: &LatticePoint, n_max: usize, lambda: f64) -> usize {
    let cap = match x.dim() {
        1 => 200,
        2 => 24,
        _ => 10,
    };
    let margin = if lambda > 0.0 { ((36.0 / lambda).ceil() as usize).min(cap) } else { cap };
    n_max * x.linf() as usize + margin
}

/// Monte Carlo estimate of `α_λ(x) = inf_n E a_λ(nx)/n` over replica fields.
pub fn estimate_alpha_with<F>(
    x: &LatticePoint,
    lambda: f64,
    n_max: usize,
    reps: usize,
    field_of: F,
    lower: f64,
    sandwich: Bracket,
    cfg: &TwoPointConfig,
) -> Result<LyapunovEstimate>
where
    F: Fn(usize) -> Result<PotentialField> + Sync + Send,
{
    check_direction(x)?;
    if reps < 2 || n_max == 0 {
        return Err(Error::InvalidInput("need reps >= 2 and n_max >= 1".into()));
    }
    let cfg = *cfg;
    let rows = cfg.exec.map_range(reps, |r| -> Result<Vec<Bracket>> {
        let field = field_of(r)?;
        (1..=n_max)
            .map(|n| {
                let scaled = TwoPointConfig { exec: crate::exec::Exec::Sequential, ..cfg };
                quenched_two_point(&x.scaled(n as i64), lambda, &field, &scaled).map(|t| t.bracket.scale(1.0 / n as f64))
            })
            .collect()
    });
    let rows: Vec<Vec<Bracket>> = rows.into_iter().collect::<Result<_>>()?;
    let mut per_n = Vec::with_capacity(n_max);
    let mut running = f64::INFINITY;
    for n in 1..=n_max {
        let col: Vec<Bracket> = rows.iter().map(|row| row[n - 1]).collect();
        let vals: Vec<f64> = col.iter().map(|b| b.mid()).collect();
        let mean = vals.iter().sum::<f64>() / reps as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        let se = (var / reps as f64).sqrt();
        let slack = col.iter().map(|b| b.width()).fold(0.0, f64::max);
        let flag = col.iter().fold(BracketFlag::Ok, |f, b| f.worst(b.flag));
        let span = Bracket {
            lower: col.iter().map(|b| b.lower).fold(f64::INFINITY, f64::min),
            upper: col.iter().map(|b| b.upper).fold(f64::NEG_INFINITY, f64::max),
            flag,
        };
        let upper = if mean.is_finite() { mean + 2.0 * se + slack } else { f64::INFINITY };
        running = running.min(upper);
        per_n.push(PerN { n, bracket: span, mean, se, running_upper: running });
    }
    Ok(finish("quenched", x, lambda, per_n, lower, sandwich, "fixed_point"))
}

/// `α_λ(x)` over `reps` fields sampled from `dist`.
pub fn estimate_alpha(
    x: &LatticePoint,
    lambda: f64,
    dist: &SiteDistribution,
    n_max: usize,
    reps: usize,
    seed: u64,
    cfg: &TwoPointConfig,
) -> Result<LyapunovEstimate> {
    dist.validate()?;
    let radius = quenched_box_radius(x, n_max, lambda);
    let dim = x.dim();
    let dist = *dist;
    // α_λ >= β_λ for φ_V by Jensen, so the annealed certificate applies
    let lower = beta_lower(x, lambda, -dist.laplace(1.0).ln());
    let sandwich = alpha_sandwich(x, lambda, &dist);
    estimate_alpha_with(
        x,
        lambda,
        n_max,
        reps,
        move |r| PotentialField::sample(dim, radius, dist, replica_seed(seed, r)),
        lower.max(sandwich.lower),
        sandwich,
        cfg,
    )
}

/// Lower and upper norm models built from per-direction brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct NormBrackets {
    pub lambda: f64,
    pub lower: NormModel,
    pub upper: NormModel,
    pub estimates: Vec<LyapunovEstimate>,
}

impl NormBrackets {
    /// Models from estimates over a negation-closed direction set. The
    /// bounds for `x` and `-x` enclose the same value and are merged.
    pub fn from_estimates(lambda: f64, estimates: Vec<LyapunovEstimate>) -> Result<Self> {
        let dirs: Vec<LatticePoint> = estimates.iter().map(|e| e.direction.clone()).collect();
        let find = |x: &LatticePoint| estimates.iter().find(|e| e.direction == *x).map(|e| e.bracket);
        let mut lo = Vec::with_capacity(dirs.len());
        let mut hi = Vec::with_capacity(dirs.len());
        for (e, x) in estimates.iter().zip(&dirs) {
            let b = e.bracket;
            let n = find(&x.neg()).ok_or_else(|| Error::InvalidInput(format!("direction set lacks {}", x.neg())))?;
            lo.push(b.lower.max(n.lower));
            hi.push(b.upper.min(n.upper).max(b.lower.max(n.lower)));
        }
        Ok(NormBrackets {
            lambda,
            lower: NormModel::new(lambda, dirs.clone(), lo)?,
            upper: NormModel::new(lambda, dirs, hi)?,
            estimates,
        })
    }

    pub fn mid(&self) -> Result<NormModel> {
        let v = self.lower.values().iter().zip(self.upper.values()).map(|(a, b)| 0.5 * (a + b)).collect();
        NormModel::new(self.lambda, self.lower.directions().to_vec(), v)
    }
}

/// `β_λ` norm models at every λ of a grid from one bank.
pub fn beta_models(
    bank: &AnnealedBank,
    directions: &[LatticePoint],
    lambdas: &[f64],
    n_max: usize,
    tol: f64,
    exec: crate::exec::Exec,
) -> Result<Vec<NormBrackets>> {
    exec.map(lambdas.to_vec(), |lambda| {
        let est = directions
            .iter()
            .map(|x| estimate_beta_from_bank(bank, x, lambda, n_max, tol))
            .collect::<Result<Vec<_>>>()?;
        NormBrackets::from_estimates(lambda, est)
    })
    .into_iter()
    .collect()
}

/// Sites `n x` for all directions and `n <= n_max` (the bank content needed
/// by [`beta_models`]).
pub fn bank_points(directions: &[LatticePoint], n_max: usize) -> Vec<LatticePoint> {
    directions.iter().flat_map(|x| (1..=n_max as i64).map(move |n| x.scaled(n))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeRow {
    pub point: LatticePoint,
    pub bracket: Bracket,
    pub model_value: f64,
    /// `bracket / model_value`.
    pub ratio: Bracket,
}

/// Two-point brackets along a sequence divided by a norm model; a
/// diagnostic of the shape theorem, not a convergence test.
pub fn shape_diagnostic<F>(points: &[LatticePoint], model: &NormModel, two_point: F) -> Result<Vec<ShapeRow>>
where
    F: Fn(&LatticePoint) -> Result<Bracket>,
{
    points
        .iter()
        .map(|x| {
            let bracket = two_point(x)?;
            let model_value = model.eval(&x.as_f64());
            let ratio = if model_value > 0.0 { bracket.scale(1.0 / model_value) } else { Bracket::point(f64::NAN) };
            Ok(ShapeRow { point: x.clone(), bracket, model_value, ratio })
        })
        .collect()
}
