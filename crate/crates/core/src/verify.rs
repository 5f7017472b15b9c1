//! The cross-module invariant suite at desk scale.
//!
//! Each check returns a [`Verdict`] with the number of checked instances,
//! the number of violations and the worst observed discrepancy. Fixtures
//! (norm-model banks) are built once and shared.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convex_phase::{default_lambda_grid, point_to_hyperplane, Family, RateFunctionModel, Regime};
use crate::error::Result;
use crate::exec::Exec;
use crate::lattice::{enumerate_paths, LatticePoint};
use crate::lyapunov::{
    alpha_sandwich, bank_points, beta_models, beta_sandwich, default_directions, estimate_alpha, estimate_beta_from_bank,
    replica_seed, AnnealedBank, HorizonSchedule, NormBrackets,
};
use crate::path_measures::{annealed_endpoint_weights, ballisticity_scan, ldp_scan, quenched_endpoint_weights, EndpointLaw, VelocityEvent};
use crate::potential::{annealed_increment, annealed_weight, annealed_weight_prefix, OneSitePotential, PotentialField, SiteDistribution};
use crate::two_point::{annealed_a_priori_bounds, annealed_two_point, Backend, BracketFlag, TwoPointConfig};

pub const VERIFY_FORMAT_VERSION: u32 = 1;

const ENUMERATION_BUDGET: u128 = 1 << 26;
const N_MAX_1D: usize = 8;
const N_MAX_2D: usize = 5;
const HORIZON_2D: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub id: u32,
    pub name: &'static str,
    pub status: Status,
    pub checks: usize,
    pub violations: usize,
    /// Instances that passed but carried a non-ok bracket flag.
    pub flagged: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<28} {} checks={} violations={} flagged={} worst={:.3e} tol={:.1e} {}",
            self.id,
            self.name,
            self.status.as_str(),
            self.checks,
            self.violations,
            self.flagged,
            self.worst,
            self.tolerance,
            self.detail
        )
    }
}

/// Accumulates checks for one verdict.
#[derive(Debug)]
struct Tally {
    checks: usize,
    violations: usize,
    flagged: usize,
    worst: f64,
    first: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { checks: 0, violations: 0, flagged: 0, worst: 0.0, first: None }
    }

    fn check(&mut self, ok: bool, discrepancy: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        if discrepancy.is_finite() {
            self.worst = self.worst.max(discrepancy);
        }
        if !ok {
            self.violations += 1;
            if self.first.is_none() {
                self.first = Some(what());
            }
        }
    }

    fn finish(self, id: u32, name: &'static str, tolerance: f64, detail: String) -> Verdict {
        let status = if self.violations == 0 && self.checks > 0 { Status::Pass } else { Status::Fail };
        let detail = match self.first {
            Some(f) if detail.is_empty() => format!("first violation: {f}"),
            Some(f) => format!("{detail}; first violation: {f}"),
            None => detail,
        };
        Verdict { id, name, status, checks: self.checks, violations: self.violations, flagged: self.flagged, worst: self.worst, tolerance, detail }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn hard() -> OneSitePotential {
    OneSitePotential::HardObstacle { gamma: 1.0 }
}

fn nonzero_ball(dim: usize, r: i64) -> Vec<LatticePoint> {
    LatticePoint::l1_ball(dim, r).into_iter().filter(|x| !x.is_origin()).collect()
}

/// Banks and norm models shared by several checks.
pub struct Fixtures {
    pub exec: Exec,
    pub seed: u64,
    pub lambdas: Vec<f64>,
    /// Hard obstacle γ = 1 banks holding every site needed below.
    pub bank_1d: AnnealedBank,
    pub bank_2d: AnnealedBank,
    pub brackets_1d: Vec<NormBrackets>,
    pub brackets_2d: Vec<NormBrackets>,
    pub model_1d: RateFunctionModel,
    pub model_2d: RateFunctionModel,
}

impl Fixtures {
    pub fn build(seed: u64, exec: Exec) -> Result<Self> {
        let lambdas = default_lambda_grid();
        let schedule = HorizonSchedule::default();
        let cfg1 = TwoPointConfig { exec, ..Default::default() };
        let cfg2 = TwoPointConfig { horizon: HORIZON_2D, exec, ..Default::default() };
        let bank_1d = AnnealedBank::build(1, &hard(), &nonzero_ball(1, 3 * N_MAX_1D as i64), &schedule, &cfg1)?;
        let bank_2d = AnnealedBank::build(2, &hard(), &nonzero_ball(2, HORIZON_2D as i64), &schedule, &cfg2)?;
        let dirs1 = default_directions(1);
        let dirs2 = default_directions(2);
        let brackets_1d = beta_models(&bank_1d, &dirs1, &lambdas, N_MAX_1D, 1e-6, exec)?;
        let brackets_2d = beta_models(&bank_2d, &dirs2, &lambdas, N_MAX_2D, 1e-6, exec)?;
        let model_1d = RateFunctionModel::from_brackets("annealed", 1.0, &brackets_1d)?;
        let model_2d = RateFunctionModel::from_brackets("annealed", 1.0, &brackets_2d)?;
        Ok(Fixtures { exec, seed, lambdas, bank_1d, bank_2d, brackets_1d, brackets_2d, model_1d, model_2d })
    }
}

fn endpoint_law_gap(a: &EndpointLaw, b: &EndpointLaw) -> f64 {
    if a.law.len() != b.law.len() || a.law.iter().zip(&b.law).any(|(x, y)| x.0 != y.0) {
        return f64::INFINITY;
    }
    a.law.iter().zip(&b.law).map(|(x, y)| rel(x.1, y.1)).fold(rel(a.log_z.exp(), b.log_z.exp()), f64::max)
}

/// Range DP and enumeration give the same `Z^h_n` and endpoint laws.
pub fn oracle_equivalence(fx: &Fixtures) -> Result<Verdict> {
    let tol = 1e-12;
    let mut t = Tally::new();
    for n in 1..=12 {
        let dp = annealed_endpoint_weights(1, &hard(), n, Backend::RangeDp, ENUMERATION_BUDGET, fx.exec)?;
        let en = annealed_endpoint_weights(1, &hard(), n, Backend::Enumeration, ENUMERATION_BUDGET, fx.exec)?;
        for h in [0.0, 0.5] {
            let gap = endpoint_law_gap(&dp.law(&[h])?, &en.law(&[h])?);
            t.check(gap <= tol, gap, || format!("n={n} h={h} gap={gap:e}"));
        }
    }
    Ok(t.finish(1, "oracle_equivalence", tol, "d=1 hard obstacle γ=1, n<=12, h in {0, 0.5}".into()))
}

/// Quenched transfer recursion against enumeration on seeded fields.
pub fn transfer_vs_enumeration(fx: &Fixtures) -> Result<Verdict> {
    let tol = 1e-12;
    let n = 10;
    let dist = SiteDistribution::BernoulliZero { p: 0.5, v: 1.0 };
    let gaps = fx.exec.map_range(20, |r| -> Result<f64> {
        let field = PotentialField::sample(1, n, dist, replica_seed(fx.seed, r))?;
        let tr = quenched_endpoint_weights(&field, n, Backend::Transfer, ENUMERATION_BUDGET, Exec::Sequential)?;
        let en = quenched_endpoint_weights(&field, n, Backend::Enumeration, ENUMERATION_BUDGET, Exec::Sequential)?;
        Ok(endpoint_law_gap(&tr.law(&[0.0])?, &en.law(&[0.0])?))
    });
    let mut t = Tally::new();
    for (r, gap) in gaps.into_iter().enumerate() {
        let gap = gap?;
        t.check(gap <= tol, gap, || format!("field {r} gap={gap:e}"));
    }
    Ok(t.finish(2, "transfer_vs_enumeration", tol, format!("20 Bernoulli fields, n={n}")))
}

/// Two-point and Lyapunov brackets inside the a-priori bounds.
pub fn a_priori_bounds(fx: &Fixtures) -> Result<Verdict> {
    let slack = 1e-12;
    let mut t = Tally::new();
    let n_max = [N_MAX_1D, 3];
    for (d, bank) in [(1usize, &fx.bank_1d), (2, &fx.bank_2d)] {
        let pts = nonzero_ball(d, 3);
        for &lambda in &fx.lambdas {
            for x in &pts {
                let r = bank.bracket(x, lambda, 1e-6)?;
                let prior = annealed_a_priori_bounds(x, lambda, &hard());
                let ok = r.bracket.within(&prior, slack)
                    && r.raw.overlaps(&prior, slack)
                    && r.bracket.flag != BracketFlag::Invalid;
                if ok && r.bracket.flag != BracketFlag::Ok {
                    t.flagged += 1;
                }
                let excess = (prior.lower - r.bracket.lower).max(r.bracket.upper - prior.upper).max(0.0);
                t.check(ok, excess, || format!("b at d={d} x={x} λ={lambda}: {:?} vs {prior:?}", r.bracket));
                let e = estimate_beta_from_bank(bank, x, lambda, n_max[d - 1], 1e-6)?;
                let s = beta_sandwich(x, lambda, &hard());
                let ok = e.bracket.within(&s, slack) && e.raw.overlaps(&s, slack) && e.bracket.flag != BracketFlag::Invalid;
                if ok && e.bracket.flag != BracketFlag::Ok {
                    t.flagged += 1;
                }
                let excess = (s.lower - e.bracket.lower).max(e.bracket.upper - s.upper).max(0.0);
                t.check(ok, excess, || format!("β at d={d} x={x} λ={lambda}: {:?} vs {s:?}", e.bracket));
            }
        }
    }
    let dist = SiteDistribution::BernoulliZero { p: 0.5, v: 1.0 };
    for (d, horizon) in [(1usize, 60usize), (2, 16)] {
        let cfg = TwoPointConfig { horizon, backend: Backend::Transfer, exec: fx.exec, ..Default::default() };
        let pts = nonzero_ball(d, 3);
        for &lambda in &fx.lambdas {
            for x in &pts {
                let e = estimate_alpha(x, lambda, &dist, 2, 4, fx.seed, &cfg)?;
                let s = alpha_sandwich(x, lambda, &dist);
                // the raw upper end is statistical, only the certified lower end must agree
                let ok = e.bracket.within(&s, slack) && e.raw.lower <= s.upper + slack;
                if ok && e.bracket.flag != BracketFlag::Ok {
                    t.flagged += 1;
                }
                let excess = (s.lower - e.bracket.lower).max(e.bracket.upper - s.upper).max(0.0);
                t.check(ok, excess, || format!("α at d={d} x={x} λ={lambda}: {:?} vs {s:?}", e.bracket));
            }
        }
    }
    Ok(t.finish(3, "a_priori_bounds", slack, "default λ-grid, d in {1,2}, |x|_1 <= 3".into()))
}

/// `b(x+y) <= b(x) + b(y)` on brackets.
pub fn triangle_inequality(fx: &Fixtures) -> Result<Verdict> {
    let slack = 1e-12;
    let mut t = Tally::new();
    for (d, bank) in [(1usize, &fx.bank_1d), (2, &fx.bank_2d)] {
        let pts = nonzero_ball(d, 3);
        for lambda in [0.5, 1.0] {
            let b = |x: &LatticePoint| -> Result<f64> { Ok(bank.bracket(x, lambda, 1e-6)?.bracket.upper) };
            for x in &pts {
                for y in &pts {
                    let s = x.add(y);
                    let lhs = if s.is_origin() { 0.0 } else { bank.bracket(&s, lambda, 1e-6)?.bracket.lower };
                    let rhs = b(x)? + b(y)?;
                    t.check(lhs <= rhs + slack, (lhs - rhs).max(0.0), || format!("d={d} λ={lambda} x={x} y={y}: {lhs} > {rhs}"));
                }
            }
        }
    }
    Ok(t.finish(4, "triangle_inequality", slack, "d in {1,2}, |x|_1,|y|_1 <= 3, λ in {0.5, 1}".into()))
}

/// Splitting inequality and subadditivity floor of Φ on all short d = 1 paths.
pub fn phi_machinery(_fx: &Fixtures) -> Result<Verdict> {
    let slack = 1e-12;
    let phis = [
        hard(),
        OneSitePotential::PowerLaw { c: 0.5, a: 0.5 },
        OneSitePotential::Capped { c: 0.7, cap: 2.0 },
        OneSitePotential::FromDistribution { dist: SiteDistribution::Exponential { rate: 2.0 } },
    ];
    let mut t = Tally::new();
    for phi in &phis {
        for n in 1..=10 {
            let e = enumerate_paths(1, n)?;
            for path in e.iter() {
                let total = annealed_weight(&path, phi);
                let floor = phi.at(n as u64);
                t.check(total >= floor - slack, (floor - total).max(0.0), || format!("{} n={n}: Φ(n)={total} < φ(n)={floor}", phi.label()));
                for m in 0..=n {
                    let split = annealed_weight_prefix(&path, phi, m) + annealed_increment(&path, phi, m, n)?;
                    t.check(total <= split + slack, (total - split).max(0.0), || format!("{} n={n} m={m}: {total} > {split}", phi.label()));
                }
            }
        }
    }
    Ok(t.finish(5, "phi_machinery", slack, "all d=1 paths, n <= 10, m <= n, four potentials".into()))
}

/// Midpoint convexity of J and concavity of β in λ.
pub fn convexity(fx: &Fixtures) -> Result<Verdict> {
    let tol = 1e-9;
    let mut t = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(fx.seed);
    for m in [&fx.model_1d, &fx.model_2d] {
        let d = m.dim();
        for _ in 0..500 {
            let mut point = || loop {
                let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if x.iter().map(|c| c.abs()).sum::<f64>() <= 0.98 {
                    return x;
                }
            };
            let (x, y) = (point(), point());
            let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            let (jx, jy, jz) = (m.rate_of(Family::Mid, &x), m.rate_of(Family::Mid, &y), m.rate_of(Family::Mid, &z));
            let excess = jz - 0.5 * (jx + jy);
            t.check(excess <= tol, excess.max(0.0), || format!("J not midpoint convex at {x:?}, {y:?}: excess {excess:e}"));
        }
    }
    let segments = t.checks;
    for brackets in [&fx.brackets_1d, &fx.brackets_2d] {
        for k in 1..brackets.len() - 1 {
            let (l0, l1, l2) = (brackets[k - 1].lambda, brackets[k].lambda, brackets[k + 1].lambda);
            let w = (l1 - l0) / (l2 - l0);
            for i in 0..brackets[k].estimates.len() {
                let a = brackets[k - 1].estimates[i].bracket.lower;
                let b = brackets[k].estimates[i].bracket.upper;
                let c = brackets[k + 1].estimates[i].bracket.lower;
                let chord = (1.0 - w) * a + w * c;
                t.check(b + 1e-12 >= chord, (chord - b).max(0.0), || {
                    format!("β not concave at λ={l1}, direction {}", brackets[k].estimates[i].direction)
                });
            }
        }
    }
    Ok(t.finish(6, "convexity_concavity", tol, format!("{segments} J segments; β triples on the default grid")))
}

/// `|F(h) - max(0, λ_h)| <= 10 × tolerance` over both regimes.
pub fn free_energy_identity(fx: &Fixtures) -> Result<Verdict> {
    let mut t = Tally::new();
    let (mut sub, mut bal) = (0, 0);
    let mut worst_tol: f64 = 0.0;
    for k in 1..=20 {
        let h = 0.15 * k as f64 + 0.01;
        let r = fx.model_1d.phase_report(&[h], None)?;
        match r.regime {
            Regime::SubBallistic => sub += 1,
            Regime::Ballistic => bal += 1,
            Regime::Critical => {}
        }
        worst_tol = worst_tol.max(r.tolerance);
        let ratio = r.identity_gap / (10.0 * r.tolerance);
        t.check(r.identity_gap <= 10.0 * r.tolerance && r.identity_ok, ratio, || format!("h={h}: gap {} tol {}", r.identity_gap, r.tolerance));
    }
    let spans = sub > 0 && bal > 0;
    t.check(spans, 0.0, || format!("drifts do not span both regimes ({sub} sub-ballistic, {bal} ballistic)"));
    Ok(t.finish(7, "free_energy_identity", 1.0, format!("worst gap/(10 tol) reported; {sub} sub-ballistic, {bal} ballistic; max tol {worst_tol:.2e}")))
}

/// d = 1 duality and the hyperplane function against the site function.
pub fn duality_exactness(fx: &Fixtures) -> Result<Verdict> {
    let m = &fx.model_1d;
    let mut t = Tally::new();
    for fam in [Family::Lower, Family::Mid, Family::Upper] {
        let f = m.family(fam);
        for (k, &l) in f.lambdas().iter().enumerate() {
            let v = m.dual_norm(&[1.0], l, fam)? * f.models()[k].eval(&[1.0]);
            let gap = (v - 1.0).abs();
            t.check(gap <= 1e-9, gap, || format!("{fam:?} λ={l}: product {v}"));
        }
    }
    let cfg = TwoPointConfig { exec: fx.exec, ..Default::default() };
    let k = m.lambdas().iter().position(|l| *l == 1.0).unwrap_or(0);
    let model = &m.family(Family::Mid).models()[k];
    let lambda = model.lambda();
    let us = [1.0, 2.5, 4.0, 7.3];
    let rep = point_to_hyperplane(&[1.0], lambda, &us, &crate::two_point::Setting::Annealed(hard()), Some(model), &cfg)?;
    for row in &rep.rows {
        let site = annealed_two_point(&LatticePoint(vec![row.u.ceil() as i64]), lambda, &hard(), &cfg)?.bracket.scale(1.0 / row.u);
        let gap = (row.bracket.lower - site.lower).abs().max((row.bracket.upper - site.upper).abs());
        t.check(gap <= 1e-12, gap, || format!("u={}: {:?} vs {site:?}", row.u, row.bracket));
    }
    let target = rep.target.unwrap_or(f64::NAN);
    let gap = (target - model.eval(&[1.0])).abs();
    t.check(gap <= 1e-12, gap, || format!("hyperplane target {target} vs norm {}", model.eval(&[1.0])));
    Ok(t.finish(8, "duality_exactness", 1e-9, "dual 1e-9 on every node; hyperplane 1e-12".into()))
}

/// Mean speed and small-velocity mass order across the phase transition.
pub fn phase_ordering(fx: &Fixtures) -> Result<Verdict> {
    let mut t = Tally::new();
    let w = annealed_endpoint_weights(1, &hard(), 100, Backend::Auto, ENUMERATION_BUDGET, fx.exec)?;
    let (hs, hb) = (0.5, 2.0);
    let rs = fx.model_1d.regime(&[hs])?.0;
    let rb = fx.model_1d.regime(&[hb])?.0;
    t.check(w.oracle == "range_dp", 0.0, || format!("oracle {} is not exact range DP", w.oracle));
    t.check(rs == Regime::SubBallistic && rb == Regime::Ballistic, 0.0, || format!("regimes {rs:?} / {rb:?}"));
    let scan = ballisticity_scan(&[vec![hs], vec![hb]], &w, 0.1, None)?;
    let (sub, bal) = (&scan.rows[0], &scan.rows[1]);
    t.check(bal.mean_speed > sub.mean_speed, 0.0, || format!("speed {} <= {}", bal.mean_speed, sub.mean_speed));
    t.check(sub.event_log_prob_over_n > bal.event_log_prob_over_n, 0.0, || {
        format!("small-velocity mass {} <= {}", sub.event_log_prob_over_n, bal.event_log_prob_over_n)
    });
    Ok(t.finish(
        9,
        "phase_ordering",
        0.0,
        format!(
            "n=100; speeds {:.4} < {:.4}; (1/n) log mass of |v|<=0.1: {:.4} > {:.4}",
            sub.mean_speed, bal.mean_speed, sub.event_log_prob_over_n, bal.event_log_prob_over_n
        ),
    ))
}

/// `(1/n) log Q⁰_n[S(n) ∈ nA]`, `A = [0.6, 1]`, moving toward `-inf_A J`.
pub fn ldp_trend(fx: &Fixtures) -> Result<Verdict> {
    let event = VelocityEvent::HalfSpace { ell: vec![1.0], c: 0.6 };
    let exec = fx.exec;
    let scan = ldp_scan(
        &[0.0],
        &[8, 12, 16],
        &event,
        |n| annealed_endpoint_weights(1, &hard(), n, Backend::Auto, ENUMERATION_BUDGET, exec),
        Some(&fx.model_1d),
        exec,
    )?;
    let target = &scan.targets[0];
    let gaps: Vec<f64> = scan.rows.iter().map(|r| (r.event_log_prob_over_n - target.mid).abs()).collect();
    let mut t = Tally::new();
    for (i, w) in gaps.windows(2).enumerate() {
        t.check(w[1] <= w[0], w[1] - w[0], || format!("gap grows between n={} and n={}: {:.4} -> {:.4}", scan.rows[i].n, scan.rows[i + 1].n, w[0], w[1]));
    }
    t.check(gaps[2] < gaps[0], gaps[2] - gaps[0], || format!("gap at n=16 ({:.4}) not below n=8 ({:.4})", gaps[2], gaps[0]));
    let values: Vec<String> = scan.rows.iter().map(|r| format!("{:.4}", r.event_log_prob_over_n)).collect();
    Ok(t.finish(
        10,
        "ldp_trend",
        0.0,
        format!(
            "values [{}] target {:.4} envelope [{:.4}, {:.4}]",
            values.join(", "),
            target.mid,
            target.envelope.lower,
            target.envelope.upper
        ),
    ))
}

/// `(-1/n) log Z⁰_n` strictly decreasing over n = 50, 100, 200.
pub fn vanishing_exponent(fx: &Fixtures) -> Result<Verdict> {
    let ns = [50usize, 100, 200];
    let mut v = Vec::with_capacity(ns.len());
    for &n in &ns {
        let w = annealed_endpoint_weights(1, &hard(), n, Backend::RangeDp, ENUMERATION_BUDGET, fx.exec)?;
        v.push(-w.log_z(&[0.0]) / n as f64);
    }
    let mut t = Tally::new();
    t.check(v[0] > v[1] && v[1] > v[2], 0.0, || format!("not strictly decreasing: {v:?}"));
    t.check(v[2] < v[0] && v[2] < hard().phi1(), 0.0, || format!("value at n=200 {} not below n=50 and φ(1)", v[2]));
    Ok(t.finish(11, "vanishing_exponent", 0.0, format!("values {:.4} > {:.4} > {:.4}", v[0], v[1], v[2])))
}

/// Sequential and parallel runs serialize to the same bytes.
pub fn determinism(fx: &Fixtures) -> Result<Verdict> {
    let mut t = Tally::new();
    let run = |exec: Exec| -> Result<String> {
        let w = annealed_endpoint_weights(2, &hard(), 8, Backend::Enumeration, ENUMERATION_BUDGET, exec)?;
        let law = w.law(&[0.3, -0.1])?;
        let lambdas = [0.0, 0.5, 1.0];
        let br = beta_models(&fx.bank_2d, &default_directions(2), &lambdas, 3, 1e-6, exec)?;
        let vals: Vec<Vec<f64>> = br.iter().map(|b| b.upper.values().to_vec()).collect();
        let dirs = [LatticePoint(vec![1, 0]), LatticePoint(vec![1, 1])];
        let pts = bank_points(&dirs, 2);
        let cfg = TwoPointConfig { horizon: 8, exec, ..Default::default() };
        let tp: Vec<(f64, f64)> = pts
            .iter()
            .map(|x| annealed_two_point(x, 0.5, &OneSitePotential::PowerLaw { c: 0.5, a: 0.5 }, &cfg).map(|r| (r.bracket.lower, r.bracket.upper)))
            .collect::<Result<_>>()?;
        let json = serde_json::json!({ "law": law.law.iter().map(|(x, p)| (x.coords().to_vec(), *p)).collect::<Vec<_>>(), "log_z": law.log_z, "beta": vals, "two_point": tp });
        Ok(json.to_string())
    };
    let a = run(Exec::Sequential)?;
    let b = run(Exec::Parallel)?;
    t.check(a == b, 0.0, || "sequential and parallel outputs differ".into());
    Ok(t.finish(12, "determinism", 0.0, format!("{} bytes compared", a.len())))
}

pub type Check = fn(&Fixtures) -> Result<Verdict>;

/// The checks in criterion order.
pub fn checks() -> Vec<Check> {
    vec![
        oracle_equivalence,
        transfer_vs_enumeration,
        a_priori_bounds,
        triangle_inequality,
        phi_machinery,
        convexity,
        free_energy_identity,
        duality_exactness,
        phase_ordering,
        ldp_trend,
        vanishing_exponent,
        determinism,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub format_version: u32,
    pub seed: u64,
    pub verdicts: Vec<Verdict>,
    pub all_passed: bool,
}

pub fn run_suite(seed: u64, exec: Exec) -> Result<VerifyReport> {
    let fx = Fixtures::build(seed, exec)?;
    let verdicts = checks().into_iter().map(|c| c(&fx)).collect::<Result<Vec<_>>>()?;
    let all_passed = verdicts.iter().all(|v| v.passed());
    Ok(VerifyReport { format_version: VERIFY_FORMAT_VERSION, seed, verdicts, all_passed })
}
