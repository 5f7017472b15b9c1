//! Rate functions, dual norms, the critical drift and the free energy,
//! computed from a λ-indexed family of norm models.
//!
//! Norm evaluations are interpolated linearly in λ between grid nodes, so
//! `λ ↦ N_λ(x) - λ` is piecewise linear and its supremum over the grid is
//! attained at a node.

mod family;

use serde::Serialize;

pub use family::{check_grid, NormFamily};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lyapunov::{NormBrackets, NormModel};
use crate::numerics::{bisect, golden_max};
use crate::two_point::{two_point, Bracket, Setting, Target, TwoPointConfig};

pub const PHASE_FORMAT_VERSION: u32 = 1;
/// Residual target of the critical-drift bisection.
pub const CRITICAL_RESIDUAL: f64 = 1e-6;

/// `{0, 1/8, ..., 4}` followed by sparser nodes out to 512, so that
/// `λ_max(x)` is covered for `‖x‖₁` up to about 0.99.
pub fn default_lambda_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=32).map(|k| k as f64 * 0.125).collect();
    g.extend([5.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0, 128.0, 192.0, 256.0, 384.0, 512.0]);
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Lower,
    Mid,
    Upper,
}

/// Lower, upper and midpoint norm families on a common λ-grid.
#[derive(Debug, Clone)]
pub struct RateFunctionModel {
    setting: String,
    lower: NormFamily,
    mid: NormFamily,
    upper: NormFamily,
    /// `φ(1) + E V` in the λ_max formula (`E V = 0` for the annealed norm).
    growth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateValue {
    pub lower: f64,
    pub mid: f64,
    pub upper: f64,
    /// Node of the midpoint maximum.
    pub argmax_lambda: f64,
    /// Set on the boundary `‖x‖₁ = 1`, where the supremum may sit beyond
    /// the grid and the value is only a lower estimate.
    pub lower_estimate: bool,
}

impl RateValue {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalLambda {
    pub lambda: f64,
    pub residual: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeEnergy {
    pub value: f64,
    pub argmax: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    SubBallistic,
    Critical,
    Ballistic,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::SubBallistic => "sub-ballistic",
            Regime::Critical => "critical",
            Regime::Ballistic => "ballistic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseReport {
    pub format_version: u32,
    pub setting: String,
    pub h: Vec<f64>,
    pub dual0: f64,
    pub dual0_slack: f64,
    pub regime: Regime,
    pub lambda_h: Option<f64>,
    pub lambda_h_residual: Option<f64>,
    pub free_energy: f64,
    /// Free energies of the upper and lower norm families.
    pub free_energy_bracket: Bracket,
    /// `|f_upper - f_lower| + 1e-6`.
    pub tolerance: f64,
    /// `|free_energy - max(0, λ_h)|`.
    pub identity_gap: f64,
    pub identity_ok: bool,
    pub epsilon: Option<f64>,
    pub velocity_set: Vec<Vec<f64>>,
}

fn l1(x: &[f64]) -> f64 {
    x.iter().map(|c| c.abs()).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Tightens per-direction brackets with what holds for every true norm:
/// nondecreasing in λ with slope at least `‖x‖₁`.
fn tighten(lambdas: &[f64], lo: &mut [Vec<f64>], hi: &mut [Vec<f64>], norms: &[f64]) {
    let m = lambdas.len();
    for (i, norm) in norms.iter().enumerate() {
        for k in 1..m {
            let v = lo[k - 1][i] + norm * (lambdas[k] - lambdas[k - 1]);
            lo[k][i] = lo[k][i].max(v);
        }
        for k in (0..m - 1).rev() {
            let v = hi[k + 1][i] - norm * (lambdas[k + 1] - lambdas[k]);
            hi[k][i] = hi[k][i].min(v);
        }
    }
}

impl RateFunctionModel {
    /// Builds the three families from per-λ norm brackets. `growth` is
    /// `φ(1)` (annealed) or `φ_V(1) + E V` (quenched, possibly infinite).
    pub fn from_brackets(setting: &str, growth: f64, brackets: &[NormBrackets]) -> Result<Self> {
        if brackets.is_empty() {
            return Err(Error::InvalidInput("empty norm family".into()));
        }
        let lambdas: Vec<f64> = brackets.iter().map(|b| b.lambda).collect();
        let dirs = brackets[0].lower.directions().to_vec();
        if brackets.iter().any(|b| b.lower.directions() != dirs.as_slice() || b.upper.directions() != dirs.as_slice()) {
            return Err(Error::InvalidInput("norm models of a family must share one direction set".into()));
        }
        family::check_grid(&lambdas)?;
        let mut lo: Vec<Vec<f64>> = brackets.iter().map(|b| b.lower.values().to_vec()).collect();
        let mut hi: Vec<Vec<f64>> = brackets.iter().map(|b| b.upper.values().to_vec()).collect();
        let norms: Vec<f64> = dirs.iter().map(|x| x.l1() as f64).collect();
        tighten(&lambdas, &mut lo, &mut hi, &norms);
        for (k, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if let Some(i) = (0..l.len()).find(|&i| l[i] > h[i] + 1e-9 * h[i].abs().max(1.0)) {
                return Err(Error::Inconsistent(format!(
                    "brackets for {} cross after monotone tightening at λ = {}",
                    dirs[i], lambdas[k]
                )));
            }
        }
        let build = |vals: &[Vec<f64>]| -> Result<NormFamily> {
            let models = lambdas
                .iter()
                .zip(vals)
                .map(|(l, v)| NormModel::new(*l, dirs.clone(), v.clone()))
                .collect::<Result<Vec<_>>>()?;
            NormFamily::new(models)
        };
        let mid: Vec<Vec<f64>> =
            lo.iter().zip(&hi).map(|(l, h)| l.iter().zip(h).map(|(a, b)| 0.5 * (a + b.max(*a))).collect()).collect();
        Ok(RateFunctionModel {
            setting: setting.to_string(),
            lower: build(&lo)?,
            mid: build(&mid)?,
            upper: build(&hi)?,
            growth,
        })
    }

    /// A model with no bracket slack, e.g. from a closed form.
    pub fn exact(setting: &str, growth: f64, models: Vec<NormModel>) -> Result<Self> {
        let fam = NormFamily::new(models)?;
        Ok(RateFunctionModel {
            setting: setting.to_string(),
            lower: fam.clone(),
            mid: fam.clone(),
            upper: fam,
            growth,
        })
    }

    pub fn setting(&self) -> &str {
        &self.setting
    }

    pub fn dim(&self) -> usize {
        self.mid.dim()
    }

    pub fn lambdas(&self) -> &[f64] {
        self.mid.lambdas()
    }

    pub fn family(&self, f: Family) -> &NormFamily {
        match f {
            Family::Lower => &self.lower,
            Family::Mid => &self.mid,
            Family::Upper => &self.upper,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() || x.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("expected a finite vector of dimension {}", self.dim())));
        }
        Ok(())
    }

    /// `(log 2d + φ(1) + E V + 1)/(1 - ‖x‖₁)`. With `E V = ∞` the slope
    /// excess is read off the last node of the upper family instead.
    pub fn lambda_max(&self, x: &[f64]) -> f64 {
        let n = l1(x);
        if n >= 1.0 {
            return f64::INFINITY;
        }
        let d = self.dim() as f64;
        let growth = if self.growth.is_finite() {
            self.growth + (2.0 * d).ln()
        } else {
            let last = self.upper.models().last().unwrap();
            let lam = last.lambda();
            last.directions().iter().map(|e| last.eval(&e.as_f64()) / e.l1() as f64 - lam).fold(0.0, f64::max)
        };
        (growth + 1.0) / (1.0 - n)
    }

    /// `sup_λ (N_λ(x) - λ)` over the grid for the three families; `lower`
    /// and `upper` also use the concavity of the true norm between nodes.
    pub fn rate_value(&self, x: &[f64]) -> Result<RateValue> {
        self.check_dim(x)?;
        let n = l1(x);
        if n > 1.0 + 1e-12 {
            let inf = f64::INFINITY;
            return Ok(RateValue { lower: inf, mid: inf, upper: inf, argmax_lambda: inf, lower_estimate: false });
        }
        if n == 0.0 {
            return Ok(RateValue { lower: 0.0, mid: 0.0, upper: 0.0, argmax_lambda: 0.0, lower_estimate: false });
        }
        let on_boundary = n >= 1.0 - 1e-12;
        let (mid, k_mid) = self.mid.node_max(x);
        let (lower, k_lo) = self.lower.node_max(x);
        let upper = self.upper_envelope(x);
        let last = self.lambdas().len() - 1;
        let end = self.lambdas()[last];
        if !on_boundary && self.lambda_max(x) > end && (k_mid == last || k_lo == last) {
            return Err(Error::GridTooShort { lambda_end: end, lambda_needed: self.lambda_max(x) });
        }
        Ok(RateValue {
            lower,
            mid,
            upper: upper.max(mid),
            argmax_lambda: self.lambdas()[k_mid],
            lower_estimate: on_boundary,
        })
    }

    /// Bound on `sup_λ (N_λ(x) - λ)` for any norm that is concave,
    /// nondecreasing with slope at least `‖x‖₁` in λ and lies inside the
    /// node brackets.
    fn upper_envelope(&self, x: &[f64]) -> f64 {
        let lam = self.lambdas();
        let lo: Vec<f64> = self.lower.models().iter().map(|m| m.eval(x)).collect();
        let hi: Vec<f64> = self.upper.models().iter().map(|m| m.eval(x)).collect();
        let norm = l1(x);
        let mut best = (0..lam.len()).map(|k| hi[k] - lam[k]).fold(f64::NEG_INFINITY, f64::max);
        for k in 0..lam.len() - 1 {
            let (a, b) = (lam[k], lam[k + 1]);
            // lines (value at λ = 0, slope) bounding the norm on [a, b]
            let mut lines = vec![(hi[k + 1], 0.0), (hi[k + 1] - norm * b, norm)];
            if k >= 1 {
                let s = (hi[k] - lo[k - 1]) / (a - lam[k - 1]);
                lines.push((hi[k] - s * a, s));
            }
            if k + 2 < lam.len() {
                let s = (lo[k + 2] - hi[k + 1]) / (lam[k + 2] - b);
                lines.push((hi[k + 1] - s * b, s));
            }
            let env = |l: f64| lines.iter().map(|(c, s)| c + s * l).fold(f64::INFINITY, f64::min) - l;
            let mut cands = vec![a, b];
            for i in 0..lines.len() {
                for j in i + 1..lines.len() {
                    let (c1, s1) = lines[i];
                    let (c2, s2) = lines[j];
                    if s1 != s2 {
                        let l = (c2 - c1) / (s1 - s2);
                        if l > a && l < b {
                            cands.push(l);
                        }
                    }
                }
            }
            best = cands.into_iter().map(env).fold(best, f64::max);
        }
        best
    }

    /// `J` of one family, node maximum only (no grid checks).
    pub fn rate_of(&self, f: Family, x: &[f64]) -> f64 {
        if l1(x) > 1.0 + 1e-12 {
            return f64::INFINITY;
        }
        self.family(f).node_max(x).0
    }

    pub fn dual_norm(&self, ell: &[f64], lambda: f64, f: Family) -> Result<f64> {
        self.check_dim(ell)?;
        self.family(f).dual(ell, lambda)
    }

    /// The λ with `dual(h, λ) = 1`, by bisection on `[0, ‖h‖₁]`; absent
    /// when `dual(h, 0) <= 1`.
    pub fn critical_lambda(&self, h: &[f64], f: Family) -> Result<Option<CriticalLambda>> {
        self.check_dim(h)?;
        let fam = self.family(f);
        if fam.dual(h, 0.0)? <= 1.0 {
            return Ok(None);
        }
        let end = *fam.lambdas().last().unwrap();
        let hi = l1(h).min(end);
        if fam.dual(h, hi)? > 1.0 {
            return Err(Error::GridTooShort { lambda_end: end, lambda_needed: l1(h) });
        }
        let root = bisect(|l| fam.dual(h, l).unwrap_or(f64::NAN) - 1.0, 0.0, hi, 0.0, CRITICAL_RESIDUAL)
            .ok_or_else(|| Error::Inconsistent("dual norm has no sign change on the bisection bracket".into()))?;
        if !(root.residual <= CRITICAL_RESIDUAL) {
            return Err(Error::Inconsistent(format!("critical-drift bisection stalled at residual {}", root.residual)));
        }
        Ok(Some(CriticalLambda { lambda: root.x, residual: root.residual, steps: root.steps }))
    }

    /// `sup_x (h·x - J(x))` over the unit ball of the 1-norm.
    pub fn free_energy(&self, h: &[f64], f: Family) -> Result<FreeEnergy> {
        self.check_dim(h)?;
        let obj = |x: &[f64]| dot(h, x) - self.rate_of(f, x);
        if self.dim() == 1 {
            let (x, v) = golden_max(|t| obj(&[t]), -1.0, 1.0, 1e-12);
            let (x, v) = [(x, v), (0.0, 0.0), (-1.0, obj(&[-1.0])), (1.0, obj(&[1.0]))]
                .into_iter()
                .fold((0.0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
            return Ok(FreeEnergy { value: v, argmax: vec![x] });
        }
        let step = if self.dim() == 2 { 0.05 } else { 0.1 };
        let mut best = (vec![0.0; self.dim()], 0.0);
        for x in l1_ball_grid(self.dim(), step) {
            let v = obj(&x);
            if v > best.1 {
                best = (x, v);
            }
        }
        let (x, v) = compass_refine(&obj, best.0, best.1, step);
        Ok(FreeEnergy { value: v, argmax: x })
    }

    /// Grid points with `|h·x - J(x) - λ_h| <= ε`. Only meaningful in the
    /// ballistic regime.
    pub fn velocity_set(&self, h: &[f64], lambda_h: f64, eps: f64, step: f64) -> Result<Vec<Vec<f64>>> {
        self.check_dim(h)?;
        if !(lambda_h > 0.0) {
            return Err(Error::Precondition("the velocity set is defined in the ballistic regime only".into()));
        }
        let set: Vec<Vec<f64>> = l1_ball_grid(self.dim(), step)
            .into_iter()
            .filter(|x| (dot(h, x) - self.rate_of(Family::Mid, x) - lambda_h).abs() <= eps)
            .collect();
        if set.is_empty() {
            return Err(Error::NeedsRefinement(format!("velocity set empty at grid step {step} and ε = {eps}")));
        }
        Ok(set)
    }

    pub fn regime(&self, h: &[f64]) -> Result<(Regime, f64, f64)> {
        let dual0 = self.dual_norm(h, 0.0, Family::Mid)?;
        let spread = (self.dual_norm(h, 0.0, Family::Lower)? - self.dual_norm(h, 0.0, Family::Upper)?).abs();
        let slack = 0.5 * spread + 1e-9;
        let regime = if (dual0 - 1.0).abs() <= slack {
            Regime::Critical
        } else if dual0 > 1.0 {
            Regime::Ballistic
        } else {
            Regime::SubBallistic
        };
        Ok((regime, dual0, slack))
    }

    pub fn phase_report(&self, h: &[f64], velocity_step: Option<f64>) -> Result<PhaseReport> {
        let (regime, dual0, slack) = self.regime(h)?;
        let crit = if regime == Regime::Ballistic { self.critical_lambda(h, Family::Mid)? } else { None };
        let fe = self.free_energy(h, Family::Mid)?;
        // the larger norm family has the smaller free energy
        let f_lo = self.free_energy(h, Family::Upper)?.value;
        let f_hi = self.free_energy(h, Family::Lower)?.value;
        let tolerance = (f_hi - f_lo).abs() + 1e-6;
        let target = crit.map_or(0.0, |c| c.lambda.max(0.0));
        let identity_gap = (fe.value - target).abs();
        let (epsilon, velocity_set) = match crit {
            Some(c) => {
                let width = self.rate_value(&fe.argmax).map(|r| r.width()).unwrap_or(tolerance);
                let eps = (10.0 * width).max(1e-9).min(0.5 * c.lambda);
                let step = velocity_step.unwrap_or(if self.dim() == 1 { 1e-3 } else { 0.01 });
                (Some(eps), self.velocity_set(h, c.lambda, eps, step)?)
            }
            None => (None, Vec::new()),
        };
        Ok(PhaseReport {
            format_version: PHASE_FORMAT_VERSION,
            setting: self.setting.clone(),
            h: h.to_vec(),
            dual0,
            dual0_slack: slack,
            regime,
            lambda_h: crit.map(|c| c.lambda),
            lambda_h_residual: crit.map(|c| c.residual),
            free_energy: fe.value,
            free_energy_bracket: Bracket::new(f_lo.min(f_hi), f_hi.max(f_lo)),
            tolerance,
            identity_gap,
            identity_ok: identity_gap <= 10.0 * tolerance,
            epsilon,
            velocity_set,
        })
    }
}

/// Points of `step·Z^d` with `‖x‖₁ <= 1`, in lexicographic order.
pub fn l1_ball_grid(dim: usize, step: f64) -> Vec<Vec<f64>> {
    let m = (1.0 / step).round() as i64;
    let mut out = Vec::new();
    let mut cur = vec![0i64; dim];
    fn rec(i: usize, left: i64, m: i64, step: f64, cur: &mut Vec<i64>, out: &mut Vec<Vec<f64>>) {
        if i == cur.len() {
            out.push(cur.iter().map(|c| *c as f64 * step).collect());
            return;
        }
        for c in -left..=left {
            cur[i] = c;
            rec(i + 1, left - c.abs(), m, step, cur, out);
        }
    }
    rec(0, m, m, step, &mut cur, &mut out);
    out
}

fn compass_refine<F: Fn(&[f64]) -> f64>(obj: &F, mut x: Vec<f64>, mut v: f64, mut step: f64) -> (Vec<f64>, f64) {
    let d = x.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        for s in [-1.0, 1.0] {
            let mut e = vec![0.0; d];
            e[i] = s;
            dirs.push(e);
        }
        for j in i + 1..d {
            for (s, t) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut e = vec![0.0; d];
                e[i] = s;
                e[j] = t;
                dirs.push(e);
            }
        }
    }
    while step > 1e-10 {
        let mut moved = false;
        for e in &dirs {
            let y: Vec<f64> = x.iter().zip(e).map(|(a, b)| a + step * b).collect();
            if l1(&y) > 1.0 {
                continue;
            }
            let w = obj(&y);
            if w > v {
                x = y;
                v = w;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (x, v)
}

/// A-priori enclosure of the dual norm of a norm `N` with
/// `c₀‖x‖₁ <= N(x) <= c₁‖x‖₁`: `‖ℓ‖∞/c₁ <= N*(ℓ) <= ‖ℓ‖∞/c₀`.
pub fn dual_sandwich(ell: &[f64], c0: f64, c1: f64) -> Bracket {
    let linf = ell.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    Bracket::new(linf / c1, linf / c0)
}

/// `dual_sandwich` for `β_λ`: `c₀ = λ + φ(1)`, `c₁ = λ + log 2d + φ(1)`.
pub fn beta_dual_sandwich(ell: &[f64], lambda: f64, phi1: f64) -> Bracket {
    let d = ell.len() as f64;
    dual_sandwich(ell, lambda + phi1, lambda + (2.0 * d).ln() + phi1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperplaneRow {
    pub u: f64,
    /// Enclosure of `-(1/u) log E[exp(-λ H_ℓ(u) - Φ(H_ℓ(u)))]`.
    pub bracket: Bracket,
    pub oracle: &'static str,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperplaneReport {
    pub format_version: u32,
    pub ell: Vec<f64>,
    pub lambda: f64,
    pub rows: Vec<HyperplaneRow>,
    /// `1 / N*(ℓ)` of the supplied norm model.
    pub target: Option<f64>,
}

/// Two-point brackets for the half-spaces `{ℓ·x >= u}`, scaled by `1/u`.
pub fn point_to_hyperplane(
    ell: &[f64],
    lambda: f64,
    us: &[f64],
    setting: &Setting,
    model: Option<&NormModel>,
    cfg: &TwoPointConfig,
) -> Result<HyperplaneReport> {
    if let Some(u) = us.iter().find(|u| !(u.is_finite() && **u > 0.0)) {
        return Err(Error::InvalidInput(format!("hyperplane levels must be positive, got {u}")));
    }
    let inner = TwoPointConfig { exec: Exec::Sequential, ..*cfg };
    let rows = cfg.exec.map(us.to_vec(), |u| -> Result<HyperplaneRow> {
        let target = Target::HalfSpace { ell: ell.to_vec(), u };
        let r = two_point(setting, &target, lambda, &inner)?;
        Ok(HyperplaneRow { u, bracket: r.bracket.scale(1.0 / u), oracle: r.oracle, horizon: r.horizon })
    });
    let target = model.map(|m| 1.0 / m.dual(ell));
    Ok(HyperplaneReport {
        format_version: PHASE_FORMAT_VERSION,
        ell: ell.to_vec(),
        lambda,
        rows: rows.into_iter().collect::<Result<_>>()?,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticePoint;

    fn exact_1d(gamma: f64, lambdas: &[f64]) -> RateFunctionModel {
        let dirs = vec![LatticePoint(vec![-1]), LatticePoint(vec![1])];
        let models = lambdas
            .iter()
            .map(|l| {
                let v = gamma + l.exp().acosh();
                NormModel::new(*l, dirs.clone(), vec![v, v]).unwrap()
            })
            .collect();
        RateFunctionModel::exact("annealed", gamma, models).unwrap()
    }

    #[test]
    fn rate_value_basics() {
        let m = exact_1d(1.0, &default_lambda_grid());
        assert_eq!(m.rate_value(&[0.0]).unwrap().mid, 0.0);
        assert_eq!(m.rate_value(&[1.5]).unwrap().mid, f64::INFINITY);
        let r = m.rate_value(&[1.0]).unwrap();
        assert!(r.lower_estimate);
        let r = m.rate_value(&[0.5]).unwrap();
        assert!(r.lower <= r.mid && r.mid <= r.upper);
    }

    #[test]
    fn short_grid_is_refused() {
        let grid: Vec<f64> = (0..=8).map(|k| k as f64 * 0.125).collect();
        let m = exact_1d(1.0, &grid);
        assert!(matches!(m.rate_value(&[0.99]), Err(Error::GridTooShort { .. })));
    }

    #[test]
    fn ball_grid_counts() {
        assert_eq!(l1_ball_grid(1, 0.25).len(), 9);
        assert_eq!(l1_ball_grid(2, 0.5).len(), 13);
    }
}
