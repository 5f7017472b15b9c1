//! Random environments, the concave one-site function φ, and the path
//! potentials Ψ (quenched) and Φ (annealed).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{local_times, local_times_between, LatticePoint, WalkPath};

pub const FIELD_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_SITE_BUDGET: usize = 1 << 24;

/// Law of a single site potential `V_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SiteDistribution {
    /// `P[V = 0] = p`, `P[V = v] = 1 - p`.
    BernoulliZero { p: f64, v: f64 },
    Exponential { rate: f64 },
    /// `P[V = 0] = p`, `P[V = +inf] = 1 - p`.
    BernoulliTrap { p: f64 },
}

impl SiteDistribution {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDistribution(m));
        match *self {
            SiteDistribution::BernoulliZero { p, v } => {
                if !(p.is_finite() && v.is_finite()) {
                    return bad("parameters must be finite".into());
                }
                if p >= 1.0 || v == 0.0 {
                    return bad(format!("point mass at 0 (p = {p}, v = {v}): V must be not trivially distributed"));
                }
                if p <= 0.0 {
                    return bad(format!("p = {p}: ess inf V = 0 requires P[V = 0] > 0"));
                }
                if v < 0.0 {
                    return bad(format!("v = {v}: potential must be nonnegative"));
                }
                Ok(())
            }
            SiteDistribution::Exponential { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return bad(format!("rate = {rate} must be positive and finite"));
                }
                Ok(())
            }
            SiteDistribution::BernoulliTrap { p } => {
                if !p.is_finite() {
                    return bad("p must be finite".into());
                }
                if p >= 1.0 {
                    return bad(format!("point mass at 0 (p = {p}): V must be not trivially distributed"));
                }
                if p <= 0.0 {
                    return bad(format!("p = {p}: ess inf V = 0 requires P[V = 0] > 0"));
                }
                Ok(())
            }
        }
    }

    /// `E V` (may be `+inf`).
    pub fn mean(&self) -> f64 {
        match *self {
            SiteDistribution::BernoulliZero { p, v } => (1.0 - p) * v,
            SiteDistribution::Exponential { rate } => 1.0 / rate,
            SiteDistribution::BernoulliTrap { .. } => f64::INFINITY,
        }
    }

    /// `E exp(-t V)` in closed form.
    pub fn laplace(&self, t: f64) -> f64 {
        match *self {
            SiteDistribution::BernoulliZero { p, v } => p + (1.0 - p) * (-t * v).exp(),
            SiteDistribution::Exponential { rate } => rate / (rate + t),
            SiteDistribution::BernoulliTrap { p } => {
                if t > 0.0 {
                    p
                } else {
                    1.0
                }
            }
        }
    }

    /// `P[V = 0]`, if positive.
    pub fn zero_probability(&self) -> Option<f64> {
        match *self {
            SiteDistribution::BernoulliZero { p, .. } | SiteDistribution::BernoulliTrap { p } => Some(p),
            SiteDistribution::Exponential { .. } => None,
        }
    }

    /// Inverse CDF at `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            SiteDistribution::BernoulliZero { p, v } => {
                if u < p {
                    0.0
                } else {
                    v
                }
            }
            SiteDistribution::Exponential { rate } => -(1.0 - u).ln() / rate,
            SiteDistribution::BernoulliTrap { p } => {
                if u < p {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

/// The concave one-site function φ acting on local times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OneSitePotential {
    /// `φ(t) = γ` for `t > 0`.
    HardObstacle { gamma: f64 },
    /// `φ(t) = c t^a`.
    PowerLaw { c: f64, a: f64 },
    /// `φ(t) = c min(t, cap)`.
    Capped { c: f64, cap: f64 },
    /// `φ_V(t) = -log E exp(-t V)`.
    FromDistribution { dist: SiteDistribution },
}

/// The grid `{0, 1/2, 1, 2, 4, ..., 2^20}` used to test concavity and
/// sublinearity.
pub fn validation_grid() -> Vec<f64> {
    let mut g = vec![0.0, 0.5];
    g.extend((0..=20).map(|k| (1u64 << k) as f64));
    g
}

/// `φ(T)/T` at the end of the grid must have dropped to this fraction of `φ(1)`.
pub const SUBLINEARITY_RATIO: f64 = 0.9;

impl OneSitePotential {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            OneSitePotential::HardObstacle { gamma } => gamma,
            OneSitePotential::PowerLaw { c, a } => c * t.powf(a),
            OneSitePotential::Capped { c, cap } => c * t.min(cap),
            OneSitePotential::FromDistribution { dist } => -dist.laplace(t).ln(),
        }
    }

    pub fn at(&self, count: u64) -> f64 {
        self.eval(count as f64)
    }

    pub fn phi1(&self) -> f64 {
        self.eval(1.0)
    }

    /// If φ is constant on `t >= 1`, returns that constant: Φ then only
    /// counts distinct visited sites, which the range DP exploits.
    pub fn range_cost(&self) -> Option<f64> {
        match *self {
            OneSitePotential::HardObstacle { gamma } => Some(gamma),
            OneSitePotential::Capped { c, cap } if cap <= 1.0 => Some(c * cap),
            OneSitePotential::FromDistribution { dist: SiteDistribution::BernoulliTrap { p } } => {
                Some(-p.ln())
            }
            _ => None,
        }
    }

    /// Checks the assumptions on φ on the validation grid, naming the first
    /// failing test.
    pub fn validate(&self) -> Result<()> {
        let fail = |test: &'static str, detail: String| Err(Error::InvalidPotential { test, detail });
        match *self {
            OneSitePotential::HardObstacle { gamma } if !(gamma.is_finite() && gamma > 0.0) => {
                return fail("parameter", format!("gamma = {gamma} must be positive and finite"))
            }
            OneSitePotential::PowerLaw { c, a } if !(c.is_finite() && c > 0.0 && a.is_finite() && a > 0.0) => {
                return fail("parameter", format!("power law needs c > 0 and a > 0 (c = {c}, a = {a})"))
            }
            OneSitePotential::Capped { c, cap } if !(c.is_finite() && c > 0.0 && cap.is_finite() && cap > 0.0) => {
                return fail("parameter", format!("capped law needs c > 0 and cap > 0 (c = {c}, cap = {cap})"))
            }
            OneSitePotential::FromDistribution { dist } => {
                if let Err(e) = dist.validate() {
                    return fail("distribution", e.to_string());
                }
            }
            _ => {}
        }
        let grid = validation_grid();
        let vals: Vec<f64> = grid.iter().map(|t| self.eval(*t)).collect();
        if vals[0] != 0.0 {
            return fail("phi(0) = 0", format!("phi(0) = {}", vals[0]));
        }
        if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return fail("nonnegative", "phi takes a negative or non-finite value on the grid".into());
        }
        if *vals.last().unwrap() <= 0.0 {
            return fail("non-constant", "phi vanishes on the grid".into());
        }
        for w in 0..grid.len() - 1 {
            if vals[w + 1] < vals[w] {
                return fail("nondecreasing", format!("phi({}) > phi({})", grid[w], grid[w + 1]));
            }
        }
        for i in 0..grid.len() {
            for j in i + 1..grid.len() {
                let (s, t) = (grid[i], grid[j]);
                let mid = self.eval(0.5 * (s + t));
                let avg = 0.5 * (vals[i] + vals[j]);
                if mid < avg - 1e-12 * avg.abs().max(1.0) {
                    return fail("midpoint concavity", format!("phi(({s} + {t})/2) = {mid} < {avg}"));
                }
            }
        }
        for w in 2..grid.len() - 1 {
            let (r0, r1) = (vals[w] / grid[w], vals[w + 1] / grid[w + 1]);
            if r1 > r0 * (1.0 + 1e-12) {
                return fail("sublinearity", format!("phi(t)/t increases between t = {} and {}", grid[w], grid[w + 1]));
            }
        }
        let t_end = *grid.last().unwrap();
        let ratio = vals.last().unwrap() / t_end;
        if ratio > SUBLINEARITY_RATIO * self.phi1() {
            return fail(
                "sublinearity",
                format!("phi(T)/T = {ratio} at T = {t_end} does not decay (phi(1) = {})", self.phi1()),
            );
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        match *self {
            OneSitePotential::HardObstacle { gamma } => format!("hard_obstacle(gamma={gamma})"),
            OneSitePotential::PowerLaw { c, a } => format!("power_law(c={c},a={a})"),
            OneSitePotential::Capped { c, cap } => format!("capped(c={c},cap={cap})"),
            OneSitePotential::FromDistribution { dist } => format!("phi_V({})", dist_label(&dist)),
        }
    }
}

pub fn dist_label(dist: &SiteDistribution) -> String {
    match *dist {
        SiteDistribution::BernoulliZero { p, v } => format!("bernoulli_zero(p={p},v={v})"),
        SiteDistribution::Exponential { rate } => format!("exponential(rate={rate})"),
        SiteDistribution::BernoulliTrap { p } => format!("bernoulli_trap(p={p})"),
    }
}

/// `φ_V` for a validated site distribution.
pub fn phi_from_distribution(dist: SiteDistribution) -> Result<OneSitePotential> {
    dist.validate()?;
    let phi = OneSitePotential::FromDistribution { dist };
    phi.validate()?;
    Ok(phi)
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the generator drawing `V_x`: the coordinates hash-combined with
/// the master seed. Overlapping boxes therefore see identical values.
pub fn site_seed(seed: u64, coords: &[i64]) -> u64 {
    let mut h = splitmix64(seed ^ (coords.len() as u64).wrapping_mul(0xd6e8_feb8_6659_fd93));
    for &c in coords {
        h = splitmix64(h ^ (c as u64));
    }
    h
}

pub fn draw_site(dist: &SiteDistribution, seed: u64, coords: &[i64]) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(site_seed(seed, coords));
    dist.quantile(rng.gen::<f64>())
}

/// Where the values of a field come from.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    Sampled { dist: SiteDistribution, seed: u64 },
    /// Hand-built test fields (constant or constructed site by site).
    Custom { label: String },
}

/// Serializable header; values are regenerated from it, never stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub format_version: u32,
    pub dim: usize,
    pub radius: usize,
    pub site_dist: SiteDistribution,
    pub seed: u64,
}

/// A boxed realization of the site potentials on `{|x|_inf <= radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    dim: usize,
    radius: usize,
    source: FieldSource,
    values: Vec<f64>,
}

impl PotentialField {
    fn check_box(dim: usize, radius: usize, budget: usize) -> Result<usize> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        let side = 2 * radius + 1;
        let sites = (side as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
        if sites > budget as u128 {
            return Err(Error::BudgetExceeded { what: "field sites", needed: sites, budget: budget as u128 });
        }
        Ok(sites as usize)
    }

    pub fn sample(dim: usize, radius: usize, dist: SiteDistribution, seed: u64) -> Result<Self> {
        Self::sample_with_budget(dim, radius, dist, seed, DEFAULT_SITE_BUDGET)
    }

    pub fn sample_with_budget(
        dim: usize,
        radius: usize,
        dist: SiteDistribution,
        seed: u64,
        budget: usize,
    ) -> Result<Self> {
        dist.validate()?;
        let sites = Self::check_box(dim, radius, budget)?;
        let mut field = PotentialField { dim, radius, source: FieldSource::Sampled { dist, seed }, values: Vec::new() };
        field.values = (0..sites).map(|i| draw_site(&dist, seed, &field.coords_of(i))).collect();
        Ok(field)
    }

    pub fn constant(dim: usize, radius: usize, value: f64) -> Result<Self> {
        Self::from_fn(dim, radius, format!("constant({value})"), |_| value)
    }

    pub fn from_fn<F: Fn(&[i64]) -> f64>(dim: usize, radius: usize, label: String, f: F) -> Result<Self> {
        let sites = Self::check_box(dim, radius, DEFAULT_SITE_BUDGET)?;
        let mut field = PotentialField { dim, radius, source: FieldSource::Custom { label }, values: Vec::new() };
        let values: Vec<f64> = (0..sites).map(|i| f(&field.coords_of(i))).collect();
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidInput("field values must be nonnegative".into()));
        }
        field.values = values;
        Ok(field)
    }

    pub fn from_header(header: &FieldHeader) -> Result<Self> {
        if header.format_version != FIELD_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!("unsupported field format version {}", header.format_version)));
        }
        Self::sample(header.dim, header.radius, header.site_dist, header.seed)
    }

    pub fn header(&self) -> Option<FieldHeader> {
        match self.source {
            FieldSource::Sampled { dist, seed } => Some(FieldHeader {
                format_version: FIELD_FORMAT_VERSION,
                dim: self.dim,
                radius: self.radius,
                site_dist: dist,
                seed,
            }),
            FieldSource::Custom { .. } => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn source(&self) -> &FieldSource {
        &self.source
    }

    pub fn label(&self) -> String {
        match &self.source {
            FieldSource::Sampled { dist, seed } => format!("field({},seed={seed})", dist_label(dist)),
            FieldSource::Custom { label } => label.clone(),
        }
    }

    pub fn site_count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn coords_of(&self, mut index: usize) -> Vec<i64> {
        let side = self.side();
        (0..self.dim)
            .map(|_| {
                let c = (index % side) as i64 - self.radius as i64;
                index /= side;
                c
            })
            .collect()
    }

    pub fn index_of(&self, coords: &[i64]) -> Option<usize> {
        let r = self.radius as i64;
        let side = self.side();
        let mut idx = 0usize;
        for &c in coords.iter().rev() {
            if c < -r || c > r {
                return None;
            }
            idx = idx * side + (c + r) as usize;
        }
        Some(idx)
    }

    pub fn contains(&self, x: &LatticePoint) -> bool {
        x.dim() == self.dim && x.linf() <= self.radius as i64
    }

    pub fn value_at(&self, coords: &[i64]) -> Result<f64> {
        self.index_of(coords)
            .map(|i| self.values[i])
            .ok_or_else(|| Error::OutsideBox { site: LatticePoint(coords.to_vec()).to_string(), radius: self.radius })
    }

    pub fn value(&self, x: &LatticePoint) -> Result<f64> {
        self.value_at(x.coords())
    }

    pub fn zero_fraction(&self) -> f64 {
        self.values.iter().filter(|v| **v == 0.0).count() as f64 / self.values.len() as f64
    }
}

pub fn sample_field(dim: usize, radius: usize, dist: SiteDistribution, seed: u64) -> Result<PotentialField> {
    PotentialField::sample(dim, radius, dist, seed)
}

/// `Ψ(n, ω) = Σ_x l_x(n) V_x(ω)`; errors if the path leaves the box.
pub fn quenched_weight(path: &WalkPath, field: &PotentialField) -> Result<f64> {
    quenched_weight_between(path, field, 0, path.len())
}

/// Quenched weight of the segment `m+1..=n`.
pub fn quenched_weight_between(path: &WalkPath, field: &PotentialField, m: usize, n: usize) -> Result<f64> {
    if path.dim() != field.dim() {
        return Err(Error::InvalidInput("path and field dimensions differ".into()));
    }
    let mut total = 0.0;
    for p in path.positions().iter().take(n + 1).skip(m + 1) {
        total += field.value(p)?;
    }
    Ok(total)
}

/// `Φ(n) = Σ_x φ(l_x(n))`.
pub fn annealed_weight(path: &WalkPath, phi: &OneSitePotential) -> f64 {
    local_times(path).visits.values().map(|l| phi.at(*l)).sum()
}

/// `Φ(m, n) = Σ_x φ(l_x(n) - l_x(m))`.
pub fn annealed_increment(path: &WalkPath, phi: &OneSitePotential, m: usize, n: usize) -> Result<f64> {
    if m > n || n > path.len() {
        return Err(Error::InvalidInput(format!("need 0 <= m <= n <= {} (m = {m}, n = {n})", path.len())));
    }
    Ok(local_times_between(path, m, n).visits.values().map(|l| phi.at(*l)).sum())
}

/// `Φ(m)` for the prefix of length `m`.
pub fn annealed_weight_prefix(path: &WalkPath, phi: &OneSitePotential, m: usize) -> f64 {
    annealed_weight(&path.prefix(m), phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::enumerate_paths;

    fn p1(signs: &[i64]) -> WalkPath {
        WalkPath::from_signs_1d(signs).unwrap()
    }

    /// Composite Simpson on [0, cutoff]; the integrand decays like e^{-r v}.
    fn laplace_by_quadrature(rate: f64, t: f64) -> f64 {
        let cutoff = 60.0 / rate;
        let m = 200_000;
        let h = cutoff / m as f64;
        let f = |v: f64| (-t * v).exp() * rate * (-rate * v).exp();
        let mut s = f(0.0) + f(cutoff);
        for i in 1..m {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn trap_phi_is_minus_log_p() {
        let phi = phi_from_distribution(SiteDistribution::BernoulliTrap { p: 0.3 }).unwrap();
        assert_eq!(phi.eval(0.0), 0.0);
        for t in [0.5, 1.0, 7.0] {
            assert!((phi.eval(t) + 0.3f64.ln()).abs() < 1e-15);
        }
        assert_eq!(phi.range_cost(), Some(-0.3f64.ln()));
    }

    #[test]
    fn point_mass_rejected() {
        let err = phi_from_distribution(SiteDistribution::BernoulliZero { p: 1.0, v: 1.0 }).unwrap_err();
        assert!(err.to_string().contains("not trivially distributed"), "{err}");
        assert!(SiteDistribution::BernoulliZero { p: 0.5, v: 0.0 }.validate().is_err());
        assert!(sample_field(1, 5, SiteDistribution::BernoulliZero { p: 1.0, v: 1.0 }, 1).is_err());
    }

    #[test]
    fn exponential_phi_matches_quadrature() {
        let rate = 1.5;
        let phi = phi_from_distribution(SiteDistribution::Exponential { rate }).unwrap();
        for t in [1.0, 2.0, 5.0] {
            let oracle = -laplace_by_quadrature(rate, t).ln();
            assert!((phi.eval(t) - oracle).abs() < 1e-9, "t={t}: {} vs {oracle}", phi.eval(t));
            assert!((phi.eval(t) - ((rate + t) / rate).ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn catalog_passes_validation_and_linear_fails() {
        for phi in [
            OneSitePotential::HardObstacle { gamma: 1.0 },
            OneSitePotential::PowerLaw { c: 1.0, a: 0.5 },
            OneSitePotential::Capped { c: 0.7, cap: 3.0 },
            OneSitePotential::FromDistribution { dist: SiteDistribution::BernoulliZero { p: 0.4, v: 2.0 } },
            OneSitePotential::FromDistribution { dist: SiteDistribution::Exponential { rate: 2.0 } },
        ] {
            phi.validate().unwrap_or_else(|e| panic!("{phi:?}: {e}"));
        }
        let err = OneSitePotential::PowerLaw { c: 1.0, a: 1.0 }.validate().unwrap_err();
        assert!(matches!(err, Error::InvalidPotential { test: "sublinearity", .. }), "{err}");
        let err = OneSitePotential::PowerLaw { c: 1.0, a: 1.5 }.validate().unwrap_err();
        assert!(matches!(err, Error::InvalidPotential { test: "midpoint concavity", .. }), "{err}");
    }

    #[test]
    fn field_is_reproducible_and_boxes_agree() {
        let dist = SiteDistribution::BernoulliZero { p: 0.5, v: 1.0 };
        let a = sample_field(2, 4, dist, 99).unwrap();
        let b = sample_field(2, 4, dist, 99).unwrap();
        assert_eq!(a, b);
        let big = sample_field(2, 7, dist, 99).unwrap();
        for i in 0..a.site_count() {
            let c = a.coords_of(i);
            assert_eq!(a.value_at(&c).unwrap(), big.value_at(&c).unwrap());
        }
        let other = sample_field(2, 4, dist, 100).unwrap();
        assert_ne!(a.values(), other.values());
        let header = a.header().unwrap();
        let json = serde_json::to_string(&header).unwrap();
        let back: FieldHeader = serde_json::from_str(&json).unwrap();
        assert_eq!(PotentialField::from_header(&back).unwrap(), a);
    }

    #[test]
    fn zero_fraction_within_binomial_bound() {
        let dist = SiteDistribution::BernoulliZero { p: 0.5, v: 1.0 };
        let f = sample_field(1, 50, dist, 5).unwrap();
        assert_eq!(f.site_count(), 101);
        assert!((f.zero_fraction() - 0.5).abs() <= 0.2);
        let big = sample_field(2, 100, dist, 5).unwrap();
        let n = big.site_count() as f64;
        assert!((big.zero_fraction() - 0.5).abs() <= 4.0 * (0.25 / n).sqrt());
    }

    #[test]
    fn site_budget_refusal() {
        let dist = SiteDistribution::Exponential { rate: 1.0 };
        let err = PotentialField::sample_with_budget(3, 50, dist, 1, 1000).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn quenched_weight_examples() {
        let zero = PotentialField::constant(1, 5, 0.0).unwrap();
        assert_eq!(quenched_weight(&p1(&[1, -1, -1]), &zero).unwrap(), 0.0);
        let f = PotentialField::from_fn(1, 3, "test".into(), |c| if c[0] == 1 { 0.7 } else { 0.0 }).unwrap();
        assert_eq!(quenched_weight(&p1(&[1]), &f).unwrap(), 0.7);
        let one = PotentialField::constant(1, 5, 1.0).unwrap();
        assert_eq!(quenched_weight(&p1(&[1, 1, -1, 1]), &one).unwrap(), 4.0);
        let err = quenched_weight(&p1(&[1, 1, 1, 1, 1, 1]), &one).unwrap_err();
        assert!(matches!(err, Error::OutsideBox { .. }));
        let trap = PotentialField::from_fn(1, 3, "trap".into(), |c| if c[0] == 2 { f64::INFINITY } else { 0.0 }).unwrap();
        assert_eq!(quenched_weight(&p1(&[1, 1]), &trap).unwrap(), f64::INFINITY);
        assert_eq!((-quenched_weight(&p1(&[1, 1]), &trap).unwrap()).exp(), 0.0);
    }

    #[test]
    fn annealed_weight_examples() {
        let gamma = 1.3;
        let hard = OneSitePotential::HardObstacle { gamma };
        assert!((annealed_weight(&p1(&[1, -1, 1, -1]), &hard) - 2.0 * gamma).abs() < 1e-15);
        let pl = OneSitePotential::PowerLaw { c: 1.0, a: 0.5 };
        assert!((annealed_weight(&p1(&[1, -1, 1, -1]), &pl) - 2.0 * pl.eval(2.0)).abs() < 1e-15);
        let path = p1(&[1, -1, 1]);
        let split = annealed_weight_prefix(&path, &pl, 1) + annealed_increment(&path, &pl, 1, 3).unwrap();
        assert!(annealed_weight(&path, &pl) <= split + 1e-15);
        assert!(annealed_increment(&path, &pl, 2, 1).is_err());
    }

    #[test]
    fn quenched_weight_is_additive_over_segments() {
        let dist = SiteDistribution::Exponential { rate: 1.0 };
        let f = sample_field(1, 8, dist, 3).unwrap();
        for path in enumerate_paths(1, 8).unwrap().iter() {
            let total = quenched_weight(&path, &f).unwrap();
            for m in 0..=8 {
                let a = quenched_weight_between(&path, &f, 0, m).unwrap();
                let b = quenched_weight_between(&path, &f, m, 8).unwrap();
                assert!((total - a - b).abs() <= 1e-12 * total.max(1.0));
            }
        }
    }
}
