//! Exact depth-first enumeration of walk prefixes up to a horizon.
//!
//! The search tree is cut at a fixed depth; every subtree below the cut is
//! an independent task, and task results are merged in prefix order, so the
//! sums do not depend on how many workers ran them.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::lattice::{check_enumeration_budget, LatticePoint};
use crate::potential::{OneSitePotential, PotentialField};

use super::profile::HittingProfile;
use super::target::Target;

pub(crate) trait StepWeight: Clone + Send + Sync {
    /// Multiplicative weight for entering the site, `None` when its
    /// potential is unknown.
    fn enter(&mut self, idx: usize, coords: &[i64]) -> Option<f64>;
    fn leave(&mut self, idx: usize);
}

/// `exp(-(φ(l+1) - φ(l)))` per visit, tracking local times on the grid.
#[derive(Clone)]
pub(crate) struct AnnealedWeight {
    local: Vec<u32>,
    factor: Vec<f64>,
}

impl AnnealedWeight {
    pub(crate) fn new(phi: &OneSitePotential, sites: usize, horizon: usize) -> Self {
        let factor = (0..=horizon as u64).map(|l| (-(phi.at(l + 1) - phi.at(l))).exp()).collect();
        AnnealedWeight { local: vec![0; sites], factor }
    }
}

impl StepWeight for AnnealedWeight {
    #[inline]
    fn enter(&mut self, idx: usize, _coords: &[i64]) -> Option<f64> {
        let l = self.local[idx];
        self.local[idx] = l + 1;
        Some(self.factor[l as usize])
    }

    #[inline]
    fn leave(&mut self, idx: usize) {
        self.local[idx] -= 1;
    }
}

/// `exp(-V_x)` per visit; sites outside the field box are unknown.
#[derive(Clone)]
pub(crate) struct QuenchedWeight<'a> {
    field: &'a PotentialField,
    exp_neg: &'a [f64],
}

impl<'a> QuenchedWeight<'a> {
    pub(crate) fn new(field: &'a PotentialField, exp_neg: &'a [f64]) -> Self {
        QuenchedWeight { field, exp_neg }
    }
}

impl StepWeight for QuenchedWeight<'_> {
    #[inline]
    fn enter(&mut self, _idx: usize, coords: &[i64]) -> Option<f64> {
        self.field.index_of(coords).map(|i| self.exp_neg[i])
    }

    #[inline]
    fn leave(&mut self, _idx: usize) {}
}

pub(crate) fn exp_neg_values(field: &PotentialField) -> Vec<f64> {
    field.values().iter().map(|v| (-v).exp()).collect()
}

/// Grid on `{|x|_inf <= horizon}` with row-major strides.
#[derive(Clone)]
struct Grid {
    dim: usize,
    radius: i64,
    strides: Vec<usize>,
    sites: usize,
}

impl Grid {
    fn new(dim: usize, radius: usize) -> Self {
        let side = 2 * radius + 1;
        let strides = (0..dim).map(|a| side.pow(a as u32)).collect();
        Grid { dim, radius: radius as i64, strides, sites: side.pow(dim as u32) }
    }

    fn origin(&self) -> usize {
        self.strides.iter().map(|s| s * self.radius as usize).sum()
    }
}

fn split_depth(dim: usize) -> usize {
    if dim == 1 {
        6
    } else {
        3
    }
}

struct Walker<W> {
    grid: Grid,
    weight: W,
    coords: Vec<i64>,
    idx: usize,
}

impl<W: StepWeight> Walker<W> {
    fn new(grid: Grid, weight: W) -> Self {
        let idx = grid.origin();
        let coords = vec![0; grid.dim];
        Walker { grid, weight, coords, idx }
    }

    #[inline]
    fn step(&mut self, s: usize) {
        let axis = s / 2;
        if s % 2 == 1 {
            self.coords[axis] += 1;
            self.idx += self.grid.strides[axis];
        } else {
            self.coords[axis] -= 1;
            self.idx -= self.grid.strides[axis];
        }
    }

    #[inline]
    fn unstep(&mut self, s: usize) {
        self.step(s ^ 1);
    }
}

#[derive(Clone, Default)]
struct TargetAccum {
    hit: Vec<f64>,
    hit_count: Vec<u64>,
    survivor: f64,
    escape: Vec<f64>,
}

impl TargetAccum {
    fn new(horizon: usize) -> Self {
        TargetAccum { hit: vec![0.0; horizon + 1], hit_count: vec![0; horizon + 1], survivor: 0.0, escape: vec![0.0; horizon + 1] }
    }

    fn merge(&mut self, other: &TargetAccum) {
        for (a, b) in self.hit.iter_mut().zip(&other.hit) {
            *a += b;
        }
        for (a, b) in self.hit_count.iter_mut().zip(&other.hit_count) {
            *a += b;
        }
        for (a, b) in self.escape.iter_mut().zip(&other.escape) {
            *a += b;
        }
        self.survivor += other.survivor;
    }
}

struct TargetSearch<'t, W> {
    walker: Walker<W>,
    target: &'t Target,
    horizon: usize,
    acc: TargetAccum,
}

impl<W: StepWeight> TargetSearch<'_, W> {
    fn run(&mut self, t: usize, w: f64, cut: Option<usize>, path: &mut Vec<u8>, frontier: &mut Vec<(Vec<u8>, f64)>) {
        if t == self.horizon {
            self.acc.survivor += w;
            return;
        }
        if cut == Some(t) {
            frontier.push((path.clone(), w));
            return;
        }
        for s in 0..2 * self.walker.grid.dim {
            self.walker.step(s);
            let idx = self.walker.idx;
            match self.walker.weight.enter(idx, &self.walker.coords) {
                None => self.acc.escape[t + 1] += w,
                Some(f) => {
                    let w2 = w * f;
                    if self.target.hits(&self.walker.coords) {
                        self.acc.hit[t + 1] += w2;
                        self.acc.hit_count[t + 1] += 1;
                    } else if w2 > 0.0 {
                        path.push(s as u8);
                        self.run(t + 1, w2, cut, path, frontier);
                        path.pop();
                    }
                    self.walker.weight.leave(idx);
                }
            }
            self.walker.unstep(s);
        }
    }

    /// Replays a frontier prefix (known alive) so the search can continue
    /// below it.
    fn replay(&mut self, prefix: &[u8]) {
        for &s in prefix {
            self.walker.step(s as usize);
            let idx = self.walker.idx;
            self.walker.weight.enter(idx, &self.walker.coords);
        }
    }
}

fn target_profile_generic<W: StepWeight>(
    dim: usize,
    target: &Target,
    horizon: usize,
    weight: W,
    late_potential_floor: f64,
    oracle: &'static str,
    exec: Exec,
) -> HittingProfile {
    let grid = Grid::new(dim, horizon + 1);
    let cut = split_depth(dim);
    let cut = if cut < horizon { Some(cut) } else { None };
    let mut root = TargetSearch { walker: Walker::new(grid.clone(), weight.clone()), target, horizon, acc: TargetAccum::new(horizon) };
    let mut frontier = Vec::new();
    root.run(0, 1.0, cut, &mut Vec::new(), &mut frontier);
    let depth = cut.unwrap_or(0);
    let parts = exec.map(frontier, |(prefix, w)| {
        let mut task = TargetSearch { walker: Walker::new(grid.clone(), weight.clone()), target, horizon, acc: TargetAccum::new(horizon) };
        task.replay(&prefix);
        task.run(depth, w, None, &mut Vec::new(), &mut Vec::new());
        task.acc
    });
    let mut acc = root.acc;
    for p in &parts {
        acc.merge(p);
    }
    finish_target(dim, horizon, acc, late_potential_floor, oracle)
}

fn finish_target(dim: usize, horizon: usize, acc: TargetAccum, late_potential_floor: f64, oracle: &'static str) -> HittingProfile {
    let log_base = ((2 * dim) as f64).ln();
    let log_hit = acc.hit.iter().enumerate().map(|(t, h)| h.ln() - t as f64 * log_base).collect();
    let hit_prob: f64 = acc.hit_count.iter().enumerate().map(|(t, c)| *c as f64 * (-(t as f64) * log_base).exp()).sum();
    let log_escape = acc
        .escape
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > 0.0)
        .map(|(t, e)| (t, e.ln() - t as f64 * log_base))
        .collect();
    HittingProfile {
        horizon,
        log_hit,
        unhit_probability: Some((1.0 - hit_prob).max(0.0)),
        late_potential_floor,
        log_survivor: Some(acc.survivor.ln() - horizon as f64 * log_base),
        log_escape,
        oracle,
    }
}

/// Annealed hitting profile of a target by pruned enumeration.
pub fn annealed_target_profile(
    dim: usize,
    phi: &OneSitePotential,
    target: &Target,
    horizon: usize,
    budget: u128,
    exec: Exec,
) -> Result<HittingProfile> {
    target.validate(dim)?;
    if target.contains_origin(dim) {
        return Ok(HittingProfile::immediate("enumeration"));
    }
    check_enumeration_budget(dim, horizon, budget)?;
    let grid = Grid::new(dim, horizon + 1);
    let weight = AnnealedWeight::new(phi, grid.sites, horizon + 1);
    let floor = phi.at(horizon as u64 + 1).max(phi.phi1() * target.min_steps() as f64);
    Ok(target_profile_generic(dim, target, horizon, weight, floor, "enumeration", exec))
}

/// Quenched hitting profile by pruned enumeration; steps onto sites outside
/// the field box are accounted as escapes.
pub fn quenched_target_profile(
    field: &PotentialField,
    target: &Target,
    horizon: usize,
    budget: u128,
    exec: Exec,
) -> Result<HittingProfile> {
    let dim = field.dim();
    target.validate(dim)?;
    if target.contains_origin(dim) {
        return Ok(HittingProfile::immediate("enumeration"));
    }
    check_enumeration_budget(dim, horizon, budget)?;
    let exp_neg = exp_neg_values(field);
    let weight = QuenchedWeight::new(field, &exp_neg);
    Ok(target_profile_generic(dim, target, horizon, weight, 0.0, "enumeration", exec))
}

/// First-arrival profiles of every site within the horizon, from a single
/// unpruned enumeration (annealed).
#[derive(Debug, Clone)]
pub struct AllSiteProfiles {
    dim: usize,
    horizon: usize,
    phi: OneSitePotential,
    radius: usize,
    side: usize,
    /// `first[site * (horizon + 1) + t]`
    first: Vec<f64>,
    first_count: Vec<u64>,
}

#[derive(Clone)]
struct AllSitesAccum {
    first: Vec<f64>,
    first_count: Vec<u64>,
}

struct AllSitesSearch {
    walker: Walker<AnnealedWeight>,
    horizon: usize,
    origin: usize,
    acc: AllSitesAccum,
}

impl AllSitesSearch {
    fn run(&mut self, t: usize, w: f64, cut: Option<usize>, path: &mut Vec<u8>, frontier: &mut Vec<(Vec<u8>, f64)>) {
        if t == self.horizon {
            return;
        }
        if cut == Some(t) {
            frontier.push((path.clone(), w));
            return;
        }
        let stride = self.horizon + 1;
        for s in 0..2 * self.walker.grid.dim {
            self.walker.step(s);
            let idx = self.walker.idx;
            let fresh = self.walker.weight.local[idx] == 0 && idx != self.origin;
            let f = self.walker.weight.enter(idx, &[]).unwrap_or(0.0);
            let w2 = w * f;
            if fresh {
                self.acc.first[idx * stride + t + 1] += w2;
                self.acc.first_count[idx * stride + t + 1] += 1;
            }
            path.push(s as u8);
            self.run(t + 1, w2, cut, path, frontier);
            path.pop();
            self.walker.weight.leave(idx);
            self.walker.unstep(s);
        }
    }
}

impl AllSiteProfiles {
    pub fn compute(dim: usize, phi: &OneSitePotential, horizon: usize, budget: u128, exec: Exec) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        check_enumeration_budget(dim, horizon, budget)?;
        let radius = horizon;
        let grid = Grid::new(dim, radius);
        let weight = AnnealedWeight::new(phi, grid.sites, horizon + 1);
        let stride = horizon + 1;
        let fresh_acc = || AllSitesAccum { first: vec![0.0; grid.sites * stride], first_count: vec![0; grid.sites * stride] };
        let cut = split_depth(dim);
        let cut = if cut < horizon { Some(cut) } else { None };
        let origin = grid.origin();
        let mut root = AllSitesSearch { walker: Walker::new(grid.clone(), weight.clone()), horizon, origin, acc: fresh_acc() };
        let mut frontier = Vec::new();
        root.run(0, 1.0, cut, &mut Vec::new(), &mut frontier);
        let depth = cut.unwrap_or(0);
        let parts = exec.map(frontier, |(prefix, w)| {
            let mut task = AllSitesSearch { walker: Walker::new(grid.clone(), weight.clone()), horizon, origin, acc: fresh_acc() };
            for &s in &prefix {
                task.walker.step(s as usize);
                let idx = task.walker.idx;
                task.walker.weight.enter(idx, &[]);
            }
            task.run(depth, w, None, &mut Vec::new(), &mut Vec::new());
            task.acc
        });
        let mut acc = root.acc;
        for p in &parts {
            for (a, b) in acc.first.iter_mut().zip(&p.first) {
                *a += b;
            }
            for (a, b) in acc.first_count.iter_mut().zip(&p.first_count) {
                *a += b;
            }
        }
        Ok(AllSiteProfiles {
            dim,
            horizon,
            phi: *phi,
            radius,
            side: 2 * radius + 1,
            first: acc.first,
            first_count: acc.first_count,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn profile(&self, x: &LatticePoint) -> Result<HittingProfile> {
        if x.dim() != self.dim {
            return Err(Error::InvalidInput("target dimension mismatch".into()));
        }
        if x.is_origin() {
            return Ok(HittingProfile::immediate("enumeration_all_sites"));
        }
        let floor = self.phi.at(self.horizon as u64 + 1).max(self.phi.phi1() * x.l1() as f64);
        let log_base = ((2 * self.dim) as f64).ln();
        if x.linf() > self.radius as i64 {
            return Ok(HittingProfile {
                horizon: self.horizon,
                log_hit: vec![f64::NEG_INFINITY; self.horizon + 1],
                unhit_probability: Some(1.0),
                late_potential_floor: floor,
                log_survivor: None,
                log_escape: Vec::new(),
                oracle: "enumeration_all_sites",
            });
        }
        let r = self.radius as i64;
        let site = x.coords().iter().rev().fold(0usize, |acc, c| acc * self.side + (c + r) as usize);
        let stride = self.horizon + 1;
        let row = &self.first[site * stride..(site + 1) * stride];
        let counts = &self.first_count[site * stride..(site + 1) * stride];
        let log_hit = row.iter().enumerate().map(|(t, h)| h.ln() - t as f64 * log_base).collect();
        let hit_prob: f64 = counts.iter().enumerate().map(|(t, c)| *c as f64 * (-(t as f64) * log_base).exp()).sum();
        Ok(HittingProfile {
            horizon: self.horizon,
            log_hit,
            unhit_probability: Some((1.0 - hit_prob).max(0.0)),
            late_potential_floor: floor,
            log_survivor: None,
            log_escape: Vec::new(),
            oracle: "enumeration_all_sites",
        })
    }
}

struct EndpointSearch<W> {
    walker: Walker<W>,
    n: usize,
    acc: Vec<f64>,
}

impl<W: StepWeight> EndpointSearch<W> {
    fn run(&mut self, t: usize, w: f64, cut: Option<usize>, path: &mut Vec<u8>, frontier: &mut Vec<(Vec<u8>, f64)>) {
        if t == self.n {
            self.acc[self.walker.idx] += w;
            return;
        }
        if cut == Some(t) {
            frontier.push((path.clone(), w));
            return;
        }
        for s in 0..2 * self.walker.grid.dim {
            self.walker.step(s);
            let idx = self.walker.idx;
            if let Some(f) = self.walker.weight.enter(idx, &self.walker.coords) {
                let w2 = w * f;
                if w2 > 0.0 {
                    path.push(s as u8);
                    self.run(t + 1, w2, cut, path, frontier);
                    path.pop();
                }
                self.walker.weight.leave(idx);
            }
            self.walker.unstep(s);
        }
    }
}

fn endpoint_generic<W: StepWeight>(dim: usize, n: usize, weight: W, exec: Exec) -> Result<Vec<(LatticePoint, f64)>> {
    let grid = Grid::new(dim, n);
    let cut = split_depth(dim);
    let cut = if cut < n { Some(cut) } else { None };
    let mut root = EndpointSearch { walker: Walker::new(grid.clone(), weight.clone()), n, acc: vec![0.0; grid.sites] };
    let mut frontier = Vec::new();
    root.run(0, 1.0, cut, &mut Vec::new(), &mut frontier);
    let depth = cut.unwrap_or(0);
    let parts = exec.map(frontier, |(prefix, w)| {
        let mut task = EndpointSearch { walker: Walker::new(grid.clone(), weight.clone()), n, acc: vec![0.0; grid.sites] };
        for &s in &prefix {
            task.walker.step(s as usize);
            let idx = task.walker.idx;
            task.walker.weight.enter(idx, &task.walker.coords);
        }
        task.run(depth, w, None, &mut Vec::new(), &mut Vec::new());
        task.acc
    });
    let mut acc = root.acc;
    for p in &parts {
        for (a, b) in acc.iter_mut().zip(p) {
            *a += b;
        }
    }
    let log_base = n as f64 * ((2 * dim) as f64).ln();
    let side = 2 * n + 1;
    let mut out: Vec<(LatticePoint, f64)> = acc
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(i, w)| {
            let mut rest = i;
            let coords = (0..dim)
                .map(|_| {
                    let c = (rest % side) as i64 - n as i64;
                    rest /= side;
                    c
                })
                .collect();
            (LatticePoint(coords), w.ln() - log_base)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// `log Σ_{paths to y} (2d)^{-n} exp(-Φ(n))` for every reachable endpoint
/// `y`, by exhaustive enumeration.
pub fn annealed_endpoint_log_weights(
    dim: usize,
    phi: &OneSitePotential,
    n: usize,
    budget: u128,
    exec: Exec,
) -> Result<Vec<(LatticePoint, f64)>> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    check_enumeration_budget(dim, n, budget)?;
    let grid = Grid::new(dim, n);
    endpoint_generic(dim, n, AnnealedWeight::new(phi, grid.sites, n + 1), exec)
}

/// Quenched counterpart of [`annealed_endpoint_log_weights`]; the field box
/// must contain every site within distance `n`.
pub fn quenched_endpoint_log_weights(field: &PotentialField, n: usize, budget: u128, exec: Exec) -> Result<Vec<(LatticePoint, f64)>> {
    if field.radius() < n {
        return Err(Error::Precondition(format!("field box radius {} is smaller than n = {n}", field.radius())));
    }
    check_enumeration_budget(field.dim(), n, budget)?;
    let exp_neg = exp_neg_values(field);
    endpoint_generic(field.dim(), n, QuenchedWeight::new(field, &exp_neg), exec)
}
