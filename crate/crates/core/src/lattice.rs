//! Nearest-neighbor paths on Z^d: construction, exhaustive enumeration,
//! seeded sampling, and the path functionals (local times, hitting times,
//! half-space entrance times).

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default enumeration budget in weighted path-steps, `(2d)^n * max(n, 1)`.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticePoint(pub Vec<i64>);

impl LatticePoint {
    pub fn origin(dim: usize) -> Self {
        LatticePoint(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize, sign: i64) -> Self {
        let mut c = vec![0; dim];
        c[axis] = sign;
        LatticePoint(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn l1(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn linf(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn is_origin(&self) -> bool {
        self.0.iter().all(|c| *c == 0)
    }

    pub fn scaled(&self, k: i64) -> Self {
        LatticePoint(self.0.iter().map(|c| c * k).collect())
    }

    pub fn add(&self, other: &LatticePoint) -> Self {
        LatticePoint(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> Self {
        LatticePoint(self.0.iter().map(|c| -c).collect())
    }

    pub fn dot(&self, ell: &[f64]) -> f64 {
        self.0.iter().zip(ell).map(|(c, l)| *c as f64 * l).sum()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|c| *c as f64).collect()
    }

    /// gcd of the coordinates equals one.
    pub fn is_primitive(&self) -> bool {
        fn gcd(a: i64, b: i64) -> i64 {
            if b == 0 {
                a.abs()
            } else {
                gcd(b, a % b)
            }
        }
        self.0.iter().fold(0, |g, c| gcd(g, *c)) == 1
    }

    /// Coordinates joined by ';', the CSV representation.
    pub fn joined(&self) -> String {
        self.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
    }

    /// All lattice points with `|x|_1 <= radius`, in lexicographic order.
    pub fn l1_ball(dim: usize, radius: i64) -> Vec<LatticePoint> {
        let mut out = Vec::new();
        let mut cur = vec![0i64; dim];
        fn rec(axis: usize, left: i64, radius: i64, cur: &mut Vec<i64>, out: &mut Vec<LatticePoint>) {
            if axis == cur.len() {
                out.push(LatticePoint(cur.clone()));
                return;
            }
            for c in -left..=left {
                cur[axis] = c;
                rec(axis + 1, left - c.abs(), radius, cur, out);
            }
            cur[axis] = 0;
        }
        rec(0, radius, radius, &mut cur, &mut out);
        out
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
    }
}

/// A signed unit step. Steps are ordered by `(axis, sign)` ascending; the
/// index `2 * axis + (sign > 0)` realises that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Step {
    pub axis: u8,
    pub positive: bool,
}

impl Step {
    pub fn from_index(k: usize) -> Step {
        Step { axis: (k / 2) as u8, positive: k % 2 == 1 }
    }

    pub fn index(self) -> usize {
        2 * self.axis as usize + self.positive as usize
    }

    pub fn sign(self) -> i64 {
        if self.positive {
            1
        } else {
            -1
        }
    }
}

/// A finite nearest-neighbor path started at the origin.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WalkPath {
    dim: usize,
    steps: Vec<Step>,
}

impl WalkPath {
    pub fn new(dim: usize, steps: Vec<Step>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if let Some(s) = steps.iter().find(|s| s.axis as usize >= dim) {
            return Err(Error::InvalidInput(format!("step on axis {} in dimension {dim}", s.axis)));
        }
        Ok(WalkPath { dim, steps })
    }

    /// Path from a list of signed unit increments `±1` in dimension one.
    pub fn from_signs_1d(signs: &[i64]) -> Result<Self> {
        let steps = signs
            .iter()
            .map(|s| match s {
                1 => Ok(Step { axis: 0, positive: true }),
                -1 => Ok(Step { axis: 0, positive: false }),
                _ => Err(Error::InvalidInput(format!("1d step must be +1 or -1, got {s}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        WalkPath::new(1, steps)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// `S(0), ..., S(n)`.
    pub fn positions(&self) -> Vec<LatticePoint> {
        let mut cur = vec![0i64; self.dim];
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(LatticePoint(cur.clone()));
        for s in &self.steps {
            cur[s.axis as usize] += s.sign();
            out.push(LatticePoint(cur.clone()));
        }
        out
    }

    pub fn endpoint(&self) -> LatticePoint {
        let mut cur = vec![0i64; self.dim];
        for s in &self.steps {
            cur[s.axis as usize] += s.sign();
        }
        LatticePoint(cur)
    }

    pub fn prefix(&self, m: usize) -> WalkPath {
        WalkPath { dim: self.dim, steps: self.steps[..m.min(self.steps.len())].to_vec() }
    }

    pub fn extended(&self, more: &[Step]) -> WalkPath {
        let mut steps = self.steps.clone();
        steps.extend_from_slice(more);
        WalkPath { dim: self.dim, steps }
    }
}

/// Visit counts `l_x(n)` over times `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OccupationProfile {
    pub visits: BTreeMap<LatticePoint, u64>,
}

impl OccupationProfile {
    pub fn total(&self) -> u64 {
        self.visits.values().sum()
    }

    pub fn get(&self, x: &LatticePoint) -> u64 {
        self.visits.get(x).copied().unwrap_or(0)
    }

    pub fn distinct_sites(&self) -> usize {
        self.visits.len()
    }
}

pub fn local_times(path: &WalkPath) -> OccupationProfile {
    local_times_between(path, 0, path.len())
}

/// Visits during times `m+1..=n`, i.e. `l_x(n) - l_x(m)`.
pub fn local_times_between(path: &WalkPath, m: usize, n: usize) -> OccupationProfile {
    let mut visits = BTreeMap::new();
    for p in path.positions().into_iter().take(n + 1).skip(m + 1) {
        *visits.entry(p).or_insert(0) += 1;
    }
    OccupationProfile { visits }
}

/// `H(x) = min{m >= 0 : S(m) = x}` within the path.
pub fn first_hitting(path: &WalkPath, x: &LatticePoint) -> Option<usize> {
    path.positions().iter().position(|p| p == x)
}

/// `H(x, z) = min{m >= H(x) : S(m) = z}`.
pub fn first_hitting_after(path: &WalkPath, x: &LatticePoint, z: &LatticePoint) -> Option<usize> {
    let hx = first_hitting(path, x)?;
    path.positions().iter().skip(hx).position(|p| p == z).map(|k| k + hx)
}

/// `H_ℓ(u) = min{m >= 0 : ℓ·S(m) >= u}`.
pub fn halfspace_hitting(path: &WalkPath, ell: &[f64], u: f64) -> Result<Option<usize>> {
    if ell.len() != path.dim() {
        return Err(Error::InvalidInput("direction dimension mismatch".into()));
    }
    if ell.iter().all(|l| *l == 0.0) {
        return Err(Error::InvalidInput("half-space direction must be nonzero".into()));
    }
    Ok(path.positions().iter().position(|p| p.dot(ell) >= u))
}

/// Weighted path-steps needed to enumerate all paths of length `n`.
pub fn enumeration_cost(dim: usize, n: usize) -> u128 {
    let base = (2 * dim) as u128;
    base.checked_pow(n as u32).and_then(|c| c.checked_mul(n.max(1) as u128)).unwrap_or(u128::MAX)
}

pub fn check_enumeration_budget(dim: usize, n: usize, budget: u128) -> Result<()> {
    let needed = enumeration_cost(dim, n);
    if needed > budget {
        return Err(Error::BudgetExceeded { what: "path enumeration", needed, budget });
    }
    Ok(())
}

/// Exhaustive, index-addressable enumeration of all `(2d)^n` paths.
///
/// Path `i` has its first step as the most significant base-`2d` digit, so
/// iteration order is lexicographic in the step order.
#[derive(Debug, Clone)]
pub struct PathEnumeration {
    dim: usize,
    len: usize,
    count: u64,
}

impl PathEnumeration {
    pub fn new(dim: usize, len: usize, budget: u128) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        check_enumeration_budget(dim, len, budget)?;
        Ok(PathEnumeration { dim, len, count: ((2 * dim) as u64).pow(len as u32) })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Probability of each path under the uniform measure.
    pub fn path_probability(&self) -> f64 {
        ((2 * self.dim) as f64).powi(-(self.len as i32))
    }

    pub fn path_at(&self, mut index: u64) -> WalkPath {
        let base = (2 * self.dim) as u64;
        let mut steps = vec![Step::from_index(0); self.len];
        for slot in steps.iter_mut().rev() {
            *slot = Step::from_index((index % base) as usize);
            index /= base;
        }
        WalkPath { dim: self.dim, steps }
    }

    pub fn iter(&self) -> impl Iterator<Item = WalkPath> + '_ {
        self.range(0, self.count)
    }

    /// Paths with index in `start..end`, for range-partitioned consumption.
    pub fn range(&self, start: u64, end: u64) -> impl Iterator<Item = WalkPath> + '_ {
        (start..end.min(self.count)).map(move |i| self.path_at(i))
    }
}

pub fn enumerate_paths(dim: usize, n: usize) -> Result<PathEnumeration> {
    PathEnumeration::new(dim, n, DEFAULT_ENUMERATION_BUDGET)
}

/// Uniform random path; identical `(dim, n, seed)` reproduce the same path.
pub fn sample_path(dim: usize, n: usize, seed: u64) -> Result<WalkPath> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let steps = (0..n).map(|_| Step::from_index(rng.gen_range(0..2 * dim))).collect();
    WalkPath::new(dim, steps)
}
