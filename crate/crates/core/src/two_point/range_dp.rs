//! Exact one-dimensional oracle for potentials that only charge the range.
//!
//! When φ is constant on `t >= 1`, `Φ(n)` is that constant times the number
//! of distinct sites among `S_1..S_n`, so the state `(leftmost, rightmost,
//! position)` carries everything the weight depends on.

use crate::error::{Error, Result};
use crate::numerics::log_sum_exp;
use crate::potential::OneSitePotential;

use super::profile::HittingProfile;

/// Cell-updates budget of a single range DP run.
pub const RANGE_DP_BUDGET: u128 = 1 << 31;

/// Compact storage of `(L, R, pos)` with `L <= pos <= R`, `lmin <= L`,
/// `R <= rmax` and `R - L < max_width`.
struct Layout {
    lmin: i64,
    lmax: i64,
    rmin: i64,
    rmax: i64,
    nr: usize,
    offset: Vec<usize>,
    cells: usize,
}

const NONE: usize = usize::MAX;

impl Layout {
    fn new(lmin: i64, lmax: i64, rmin: i64, rmax: i64, max_width: i64) -> Self {
        let nl = (lmax - lmin + 1).max(0) as usize;
        let nr = (rmax - rmin + 1).max(0) as usize;
        let mut offset = vec![NONE; nl * nr];
        let mut cells = 0usize;
        for l in lmin..=lmax {
            for r in rmin..=rmax {
                if r >= l && r - l < max_width {
                    offset[(l - lmin) as usize * nr + (r - rmin) as usize] = cells;
                    cells += (r - l + 1) as usize;
                }
            }
        }
        Layout { lmin, lmax, rmin, rmax, nr, offset, cells }
    }

    #[inline]
    fn base(&self, l: i64, r: i64) -> usize {
        if l < self.lmin || l > self.lmax || r < self.rmin || r > self.rmax {
            return NONE;
        }
        self.offset[(l - self.lmin) as usize * self.nr + (r - self.rmin) as usize]
    }
}

enum Mode {
    /// Stop (and record) when the walk first reaches `x >= 1`.
    Hit(i64),
    Free,
}

struct RangeDp {
    layout: Layout,
    cur: Vec<f64>,
    log_scale: f64,
    half: f64,
    half_new: f64,
}

impl RangeDp {
    fn check_budget(cells: usize, steps: usize, budget: u128) -> Result<()> {
        let needed = cells as u128 * steps.max(1) as u128;
        if needed > budget {
            return Err(Error::BudgetExceeded { what: "range DP cell updates", needed, budget });
        }
        Ok(())
    }

    fn new(layout: Layout, gamma: f64) -> Self {
        let cur = vec![0.0; layout.cells];
        RangeDp { layout, cur, log_scale: 0.0, half: 0.5, half_new: 0.5 * (-gamma).exp() }
    }

    fn put(&mut self, l: i64, r: i64, p: i64, w: f64) {
        let b = self.layout.base(l, r);
        self.cur[b + (p - l) as usize] += w;
    }

    /// Advances one step; returns the (scaled) mass that just hit.
    fn step(&mut self, mode: &Mode) -> f64 {
        let ly = &self.layout;
        let mut next = vec![0.0; ly.cells];
        let mut hit = 0.0;
        for l in ly.lmin..=ly.lmax {
            for r in l.max(ly.rmin)..=ly.rmax {
                let b = ly.base(l, r);
                if b == NONE {
                    continue;
                }
                for p in l..=r {
                    let w = self.cur[b + (p - l) as usize];
                    if w == 0.0 {
                        continue;
                    }
                    for np in [p - 1, p + 1] {
                        if np >= l && np <= r {
                            next[b + (np - l) as usize] += w * self.half;
                        } else {
                            let wn = w * self.half_new;
                            if let Mode::Hit(x) = *mode {
                                if np == x {
                                    hit += wn;
                                    continue;
                                }
                            }
                            let (nl, nr) = if np < l { (np, r) } else { (l, np) };
                            let nb = ly.base(nl, nr);
                            if nb != NONE {
                                next[nb + (np - nl) as usize] += wn;
                            }
                        }
                    }
                }
            }
        }
        self.cur = next;
        hit
    }

    /// Rescales the live weights, folding the factor into `log_scale`.
    fn renormalize(&mut self) {
        let m = self.cur.iter().fold(0.0f64, |m, w| m.max(*w));
        if m > 0.0 && m.is_finite() {
            for w in &mut self.cur {
                *w /= m;
            }
            self.log_scale += m.ln();
        }
    }

    fn log_total(&self) -> f64 {
        self.cur.iter().sum::<f64>().ln() + self.log_scale
    }
}

fn range_gamma(phi: &OneSitePotential) -> Result<f64> {
    phi.range_cost()
        .ok_or_else(|| Error::Precondition(format!("range DP needs φ constant on t >= 1, got {}", phi.label())))
}

/// Annealed first-passage profile of `x` in d = 1.
pub fn range_dp_profile(phi: &OneSitePotential, x: i64, horizon: usize, budget: u128) -> Result<HittingProfile> {
    let gamma = range_gamma(phi)?;
    if x == 0 {
        return Ok(HittingProfile::immediate("range_dp"));
    }
    // reflection symmetry
    let x = x.abs();
    let n = horizon as i64;
    let layout = Layout::new(-n, 1, -1, x - 1, n.max(1));
    RangeDp::check_budget(layout.cells, horizon, budget)?;
    let mut dp = RangeDp::new(layout, gamma);
    let mut log_hit = vec![f64::NEG_INFINITY; horizon + 1];
    if horizon == 0 {
        return Ok(HittingProfile {
            horizon,
            log_hit,
            unhit_probability: Some(1.0),
            late_potential_floor: gamma,
            log_survivor: Some(0.0),
            log_escape: Vec::new(),
            oracle: "range_dp",
        });
    }
    let first = dp.half_new;
    if x == 1 {
        log_hit[1] = first.ln();
    } else {
        dp.put(1, 1, 1, first);
    }
    dp.put(-1, -1, -1, first);
    for t in 2..=horizon {
        let scale = dp.log_scale;
        let hit = dp.step(&Mode::Hit(x));
        log_hit[t] = hit.ln() + scale;
        dp.renormalize();
    }
    Ok(HittingProfile {
        horizon,
        log_hit,
        unhit_probability: None,
        late_potential_floor: gamma,
        log_survivor: Some(dp.log_total()),
        log_escape: Vec::new(),
        oracle: "range_dp",
    })
}

/// `log Σ_{|path| = n, S_n = y} (2)^{-n} exp(-Φ(n))` for `y = -n..=n`.
pub fn range_dp_endpoint_log_weights(phi: &OneSitePotential, n: usize, budget: u128) -> Result<Vec<f64>> {
    let gamma = range_gamma(phi)?;
    let mut out = vec![f64::NEG_INFINITY; 2 * n + 1];
    if n == 0 {
        out[0] = 0.0;
        return Ok(out);
    }
    let m = n as i64;
    let layout = Layout::new(-m, 1, -1, m, m);
    RangeDp::check_budget(layout.cells, n, budget)?;
    let mut dp = RangeDp::new(layout, gamma);
    let first = dp.half_new;
    dp.put(1, 1, 1, first);
    dp.put(-1, -1, -1, first);
    for _ in 2..=n {
        dp.step(&Mode::Free);
        dp.renormalize();
    }
    let mut acc: Vec<Vec<f64>> = vec![Vec::new(); 2 * n + 1];
    let ly = &dp.layout;
    for l in ly.lmin..=ly.lmax {
        for r in l.max(ly.rmin)..=ly.rmax {
            let b = ly.base(l, r);
            if b == NONE {
                continue;
            }
            for p in l..=r {
                let w = dp.cur[b + (p - l) as usize];
                if w > 0.0 {
                    acc[(p + m) as usize].push(w.ln());
                }
            }
        }
    }
    for (o, terms) in out.iter_mut().zip(acc) {
        *o = log_sum_exp(terms) + dp.log_scale;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_paths, first_hitting, LatticePoint};
    use crate::potential::annealed_weight;

    fn brute_profile(phi: &OneSitePotential, x: i64, n: usize) -> Vec<f64> {
        let target = LatticePoint(vec![x]);
        let mut hit = vec![0.0; n + 1];
        let en = enumerate_paths(1, n).unwrap();
        let p = en.path_probability();
        for path in en.iter() {
            if let Some(h) = first_hitting(&path, &target) {
                hit[h] += p * (-annealed_weight(&path.prefix(h), phi)).exp();
            }
        }
        hit
    }

    #[test]
    fn hitting_profile_matches_brute_force() {
        let phi = OneSitePotential::HardObstacle { gamma: 1.0 };
        for x in [1, 2, -3] {
            let dp = range_dp_profile(&phi, x, 14, RANGE_DP_BUDGET).unwrap();
            let brute = brute_profile(&phi, x, 14);
            for t in 0..=14 {
                let a = dp.log_hit[t].exp();
                assert!((a - brute[t]).abs() <= 1e-14 + 1e-12 * brute[t], "x={x} t={t}: {a} vs {}", brute[t]);
            }
        }
    }

    #[test]
    fn endpoint_weights_match_brute_force() {
        let phi = OneSitePotential::Capped { c: 0.7, cap: 1.0 };
        let n = 12;
        let w = range_dp_endpoint_log_weights(&phi, n, RANGE_DP_BUDGET).unwrap();
        let mut brute = vec![0.0; 2 * n + 1];
        let en = enumerate_paths(1, n).unwrap();
        for path in en.iter() {
            let y = path.endpoint().coords()[0];
            brute[(y + n as i64) as usize] += en.path_probability() * (-annealed_weight(&path, &phi)).exp();
        }
        for (a, b) in w.iter().zip(&brute) {
            assert!((a.exp() - b).abs() <= 1e-15 + 1e-12 * b);
        }
    }

    #[test]
    fn rejects_potentials_that_see_local_times() {
        let phi = OneSitePotential::PowerLaw { c: 1.0, a: 0.5 };
        assert!(matches!(range_dp_profile(&phi, 1, 5, RANGE_DP_BUDGET), Err(Error::Precondition(_))));
    }
}
