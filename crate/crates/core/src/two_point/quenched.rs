//! Deterministic solvers for the quenched expectation on a finite box.

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::potential::PotentialField;

use super::enumerate::exp_neg_values;
use super::profile::HittingProfile;
use super::target::Target;

pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: usize = 100_000;

const OUTSIDE: usize = usize::MAX;

/// Neighbour table of the box sites, `OUTSIDE` past the boundary.
fn neighbours(field: &PotentialField) -> Vec<usize> {
    let d = field.dim();
    let mut table = Vec::with_capacity(field.site_count() * 2 * d);
    for i in 0..field.site_count() {
        let mut c = field.coords_of(i);
        for s in 0..2 * d {
            let (axis, delta) = (s / 2, if s % 2 == 1 { 1 } else { -1 });
            c[axis] += delta;
            table.push(field.index_of(&c).unwrap_or(OUTSIDE));
            c[axis] -= delta;
        }
    }
    table
}

fn target_mask(field: &PotentialField, target: &Target) -> Result<Vec<bool>> {
    target.validate(field.dim())?;
    let points = match target {
        Target::Point(x) => vec![x.clone()],
        Target::Set(k) => k.clone(),
        Target::HalfSpace { .. } => Vec::new(),
    };
    if let Some(x) = points.iter().find(|x| !field.contains(x)) {
        return Err(Error::OutsideBox { site: x.to_string(), radius: field.radius() });
    }
    let mask: Vec<bool> = (0..field.site_count()).map(|i| target.hits(&field.coords_of(i))).collect();
    if !mask.iter().any(|m| *m) {
        return Err(Error::InvalidInput(format!("target {} has no site in the box", target.label())));
    }
    Ok(mask)
}

fn origin_index(field: &PotentialField) -> usize {
    field.index_of(&vec![0; field.dim()]).expect("origin is in every box")
}

/// Time-resolved transfer recursion: the quenched analogue of the pruned
/// enumeration, exact up to rounding, with exits recorded as escapes.
pub fn quenched_transfer_profile(field: &PotentialField, target: &Target, horizon: usize, budget: u128) -> Result<HittingProfile> {
    let mask = target_mask(field, target)?;
    let origin = origin_index(field);
    if mask[origin] {
        return Ok(HittingProfile::immediate("transfer"));
    }
    let needed = field.site_count() as u128 * horizon.max(1) as u128;
    if needed > budget {
        return Err(Error::BudgetExceeded { what: "transfer site updates", needed, budget });
    }
    let d2 = 2 * field.dim();
    let nb = neighbours(field);
    let exp_neg = exp_neg_values(field);
    let inv = 1.0 / d2 as f64;
    let mut u = vec![0.0; field.site_count()];
    u[origin] = 1.0;
    let mut log_scale = 0.0;
    let mut log_hit = vec![f64::NEG_INFINITY; horizon + 1];
    let mut log_escape = Vec::new();
    for t in 0..horizon {
        let mut next = vec![0.0; u.len()];
        let (mut hit, mut esc) = (0.0, 0.0);
        for (y, &w) in u.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let w = w * inv;
            for &z in &nb[y * d2..(y + 1) * d2] {
                if z == OUTSIDE {
                    esc += w;
                } else if mask[z] {
                    hit += w * exp_neg[z];
                } else {
                    next[z] += w * exp_neg[z];
                }
            }
        }
        log_hit[t + 1] = hit.ln() + log_scale;
        if esc > 0.0 {
            log_escape.push((t + 1, esc.ln() + log_scale));
        }
        let m = next.iter().fold(0.0f64, |m, w| m.max(*w));
        if m > 0.0 {
            next.iter_mut().for_each(|w| *w /= m);
            log_scale += m.ln();
        }
        u = next;
    }
    let alive: f64 = u.iter().sum();
    Ok(HittingProfile {
        horizon,
        log_hit,
        unhit_probability: None,
        late_potential_floor: 0.0,
        log_survivor: Some(alive.ln() + log_scale),
        log_escape,
        oracle: "transfer",
    })
}

/// `log Σ_{paths to y} (2d)^{-n} exp(-Ψ(n))` for every endpoint, by the
/// transfer recursion over `(site, time)`. Needs box radius `>= n`.
pub fn quenched_endpoint_transfer(field: &PotentialField, n: usize) -> Result<Vec<(LatticePoint, f64)>> {
    if field.radius() < n {
        return Err(Error::Precondition(format!("field box radius {} is smaller than n = {n}", field.radius())));
    }
    let d2 = 2 * field.dim();
    let nb = neighbours(field);
    let exp_neg = exp_neg_values(field);
    let inv = 1.0 / d2 as f64;
    let mut u = vec![0.0; field.site_count()];
    u[origin_index(field)] = 1.0;
    let mut log_scale = 0.0;
    for _ in 0..n {
        let mut next = vec![0.0; u.len()];
        for (y, &w) in u.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let w = w * inv;
            for &z in &nb[y * d2..(y + 1) * d2] {
                debug_assert!(z != OUTSIDE);
                next[z] += w * exp_neg[z];
            }
        }
        let m = next.iter().fold(0.0f64, |m, w| m.max(*w));
        if m > 0.0 {
            next.iter_mut().for_each(|w| *w /= m);
            log_scale += m.ln();
        }
        u = next;
    }
    let mut out: Vec<(LatticePoint, f64)> = u
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(i, w)| (LatticePoint(field.coords_of(i)), w.ln() + log_scale))
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

/// Outcome of the fixed-point solve for `e(0) = E[exp(-λ H - Ψ(H))]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    /// Certified lower estimate of `e(0)` (paths hitting inside the box
    /// within `iterations` steps).
    pub lower: f64,
    /// Certified upper estimate of `e(0)`.
    pub upper: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Jacobi sweeps of `u(y) = Σ_e (2d)^{-1} e^{-λ - V(y+e)} u(y+e)` from
/// `u = 1_K`, killing outside the box.
///
/// The k-th iterate is the contribution of paths with `H(K) <= k` that stay
/// in the box, so it increases to the box solution. The distance to the box
/// solution is at most `min(e^{-λ(k+1)}, q/(1-q)·residual)`, `q = e^{-λ}`,
/// and leaving the box costs at least `e^{-λR}`.
pub fn quenched_fixed_point(
    field: &PotentialField,
    target: &Target,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPoint> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("λ must be finite and >= 0, got {lambda}")));
    }
    let mask = target_mask(field, target)?;
    let origin = origin_index(field);
    if mask[origin] {
        return Ok(FixedPoint { lower: 1.0, upper: 1.0, iterations: 0, residual: 0.0, converged: true });
    }
    let d2 = 2 * field.dim();
    let nb = neighbours(field);
    let q = (-lambda).exp();
    let coef: Vec<f64> = exp_neg_values(field).iter().map(|e| e * q / d2 as f64).collect();
    let mut u: Vec<f64> = mask.iter().map(|m| if *m { 1.0 } else { 0.0 }).collect();
    let mut next = u.clone();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        residual = 0.0;
        for y in 0..u.len() {
            if mask[y] {
                continue;
            }
            let v: f64 = nb[y * d2..(y + 1) * d2]
                .iter()
                .filter(|z| **z != OUTSIDE)
                .map(|&z| coef[z] * u[z])
                .sum();
            residual = residual.max((v - u[y]).abs());
            next[y] = v;
        }
        std::mem::swap(&mut u, &mut next);
        iterations += 1;
        // relative to the quantity of interest, so that far targets are not
        // declared converged before any mass reaches the origin
        if u[origin] > 0.0 && residual <= tol * u[origin] {
            converged = true;
            break;
        }
    }
    let lower = u[origin];
    let remaining_in_box = if q < 1.0 {
        q.powi(iterations as i32 + 1).min(q / (1.0 - q) * residual)
    } else {
        1.0
    };
    let exit = q.powi(field.radius() as i32);
    Ok(FixedPoint { lower, upper: (lower + remaining_in_box + exit).min(1.0), iterations, residual, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticePoint;

    #[test]
    fn free_field_matches_generating_function() {
        let field = PotentialField::constant(1, 60, 0.0).unwrap();
        let lambda = 1.0f64;
        let s = (-lambda).exp();
        let exact = (1.0 - (1.0 - s * s).sqrt()) / s;
        let fp = quenched_fixed_point(&field, &Target::Point(LatticePoint(vec![1])), lambda, 1e-12, 100_000).unwrap();
        assert!(fp.converged);
        assert!(fp.lower <= exact + 1e-15 && exact <= fp.upper);
        assert!(fp.upper - fp.lower < 1e-10);
    }

    #[test]
    fn transfer_and_fixed_point_agree() {
        let field = PotentialField::from_fn(1, 5, "ramp".into(), |c| 0.1 * c[0].abs() as f64).unwrap();
        let target = Target::Point(LatticePoint(vec![-2]));
        let lambda = 0.7;
        let prof = quenched_transfer_profile(&field, &target, 400, 1 << 30).unwrap();
        let e = prof.log_expectation(lambda).exp();
        let fp = quenched_fixed_point(&field, &target, lambda, 1e-13, 100_000).unwrap();
        assert!((e - fp.lower).abs() < 1e-12 * e);
    }

    #[test]
    fn target_outside_box_is_rejected() {
        let field = PotentialField::constant(1, 3, 0.0).unwrap();
        let r = quenched_fixed_point(&field, &Target::Point(LatticePoint(vec![4])), 1.0, 1e-12, 10);
        assert!(matches!(r, Err(Error::OutsideBox { .. })));
    }
}
