use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;

/// Where a hitting time stops: a site, a finite set, or a half-space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Point(LatticePoint),
    Set(Vec<LatticePoint>),
    HalfSpace { ell: Vec<f64>, u: f64 },
}

impl Target {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Target::Point(x) if x.dim() != dim => Err(Error::InvalidInput(format!("target {x} not in dimension {dim}"))),
            Target::Set(k) if k.is_empty() => Err(Error::InvalidInput("target set must be nonempty".into())),
            Target::Set(k) if k.iter().any(|x| x.dim() != dim) => {
                Err(Error::InvalidInput(format!("target set not in dimension {dim}")))
            }
            Target::HalfSpace { ell, .. } if ell.len() != dim => {
                Err(Error::InvalidInput("half-space direction dimension mismatch".into()))
            }
            Target::HalfSpace { ell, .. } if ell.iter().all(|l| *l == 0.0) || ell.iter().any(|l| !l.is_finite()) => {
                Err(Error::InvalidInput("half-space direction must be nonzero and finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn hits(&self, coords: &[i64]) -> bool {
        match self {
            Target::Point(x) => x.coords() == coords,
            Target::Set(k) => k.iter().any(|x| x.coords() == coords),
            Target::HalfSpace { ell, u } => {
                coords.iter().zip(ell).map(|(c, l)| *c as f64 * l).sum::<f64>() >= *u
            }
        }
    }

    pub fn contains_origin(&self, dim: usize) -> bool {
        self.hits(&vec![0; dim])
    }

    /// Lower bound on the number of steps (and of distinct sites visited at
    /// times `1..`) before the target can be reached.
    pub fn min_steps(&self) -> usize {
        match self {
            Target::Point(x) => x.l1() as usize,
            Target::Set(k) => k.iter().map(|x| x.l1()).min().unwrap_or(0) as usize,
            Target::HalfSpace { ell, u } => {
                if *u <= 0.0 {
                    0
                } else {
                    let m = ell.iter().fold(0.0f64, |m, l| m.max(l.abs()));
                    (u / m - 1e-12).ceil().max(0.0) as usize
                }
            }
        }
    }

    /// Lattice points of the target that a monotone path of `min_steps`
    /// steps reaches; used for the straight-path upper bounds.
    pub fn nearest_points(&self, dim: usize) -> Vec<LatticePoint> {
        match self {
            Target::Point(x) => vec![x.clone()],
            Target::Set(k) => {
                let m = self.min_steps() as i64;
                k.iter().filter(|x| x.l1() == m).cloned().collect()
            }
            Target::HalfSpace { ell, .. } => {
                let k = self.min_steps() as i64;
                let (axis, l) = ell
                    .iter()
                    .enumerate()
                    .fold((0, 0.0f64), |best, (i, l)| if l.abs() > best.1.abs() { (i, *l) } else { best });
                let sign = if l >= 0.0 { 1 } else { -1 };
                vec![LatticePoint::unit(dim, axis, sign).scaled(k)]
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Target::Point(x) => x.joined(),
            Target::Set(k) => k.iter().map(|x| x.joined()).collect::<Vec<_>>().join("|"),
            Target::HalfSpace { ell, u } => format!(
                "halfspace({};{u})",
                ell.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(";")
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_steps_for_each_kind() {
        assert_eq!(Target::Point(LatticePoint(vec![2, -1])).min_steps(), 3);
        let set = Target::Set(vec![LatticePoint(vec![1]), LatticePoint(vec![-3])]);
        assert_eq!(set.min_steps(), 1);
        assert_eq!(Target::HalfSpace { ell: vec![1.0, 0.0], u: 2.0 }.min_steps(), 2);
        assert_eq!(Target::HalfSpace { ell: vec![0.5, 0.25], u: 2.0 }.min_steps(), 4);
        assert_eq!(Target::HalfSpace { ell: vec![1.0], u: 2.5 }.min_steps(), 3);
        assert!(Target::HalfSpace { ell: vec![1.0], u: 0.0 }.contains_origin(1));
        assert!(Target::HalfSpace { ell: vec![0.0], u: 1.0 }.validate(1).is_err());
    }
}
