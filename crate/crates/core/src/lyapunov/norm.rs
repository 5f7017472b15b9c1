//! Finitely sampled norms on R^d: the gauge of `conv{x_i / v_i}`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;

pub const NORM_MODEL_VERSION: u32 = 1;

const FACET_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NormModel {
    lambda: f64,
    directions: Vec<LatticePoint>,
    values: Vec<f64>,
    /// `x_i / v_i`, the points spanning the unit ball.
    points: Vec<Vec<f64>>,
    /// Outer normals `n` with `n·p <= 1` on the ball, one per facet.
    facets: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormModelJson {
    lambda: f64,
    directions: Vec<Vec<i64>>,
    values: Vec<f64>,
    version: u32,
}

/// `{-1, 0, 1}^d` without the origin: the primitive vectors of sup-norm 1.
pub fn default_directions(dim: usize) -> Vec<LatticePoint> {
    let mut out = Vec::new();
    let total = 3usize.pow(dim as u32);
    for code in 0..total {
        let mut c = code;
        let coords: Vec<i64> = (0..dim)
            .map(|_| {
                let v = (c % 3) as i64 - 1;
                c /= 3;
                v
            })
            .collect();
        if coords.iter().any(|v| *v != 0) {
            out.push(LatticePoint(coords));
        }
    }
    out.sort();
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combinations(m: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..m {
            if m - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, k, cur, f);
            cur.pop();
        }
    }
    rec(0, m, k, &mut Vec::with_capacity(k), f);
}

impl NormModel {
    pub fn new(lambda: f64, directions: Vec<LatticePoint>, values: Vec<f64>) -> Result<Self> {
        if directions.is_empty() || directions.len() != values.len() {
            return Err(Error::InvalidInput("need one positive value per direction".into()));
        }
        let dim = directions[0].dim();
        if dim == 0 || directions.iter().any(|x| x.dim() != dim) {
            return Err(Error::InvalidInput("directions must share one dimension".into()));
        }
        if let Some(x) = directions.iter().find(|x| x.is_origin() || !x.is_primitive()) {
            return Err(Error::InvalidInput(format!("direction {x} is not a primitive nonzero lattice vector")));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidInput(format!("norm values must be positive and finite, got {v}")));
        }
        for (i, x) in directions.iter().enumerate() {
            let neg = x.neg();
            match directions.iter().position(|y| *y == neg) {
                None => return Err(Error::InvalidInput(format!("direction set is not closed under negation: {neg} missing"))),
                Some(j) if (values[i] - values[j]).abs() > 1e-9 * values[i].max(values[j]) => {
                    return Err(Error::InvalidInput(format!("values of {x} and {neg} differ")));
                }
                _ => {}
            }
        }
        let rows: Vec<f64> = directions.iter().flat_map(|x| x.as_f64()).collect();
        let m = DMatrix::from_row_slice(directions.len(), dim, &rows);
        if m.rank(1e-9) < dim {
            return Err(Error::InvalidInput("directions do not span R^d".into()));
        }
        let points: Vec<Vec<f64>> =
            directions.iter().zip(&values).map(|(x, v)| x.as_f64().iter().map(|c| c / v).collect()).collect();
        let mut facets: Vec<Vec<f64>> = Vec::new();
        combinations(points.len(), dim, &mut |idx| {
            let a = DMatrix::from_fn(dim, dim, |r, c| points[idx[r]][c]);
            let Some(n) = a.lu().solve(&DVector::from_element(dim, 1.0)) else { return };
            let n: Vec<f64> = n.iter().copied().collect();
            if n.iter().any(|c| !c.is_finite()) {
                return;
            }
            if points.iter().all(|p| dot(&n, p) <= 1.0 + FACET_SLACK)
                && !facets.iter().any(|f| f.iter().zip(&n).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs())))
            {
                facets.push(n);
            }
        });
        if facets.is_empty() {
            return Err(Error::InvalidInput("degenerate direction set".into()));
        }
        Ok(NormModel { lambda, directions, values, points, facets })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn dim(&self) -> usize {
        self.directions[0].dim()
    }

    pub fn directions(&self) -> &[LatticePoint] {
        &self.directions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    /// Gauge of the hull: `max_f n_f·y`.
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.facets.iter().map(|n| dot(n, y)).fold(0.0, f64::max)
    }

    /// `sup_{x ≠ 0} ℓ·x / eval(x)`, attained at a hull vertex.
    pub fn dual(&self, ell: &[f64]) -> f64 {
        self.points.iter().map(|p| dot(ell, p)).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        let j = NormModelJson {
            lambda: self.lambda,
            directions: self.directions.iter().map(|x| x.0.clone()).collect(),
            values: self.values.clone(),
            version: NORM_MODEL_VERSION,
        };
        serde_json::to_string_pretty(&j).expect("plain data")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: NormModelJson = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("norm model: {e}")))?;
        if j.version != NORM_MODEL_VERSION {
            return Err(Error::InvalidInput(format!("unsupported norm model version {}", j.version)));
        }
        NormModel::new(j.lambda, j.directions.into_iter().map(LatticePoint).collect(), j.values)
    }
}
