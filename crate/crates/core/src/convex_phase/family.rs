use crate::error::{Error, Result};
use crate::lyapunov::NormModel;

/// Norm models on an increasing λ-grid starting at 0; evaluations are
/// linear in λ between nodes.
#[derive(Debug, Clone)]
pub struct NormFamily {
    lambdas: Vec<f64>,
    models: Vec<NormModel>,
}

pub fn check_grid(lambdas: &[f64]) -> Result<()> {
    if lambdas.first() != Some(&0.0) {
        return Err(Error::InvalidInput("the λ-grid must start at 0".into()));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
        return Err(Error::InvalidInput("the λ-grid must be strictly increasing and finite".into()));
    }
    Ok(())
}

impl NormFamily {
    /// Rejects families whose direction values decrease in λ.
    pub fn new(models: Vec<NormModel>) -> Result<Self> {
        let lambdas: Vec<f64> = models.iter().map(|m| m.lambda()).collect();
        check_grid(&lambdas)?;
        let dirs = models[0].directions();
        if models.iter().any(|m| m.directions() != dirs) {
            return Err(Error::InvalidInput("norm models of a family must share one direction set".into()));
        }
        for w in models.windows(2) {
            for (i, (a, b)) in w[0].values().iter().zip(w[1].values()).enumerate() {
                if *b < a - 1e-9 * a.abs().max(1.0) {
                    return Err(Error::InvalidInput(format!(
                        "norm family not monotone in λ: value of {} drops from {a} to {b} between λ = {} and {}",
                        dirs[i],
                        w[0].lambda(),
                        w[1].lambda()
                    )));
                }
            }
        }
        Ok(NormFamily { lambdas, models })
    }

    pub fn dim(&self) -> usize {
        self.models[0].dim()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn models(&self) -> &[NormModel] {
        &self.models
    }

    /// Segment `k` and weight `t` with `λ = (1-t)λ_k + tλ_{k+1}`.
    fn locate(&self, lambda: f64) -> Result<(usize, f64)> {
        let end = *self.lambdas.last().unwrap();
        if !(lambda >= 0.0) || lambda > end {
            return Err(Error::GridTooShort { lambda_end: end, lambda_needed: lambda });
        }
        if self.lambdas.len() == 1 {
            return Ok((0, 0.0));
        }
        let k = self.lambdas.partition_point(|l| *l <= lambda).saturating_sub(1).min(self.lambdas.len() - 2);
        let t = (lambda - self.lambdas[k]) / (self.lambdas[k + 1] - self.lambdas[k]);
        Ok((k, t))
    }

    pub fn eval(&self, x: &[f64], lambda: f64) -> Result<f64> {
        let (k, t) = self.locate(lambda)?;
        if t == 0.0 {
            return Ok(self.models[k].eval(x));
        }
        Ok((1.0 - t) * self.models[k].eval(x) + t * self.models[k + 1].eval(x))
    }

    /// `max_k (N_k(x) - λ_k)` and its node.
    pub fn node_max(&self, x: &[f64]) -> (f64, usize) {
        self.models
            .iter()
            .enumerate()
            .map(|(k, m)| (m.eval(x) - self.lambdas[k], k))
            .fold((f64::NEG_INFINITY, 0), |b, c| if c.0 > b.0 { c } else { b })
    }

    /// `sup_x ℓ·x / N_λ(x)` over the sampled directions. Between nodes the
    /// ratio is quasi-linear on each cone of the two gauges, so in d <= 2
    /// the directions include every breakpoint and the value is exact; in
    /// higher dimension it is a lower estimate.
    pub fn dual(&self, ell: &[f64], lambda: f64) -> Result<f64> {
        let (k, t) = self.locate(lambda)?;
        if t == 0.0 {
            return Ok(self.models[k].dual(ell));
        }
        let (a, b) = (&self.models[k], &self.models[k + 1]);
        Ok(a.directions()
            .iter()
            .map(|x| {
                let x = x.as_f64();
                let num: f64 = x.iter().zip(ell).map(|(p, q)| p * q).sum();
                num / ((1.0 - t) * a.eval(&x) + t * b.eval(&x))
            })
            .fold(0.0, f64::max))
    }
}
