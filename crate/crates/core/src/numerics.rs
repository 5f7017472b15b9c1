//! Small numerical helpers: log-space sums, certified bisection, golden
//! section search, and the free-walk hitting exponent used for rigorous
//! lower bounds on two-point functions.

/// `log(exp(a) + exp(b))` without overflow. `-inf` inputs are absorbed.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + s.ln()
}

/// Result of a bisection: the final sign-change interval and its midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub lo: f64,
    pub hi: f64,
    pub x: f64,
    pub residual: f64,
    pub steps: usize,
}

/// Bisection on a continuous function with `f(lo)` and `f(hi)` of opposite
/// sign. Stops once `|f(x)| <= f_tol` or the interval is shorter than
/// `x_tol`. Every step keeps a sign change inside `[lo, hi]`.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    x_tol: f64,
    f_tol: f64,
) -> Option<Root> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(Root { lo, hi: lo, x: lo, residual: 0.0, steps: 0 });
    }
    if f_hi == 0.0 {
        return Some(Root { lo: hi, hi, x: hi, residual: 0.0, steps: 0 });
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return None;
    }
    let mut steps = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        steps += 1;
        if f_mid.abs() <= f_tol || (hi - lo) <= x_tol || steps >= 200 {
            return Some(Root { lo, hi, x: mid, residual: f_mid.abs(), steps });
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        debug_assert!(f_lo.signum() != f(hi).signum());
    }
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (fa, fb) = (f(a), f(b));
    [(a, fa), (b, fb), (c, fc), (d, fd)]
        .into_iter()
        .fold((a, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// `sup { θ·x : log M(θ) <= λ }` with `M(θ) = (1/d) Σ_i cosh θ_i`, the
/// exponent of `E[exp(-λ H(x))]` for the free simple random walk.
///
/// Optional stopping of `exp(θ·S(m) - m log M(θ))` at `H(x)` gives
/// `E[exp(-λ H(x)); H(x) < ∞] <= exp(-θ·x)` for every admissible θ, so this
/// is a certified lower bound on `-log E[exp(-λ H(x))]`.
pub fn free_hitting_exponent(x: &[f64], lambda: f64) -> f64 {
    if lambda <= 0.0 || x.iter().all(|c| *c == 0.0) {
        return 0.0;
    }
    let d = x.len() as f64;
    let level = d * lambda.exp();
    let g = |s: f64| x.iter().map(|c| (1.0 + c * c * s * s).sqrt()).sum::<f64>() - level;
    let mut hi = 1.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    let root = bisect(g, 0.0, hi, 1e-15 * hi, 0.0).expect("monotone");
    // take the lower end so that the constraint log M(θ) <= λ holds
    let s = root.lo;
    x.iter().map(|c| c.abs() * (c.abs() * s).asinh()).sum()
}

/// `sup { t·u : t >= 0, log M(t ℓ) <= λ }`: the same martingale bound for
/// the first entrance time into `{ℓ·z >= u}`.
pub fn free_halfspace_exponent(ell: &[f64], u: f64, lambda: f64) -> f64 {
    if lambda <= 0.0 || u <= 0.0 {
        return 0.0;
    }
    let d = ell.len() as f64;
    let level = d * lambda.exp();
    let g = |t: f64| ell.iter().map(|l| (t * l).cosh()).sum::<f64>() - level;
    let mut hi = 1.0;
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    let root = bisect(g, 0.0, hi, 1e-15 * hi, 0.0).expect("monotone");
    root.lo * u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_exp_matches_direct() {
        let v = log_add_exp(0.3f64.ln(), 0.5f64.ln());
        assert!((v.exp() - 0.8).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 1.0), 1.0);
        assert!((log_sum_exp([1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
    }

    #[test]
    fn bisection_keeps_sign_change() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-12);
        assert!(r.lo * r.lo - 2.0 <= 0.0 && r.hi * r.hi - 2.0 >= 0.0);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-10, 0.0).is_none());
    }

    #[test]
    fn golden_finds_concave_max() {
        let (x, fx) = golden_max(|x| -(x - 0.3).abs(), 0.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-10 && fx > -1e-10);
    }

    #[test]
    fn one_dimensional_exponent_is_acosh() {
        // first passage generating function (1 - sqrt(1 - s^2))/s at s = e^{-λ}
        for &lambda in &[0.1, 1.0, 3.0] {
            let s = (-lambda as f64).exp();
            let g = (1.0 - (1.0 - s * s).sqrt()) / s;
            let k = free_hitting_exponent(&[1.0], lambda);
            assert!((k + g.ln()).abs() < 1e-10, "{k} vs {}", -g.ln());
            assert!((free_halfspace_exponent(&[1.0], 1.0, lambda) - k).abs() < 1e-10);
        }
    }

    #[test]
    fn exponent_dominates_time_bound() {
        // H(x) >= |x|_1 is weaker than the martingale bound
        for &lambda in &[0.125, 1.0, 4.0] {
            for x in [[1.0, 0.0], [1.0, 1.0], [2.0, 1.0]] {
                let k = free_hitting_exponent(&x, lambda);
                assert!(k >= lambda * (x[0] + x[1]) - 1e-12);
            }
        }
    }
}
