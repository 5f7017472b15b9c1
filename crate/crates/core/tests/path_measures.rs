use potwalk_core::convex_phase::{default_lambda_grid, RateFunctionModel};
use potwalk_core::exec::Exec;
use potwalk_core::lattice::{enumerate_paths, LatticePoint};
use potwalk_core::lyapunov::{bank_points, beta_models, default_directions, AnnealedBank, HorizonSchedule};
use potwalk_core::path_measures::*;
use potwalk_core::potential::{annealed_weight, quenched_weight, OneSitePotential, PotentialField, SiteDistribution};
use potwalk_core::two_point::{Backend, TwoPointConfig};
use potwalk_core::Error;

const BUDGET: u128 = 1 << 26;

fn hard(gamma: f64) -> OneSitePotential {
    OneSitePotential::HardObstacle { gamma }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn annealed(dim: usize, phi: &OneSitePotential, n: usize, backend: Backend) -> EndpointWeights {
    annealed_endpoint_weights(dim, phi, n, backend, BUDGET, Exec::Parallel).unwrap()
}

/// Direct sum over all `(2d)^n` paths.
fn brute_annealed(dim: usize, phi: &OneSitePotential, n: usize, h: &[f64]) -> f64 {
    let e = enumerate_paths(dim, n).unwrap();
    e.iter().map(|p| e.path_probability() * (p.endpoint().dot(h) - annealed_weight(&p, phi)).exp()).sum()
}

fn brute_quenched(field: &PotentialField, n: usize, h: &[f64]) -> f64 {
    let e = enumerate_paths(field.dim(), n).unwrap();
    e.iter().map(|p| e.path_probability() * (p.endpoint().dot(h) - quenched_weight(&p, field).unwrap()).exp()).sum()
}

#[test]
fn one_step_formulas() {
    let phi = OneSitePotential::PowerLaw { c: 0.7, a: 0.5 };
    for h in [0.0, 0.7, -1.3] {
        let law = partition_annealed(&[h], 1, &phi, Backend::Auto, BUDGET, Exec::Sequential).unwrap();
        assert!(rel(law.log_z.exp(), (-0.7f64).exp() * h.cosh()) < 1e-14);
    }
    let field = PotentialField::from_fn(2, 3, "test".into(), |c| (c[0] + 2 * c[1]).abs() as f64 * 0.3).unwrap();
    let h = [0.4, -0.2];
    let law = partition_quenched(&h, 1, &field).unwrap();
    let mut expect = 0.0;
    for (e, hv) in [([1, 0], 0.4), ([-1, 0], -0.4), ([0, 1], -0.2), ([0, -1], 0.2)] {
        expect += 0.25 * (hv - field.value_at(&e).unwrap()).exp();
    }
    assert!(rel(law.log_z.exp(), expect) < 1e-14);
}

#[test]
fn range_dp_and_enumeration_agree() {
    for n in [1, 5, 12] {
        let dp = annealed(1, &hard(1.0), n, Backend::RangeDp);
        let en = annealed(1, &hard(1.0), n, Backend::Enumeration);
        assert_eq!(dp.oracle, "range_dp");
        for h in [0.0, 0.5] {
            let a = dp.law(&[h]).unwrap();
            let b = en.law(&[h]).unwrap();
            assert!(rel(a.log_z.exp(), b.log_z.exp()) <= 1e-12);
            assert!(rel(a.log_z.exp(), brute_annealed(1, &hard(1.0), n, &[h])) <= 1e-12);
            assert_eq!(a.law.len(), b.law.len());
            for ((x, p), (y, q)) in a.law.iter().zip(&b.law) {
                assert_eq!(x, y);
                assert!(rel(*p, *q) <= 1e-12);
            }
        }
    }
}

#[test]
fn transfer_and_enumeration_agree() {
    let dist = SiteDistribution::BernoulliZero { p: 0.6, v: 0.8 };
    for seed in 0..5 {
        let field = PotentialField::sample(1, 10, dist, seed).unwrap();
        let tr = quenched_endpoint_weights(&field, 10, Backend::Transfer, BUDGET, Exec::Sequential).unwrap();
        let en = quenched_endpoint_weights(&field, 10, Backend::Enumeration, BUDGET, Exec::Parallel).unwrap();
        for h in [0.0, 0.3] {
            let (a, b) = (tr.log_z(&[h]).exp(), en.log_z(&[h]).exp());
            assert!(rel(a, b) <= 1e-12);
            assert!(rel(a, brute_quenched(&field, 10, &[h])) <= 1e-12);
        }
    }
}

#[test]
fn free_field_is_a_product() {
    let field = PotentialField::constant(2, 6, 0.0).unwrap();
    let h = [0.5, -0.25];
    let law = partition_quenched(&h, 6, &field).unwrap();
    let m = 0.5 * (0.5f64.cosh() + 0.25f64.cosh());
    assert!(rel(law.log_z, 6.0 * m.ln()) < 1e-12);
}

#[test]
fn laws_normalize_with_parity_support() {
    let field = PotentialField::sample(2, 7, SiteDistribution::BernoulliTrap { p: 0.7 }, 3).unwrap();
    for law in [
        partition_annealed(&[0.3, 0.1], 7, &hard(0.5), Backend::Auto, BUDGET, Exec::Parallel).unwrap(),
        partition_quenched(&[0.3, 0.1], 7, &field).unwrap(),
        partition_annealed(&[1.1], 40, &hard(1.0), Backend::Auto, BUDGET, Exec::Parallel).unwrap(),
    ] {
        assert!((law.total_mass() - 1.0).abs() <= 1e-12);
        for (y, _) in &law.law {
            assert!(y.l1() as usize <= law.n && (y.l1() as usize) % 2 == law.n % 2);
        }
    }
}

#[test]
fn zero_drift_is_symmetric() {
    let law = partition_annealed(&[0.0, 0.0], 8, &OneSitePotential::PowerLaw { c: 0.5, a: 0.5 }, Backend::Auto, BUDGET, Exec::Parallel).unwrap();
    assert!(law.mean_displacement().iter().all(|m| m.abs() < 1e-12));
    let law = partition_annealed(&[0.0], 60, &hard(1.0), Backend::Auto, BUDGET, Exec::Parallel).unwrap();
    assert!(law.mean_displacement()[0].abs() < 1e-12);
}

#[test]
fn larger_potential_lowers_the_partition_function() {
    for n in [4, 9, 16] {
        let a = annealed(1, &hard(0.5), n, Backend::Auto);
        let b = annealed(1, &hard(1.0), n, Backend::Auto);
        for h in [0.0, 0.5, -2.0] {
            assert!(b.log_z(&[h]) <= a.log_z(&[h]));
        }
    }
}

#[test]
fn sandwich_holds_on_every_cell() {
    let hs: Vec<Vec<f64>> = [-2.0, -0.3, 0.0, 0.5, 1.5, 3.0].iter().map(|h| vec![*h]).collect();
    for n in [1, 10, 50] {
        let w = annealed(1, &hard(1.0), n, Backend::Auto);
        let scan = ballisticity_scan(&hs, &w, DEFAULT_DELTA, None).unwrap();
        assert!(scan.rows.iter().all(|r| r.sandwich_ok), "{:?}", scan.rows);
    }
    let field = PotentialField::sample(1, 20, SiteDistribution::Exponential { rate: 2.0 }, 11).unwrap();
    let w = quenched_endpoint_weights(&field, 20, Backend::Transfer, BUDGET, Exec::Sequential).unwrap();
    assert!(ballisticity_scan(&hs, &w, DEFAULT_DELTA, None).unwrap().rows.iter().all(|r| r.sandwich_ok));
}

#[test]
fn averaged_quenched_approaches_annealed() {
    let dist = SiteDistribution::BernoulliZero { p: 0.5, v: 1.0 };
    let c = annealed_quenched_consistency(&dist, 1, &[0.3], 8, 10_000, 42, Exec::Parallel).unwrap();
    assert!(c.ok, "{c:?}");
}

#[test]
fn trivial_events() {
    let w = annealed(1, &hard(1.0), 12, Backend::Auto);
    let all = ldp_scan(&[0.4], &[4, 8, 12], &VelocityEvent::All, |n| Ok(annealed(1, &hard(1.0), n, Backend::Auto)), None, Exec::Sequential).unwrap();
    assert!(all.rows.iter().all(|r| r.event_log_prob_over_n.abs() < 1e-12));
    let law = w.law(&[0.4]).unwrap();
    assert_eq!(law.mass_where(|v| VelocityEvent::L1Outside { r: 1.0 }.contains(v)), 0.0);
    let out = ldp_scan(&[0.4], &[6], &VelocityEvent::L1Outside { r: 1.0 }, |n| Ok(annealed(1, &hard(1.0), n, Backend::Auto)), None, Exec::Sequential).unwrap();
    assert_eq!(out.rows[0].event_log_prob_over_n, f64::NEG_INFINITY);
}

fn ldp_fixture() -> (RateFunctionModel, VelocityEvent) {
    let dirs = default_directions(1);
    let bank = AnnealedBank::build(1, &hard(1.0), &bank_points(&dirs, 8), &HorizonSchedule::default(), &TwoPointConfig::default()).unwrap();
    let br = beta_models(&bank, &dirs, &default_lambda_grid(), 8, 1e-6, Exec::Parallel).unwrap();
    let model = RateFunctionModel::from_brackets("annealed", 1.0, &br).unwrap();
    (model, VelocityEvent::HalfSpace { ell: vec![1.0], c: 0.6 })
}

/// `(1/n) log E[e^{-Phi}; S(n) in nA]`, the event mass before normalizing by `Z_n`.
fn unnormalized(law: &EndpointLaw, event: &VelocityEvent) -> f64 {
    law.mass_where(|v| event.contains(v)).ln() / law.n as f64 + law.log_z_over_n()
}

#[test]
fn ldp_target_sits_inside_the_envelope() {
    let (model, event) = ldp_fixture();
    let scan = ldp_scan(&[0.0], &[8], &event, |n| Ok(annealed(1, &hard(1.0), n, Backend::Auto)), Some(&model), Exec::Parallel).unwrap();
    let t = &scan.targets[0];
    assert!(t.envelope.lower <= t.mid && t.mid <= t.envelope.upper, "{t:?}");
    assert!(t.mid < 0.0);
}

#[test]
fn ldp_unnormalized_mass_climbs_to_the_rate() {
    let (model, event) = ldp_fixture();
    let scan = ldp_scan(&[0.0], &[8], &event, |n| Ok(annealed(1, &hard(1.0), n, Backend::Auto)), Some(&model), Exec::Parallel).unwrap();
    let t = scan.targets[0].clone();
    let vals: Vec<f64> = [8, 12, 16, 50, 200]
        .iter()
        .map(|n| unnormalized(&annealed(1, &hard(1.0), *n, Backend::Auto).law(&[0.0]).unwrap(), &event))
        .collect();
    // both corrections are subexponential, the restricted mass approaches from below
    assert!(vals.windows(2).all(|w| w[0] < w[1] && w[1] <= t.envelope.upper), "{vals:?} {t:?}");
    assert!(vals[4] >= t.envelope.lower, "{vals:?} {t:?}");
}

#[test]
fn ldp_normalized_sequence_equals_mass_minus_log_z() {
    let (_, event) = ldp_fixture();
    let scan = ldp_scan(&[0.0], &[8, 12, 16], &event, |n| Ok(annealed(1, &hard(1.0), n, Backend::Auto)), None, Exec::Parallel).unwrap();
    for row in &scan.rows {
        let law = annealed(1, &hard(1.0), row.n, Backend::Auto).law(&[0.0]).unwrap();
        let expect = unnormalized(&law, &event) - law.log_z_over_n();
        assert!((row.event_log_prob_over_n - expect).abs() < 1e-12);
    }
}

#[test]
fn ballistic_drift_moves_faster() {
    let w = annealed(1, &hard(1.0), 100, Backend::Auto);
    assert_eq!(w.oracle, "range_dp");
    let scan = ballisticity_scan(&[vec![0.5], vec![2.0]], &w, DEFAULT_DELTA, None).unwrap();
    let (sub, bal) = (&scan.rows[0], &scan.rows[1]);
    assert!(bal.mean_speed > sub.mean_speed);
    assert!(sub.event_log_prob_over_n > bal.event_log_prob_over_n);
}

#[test]
fn annealed_exponent_vanishes() {
    let v: Vec<f64> = [50, 100, 200].iter().map(|n| -annealed(1, &hard(1.0), *n, Backend::Auto).log_z(&[0.0]) / *n as f64).collect();
    assert!(v[0] > v[1] && v[1] > v[2], "{v:?}");
    assert!(v[2] < 1.0);
}

#[test]
fn small_box_is_rejected() {
    let field = PotentialField::constant(1, 5, 0.0).unwrap();
    assert!(matches!(partition_quenched(&[0.0], 6, &field), Err(Error::Precondition(_))));
    let e = annealed_endpoint_weights(2, &hard(1.0), 30, Backend::Auto, BUDGET, Exec::Sequential).unwrap_err();
    assert!(matches!(e, Error::BudgetExceeded { .. }));
    let _ = LatticePoint::origin(1);
}
