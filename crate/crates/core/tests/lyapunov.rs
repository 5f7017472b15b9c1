use potwalk_core::lattice::LatticePoint;
use potwalk_core::lyapunov::*;
use potwalk_core::potential::{OneSitePotential, PotentialField, SiteDistribution};
use potwalk_core::two_point::{annealed_two_point, quenched_two_point, Bracket, TwoPointConfig};
use proptest::prelude::*;

fn hard() -> OneSitePotential {
    OneSitePotential::HardObstacle { gamma: 1.0 }
}

fn e1() -> LatticePoint {
    LatticePoint(vec![1])
}

#[test]
fn beta_one_dimension_width() {
    let est = estimate_beta(&e1(), 1.0, &hard(), 8, &HorizonSchedule::default(), &TwoPointConfig::default()).unwrap();
    assert!(est.bracket.width() <= 0.05, "{:?}", est.bracket);
    assert!(est.bracket.within(&beta_sandwich(&e1(), 1.0, &hard()), 0.0));
    // the hard-obstacle value γ + acosh(e^λ)
    assert!(est.bracket.contains(1.0 + 1f64.exp().acosh(), 1e-12));
    for w in est.per_n.windows(2) {
        assert!(w[1].running_upper <= w[0].running_upper);
    }
}

#[test]
fn beta_homogeneity_and_bounds_two_dimensions() {
    let cfg = TwoPointConfig { horizon: 10, ..Default::default() };
    let phi = OneSitePotential::PowerLaw { c: 0.5, a: 0.5 };
    let x = LatticePoint(vec![1, 0]);
    let bank = AnnealedBank::build(2, &phi, &bank_points(&[x.clone(), x.scaled(2)], 5), &HorizonSchedule::default(), &cfg).unwrap();
    for lambda in [0.5, 1.0, 2.0] {
        let a = estimate_beta_from_bank(&bank, &x, lambda, 5, 1e-6).unwrap();
        let b = estimate_beta_from_bank(&bank, &x.scaled(2), lambda, 2, 1e-6).unwrap();
        assert!(a.bracket.within(&beta_sandwich(&x, lambda, &phi), 0.0));
        let twice = a.bracket.scale(2.0);
        assert!(b.bracket.overlaps(&twice, 1e-12));
    }
}

#[test]
fn beta_monotone_and_concave_in_lambda() {
    let grid: Vec<f64> = (0..=32).map(|k| k as f64 * 0.125).collect();
    let bank = AnnealedBank::build(1, &hard(), &bank_points(&[e1()], 8), &HorizonSchedule::default(), &TwoPointConfig::default()).unwrap();
    let est: Vec<Bracket> = grid.iter().map(|l| estimate_beta_from_bank(&bank, &e1(), *l, 8, 1e-6).unwrap().bracket).collect();
    for w in est.windows(2) {
        assert!(w[1].upper >= w[0].lower);
    }
    for w in est.windows(3) {
        assert!(w[1].upper + 1e-12 >= 0.5 * (w[0].lower + w[2].lower));
    }
}

#[test]
fn alpha_on_the_free_field_is_deterministic() {
    let lambda = 1.0f64;
    let exact = lambda.exp().acosh();
    let sandwich = Bracket::new(lambda, lambda + 2f64.ln());
    let est = estimate_alpha_with(
        &e1(),
        lambda,
        4,
        5,
        |_| PotentialField::constant(1, 60, 0.0),
        lambda,
        sandwich,
        &TwoPointConfig::default(),
    )
    .unwrap();
    for p in &est.per_n {
        assert_eq!(p.se, 0.0);
        assert!((p.mean - exact).abs() < 1e-9, "n={} {} vs {exact}", p.n, p.mean);
    }
}

#[test]
fn alpha_within_theorem_bounds() {
    let dist = SiteDistribution::Exponential { rate: 2.0 };
    for x in [e1(), LatticePoint(vec![1, 1])] {
        let est = estimate_alpha(&x, 1.0, &dist, 3, 6, 11, &TwoPointConfig::default()).unwrap();
        assert!(est.bracket.within(&alpha_sandwich(&x, 1.0, &dist), 0.0));
        assert!(est.raw.lower <= est.raw.upper);
    }
}

#[test]
fn confidence_interval_scaling() {
    let dist = SiteDistribution::BernoulliZero { p: 0.5, v: 1.0 };
    let cfg = TwoPointConfig::default();
    let hw = |reps: usize, seed: u64| {
        let est = estimate_alpha(&e1(), 1.0, &dist, 2, reps, seed, &cfg).unwrap();
        2.0 * est.per_n[1].se
    };
    let (mut small, mut large) = (0.0, 0.0);
    for meta in 0..10u64 {
        small += hw(16, 1000 + meta);
        large += hw(64, 2000 + meta);
    }
    let ratio = large / small;
    assert!((0.35..=0.7).contains(&ratio), "ratio {ratio}");
}

#[test]
fn mean_subadditivity_quenched() {
    let dist = SiteDistribution::Exponential { rate: 1.0 };
    let reps = 24;
    let cfg = TwoPointConfig::default();
    let fields: Vec<PotentialField> =
        (0..reps).map(|r| PotentialField::sample(1, 50, dist, replica_seed(5, r)).unwrap()).collect();
    let stats = |x: i64| {
        let v: Vec<f64> = fields.iter().map(|f| quenched_two_point(&LatticePoint(vec![x]), 1.0, f, &cfg).unwrap().bracket.mid()).collect();
        let m = v.iter().sum::<f64>() / reps as f64;
        let var = v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
        (m, (var / reps as f64).sqrt())
    };
    let table: Vec<(f64, f64)> = (-6..=6).map(stats).collect();
    let at = |x: i64| table[(x + 6) as usize];
    for x in -3i64..=3 {
        for y in -3i64..=3 {
            if x == 0 || y == 0 {
                continue;
            }
            let (s, ss) = at(x + y);
            let (a, sa) = at(x);
            let (b, sb) = at(y);
            assert!(s <= a + b + 3.0 * (ss * ss + sa * sa + sb * sb).sqrt(), "{x} {y}");
        }
    }
}

#[test]
fn shape_ratios() {
    let bank = AnnealedBank::build(1, &hard(), &bank_points(&[e1(), LatticePoint(vec![-1])], 8), &HorizonSchedule::default(), &TwoPointConfig::default())
        .unwrap();
    let models = beta_models(&bank, &default_directions(1), &[1.0], 8, 1e-6, potwalk_core::Exec::Sequential).unwrap();
    let model = models[0].mid().unwrap();
    let est = estimate_beta_from_bank(&bank, &e1(), 1.0, 8, 1e-6).unwrap();
    let pts: Vec<LatticePoint> = (1..=8).map(|k| e1().scaled(k)).collect();
    let rows = shape_diagnostic(&pts, &model, |x| Ok(bank.bracket(x, 1.0, 1e-6)?.bracket)).unwrap();
    for (row, per) in rows.iter().zip(&est.per_n) {
        let expect = per.bracket.scale(1.0 / model.eval(&[1.0]));
        assert!((row.ratio.lower - expect.lower).abs() < 1e-12 && (row.ratio.upper - expect.upper).abs() < 1e-12);
    }
    assert!((rows[7].ratio.mid() - 1.0).abs() < (rows[1].ratio.mid() - 1.0).abs());

    let phi = hard();
    let cfg = TwoPointConfig { horizon: 10, ..Default::default() };
    let dirs = default_directions(2);
    let bank2 = AnnealedBank::build(2, &phi, &bank_points(&dirs, 4), &HorizonSchedule::default(), &cfg).unwrap();
    let m2 = beta_models(&bank2, &dirs, &[1.0], 4, 1e-6, potwalk_core::Exec::Parallel).unwrap()[0].mid().unwrap();
    let diag: Vec<LatticePoint> = (1..=4).map(|k| LatticePoint(vec![k, k])).collect();
    let rows = shape_diagnostic(&diag, &m2, |x| Ok(annealed_two_point(x, 1.0, &phi, &cfg)?.bracket)).unwrap();
    let (lo, hi) = (1.0 + 1.0, 1.0 + 4f64.ln() + 1.0);
    for r in rows {
        assert!(r.ratio.lower >= lo / hi - 1e-12 && r.ratio.upper <= hi / lo + 1e-12, "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn norm_model_triangle_inequality(a in prop::array::uniform2(-5.0f64..5.0), b in prop::array::uniform2(-5.0f64..5.0)) {
        let dirs = default_directions(2);
        let values: Vec<f64> = dirs.iter().map(|x| if x.l1() == 2 { 3.1 } else { 2.0 }).collect();
        let m = NormModel::new(1.0, dirs, values).unwrap();
        let s = [a[0] + b[0], a[1] + b[1]];
        let rhs = m.eval(&a) + m.eval(&b);
        prop_assert!(m.eval(&s) <= rhs + 1e-12 * rhs.max(1.0));
        prop_assert!((m.eval(&[2.0 * a[0], 2.0 * a[1]]) - 2.0 * m.eval(&a)).abs() <= 1e-12 * m.eval(&a).max(1.0));
    }
}
