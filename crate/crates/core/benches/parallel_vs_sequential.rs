use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use potwalk_core::lattice::LatticePoint;
use potwalk_core::lyapunov::estimate_alpha;
use potwalk_core::path_measures::annealed_endpoint_weights;
use potwalk_core::potential::{OneSitePotential, SiteDistribution};
use potwalk_core::two_point::{AllSiteProfiles, Backend, TwoPointConfig};
use potwalk_core::Exec;

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn profiles(c: &mut Criterion) {
    let phi = OneSitePotential::HardObstacle { gamma: 1.0 };
    let mut g = c.benchmark_group("all_site_profiles_d2_h9");
    g.sample_size(10);
    for (name, exec) in EXECS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| AllSiteProfiles::compute(2, &phi, 9, 1 << 26, exec).unwrap()));
    }
    g.finish();
}

fn endpoint_laws(c: &mut Criterion) {
    let phi = OneSitePotential::HardObstacle { gamma: 1.0 };
    let mut g = c.benchmark_group("annealed_endpoint_enumeration_d2_n9");
    g.sample_size(10);
    for (name, exec) in EXECS {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| annealed_endpoint_weights(2, &phi, 9, Backend::Enumeration, 1 << 26, exec).unwrap())
        });
    }
    g.finish();
}

fn alpha(c: &mut Criterion) {
    let dist = SiteDistribution::BernoulliZero { p: 0.5, v: 1.0 };
    let x = LatticePoint::unit(2, 0, 1);
    let mut g = c.benchmark_group("estimate_alpha_d2_reps16");
    g.sample_size(10);
    for (name, exec) in EXECS {
        let cfg = TwoPointConfig { horizon: 16, backend: Backend::Transfer, exec, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| estimate_alpha(&x, 1.0, &dist, 3, 16, 7, &cfg).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, profiles, endpoint_laws, alpha);
criterion_main!(benches);
