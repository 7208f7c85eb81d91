use criterion::{criterion_group, criterion_main, Criterion};
use skyforge_bench::ridge_instance;
use skyforge_core::search::{run, Algorithm, SearchConfig};

fn searches(c: &mut Criterion) {
    let (u, est, measures) = ridge_instance(4000);
    let mut group = c.benchmark_group("ridge_12x4000_n200");
    group.sample_size(10);
    for algorithm in [Algorithm::Apx, Algorithm::Bi, Algorithm::Nobi, Algorithm::Div] {
        let cfg = SearchConfig {
            algorithm,
            epsilon: 0.2,
            budget: 200,
            target: Some("y".into()),
            ..SearchConfig::default()
        };
        group.bench_function(algorithm.as_str(), |b| {
            b.iter(|| run(&u, &measures, &cfg, &est, None).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, searches);
criterion_main!(benches);
