use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use witness_tda::filtration::epsilon_max_rule;
use witness_tda::{build_filtration, cech_complex, distances, persistence, prf, select_landmarks};
use witness_tda_bench::piano_cloud;

fn pipeline(c: &mut Criterion) {
    let cloud = piano_cloud(2000);
    let rule = epsilon_max_rule(&distances(&cloud, &select_landmarks(&cloud, 100).unwrap()).unwrap(), 20);
    let eps = 0.6 * rule;

    let mut g = c.benchmark_group("witness");
    for l in [50, 100, 200] {
        let lm = select_landmarks(&cloud, l).unwrap();
        g.bench_with_input(BenchmarkId::new("distances", l), &lm, |b, lm| {
            b.iter(|| distances(&cloud, lm).unwrap())
        });
        let d = distances(&cloud, &lm).unwrap();
        g.bench_with_input(BenchmarkId::new("filtration", l), &d, |b, d| {
            b.iter(|| build_filtration(d, 2, eps).unwrap())
        });
        let f = build_filtration(&d, 2, rule).unwrap();
        g.bench_with_input(BenchmarkId::new("persistence", l), &f, |b, f| {
            b.iter(|| persistence(f, 1).unwrap())
        });
        let dgm = persistence(&f, 1).unwrap();
        g.bench_with_input(BenchmarkId::new("rank_function", l), &dgm, |b, dgm| {
            b.iter(|| prf(dgm, 1, 64).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("cech");
    g.sample_size(10);
    g.bench_function("2000_points", |b| b.iter(|| cech_complex(&cloud, eps, 2).unwrap()));
    g.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
