use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tapescan::sweep::{cases, run_sweep_sequential, Family};

fn compare(c: &mut Criterion) {
    let workloads = [
        ("disj-chunked", Family::DisjChunked { chunk: None }, vec![256, 1024]),
        ("keysort", Family::KeySort { b: 4 }, vec![64]),
        ("sets-tree-filter", Family::SetsTreeFilter, vec![16, 64]),
    ];
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for (name, family, sizes) in workloads {
        let batch = cases(&sizes, 16, 7);
        group.bench_with_input(BenchmarkId::new("sequential", name), &batch, |b, batch| {
            b.iter(|| run_sweep_sequential(family, batch).expect("sweep runs"))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", name), &batch, |b, batch| {
            b.iter(|| tapescan::sweep::run_sweep(family, batch).expect("sweep runs"))
        });
    }
    group.finish();
}

criterion_group!(benches, compare);
criterion_main!(benches);
