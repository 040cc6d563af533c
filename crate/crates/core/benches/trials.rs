use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use qpolar::montecarlo::simulate_branch;
use qpolar::{Branch, CodeDesign, Execution, QuantumChannelSpec};

fn trials(c: &mut Criterion) {
    let spec = QuantumChannelSpec::depolarizing(0.06).unwrap();
    let mut group = c.benchmark_group("trials");
    group.sample_size(10);
    for n in [256usize, 1024] {
        let code = CodeDesign::new(spec, n).unwrap().code(n / 2, n * 5 / 8).unwrap();
        let m = 200;
        group.throughput(Throughput::Elements(m));
        for (name, mode) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| simulate_branch(&spec, &code, Branch::Phase, m, 7, mode).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, trials);
criterion_main!(benches);
