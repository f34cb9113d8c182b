use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use foldcusp::bifurcation::{sweep, FamilyTag, GridSpec, MuSpec};
use foldcusp::exec::Execution;

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_24x24");
    group.sample_size(10);
    for (name, family) in [("invisible", FamilyTag::Invisible), ("visible", FamilyTag::Visible)] {
        let spec = GridSpec::new(family, 24, MuSpec::Fixed(0.0));
        for exec in [Execution::Sequential, Execution::Parallel] {
            group.bench_with_input(BenchmarkId::new(name, format!("{exec:?}")), &spec, |b, spec| {
                b.iter(|| sweep(spec, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_sweep);
criterion_main!(benches);
