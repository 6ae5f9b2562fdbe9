use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pepo_bench::{annealed_state, dense_tensor};
use pepo_core::ctm::{ctm_converge, CtmEnvironment};
use pepo_core::evolution::{simple_update_in_place, UpdateParams};
use pepo_core::{build_gate, exact_ising_pepo, hardcore_bh, softcore_bh, truncated_svd, Bond};

fn svd(c: &mut Criterion) {
    let mut group = c.benchmark_group("truncated_svd");
    // theta shapes of a D = 2 and D = 3 soft-core update
    for (name, shape) in [("d3_D2", [18usize, 18]), ("d3_D3", [27, 27]), ("square_64", [64, 64])] {
        let t = dense_tensor(&shape);
        group.bench_with_input(BenchmarkId::from_parameter(name), &t, |b, t| {
            b.iter(|| truncated_svd(t, &[0], 8, 1e-10).unwrap())
        });
    }
    group.finish();
}

fn simple_update(c: &mut Criterion) {
    let mut group = c.benchmark_group("simple_update");
    for (name, model) in [("hardcore", hardcore_bh(1.0, 0.5).unwrap()), ("softcore", softcore_bh(1.0, 40.0, 100.0).unwrap())] {
        let gate = build_gate(&model, 1e-3).unwrap();
        for d_max in [2, 3] {
            let start = annealed_state(&model, 0.5, d_max);
            group.bench_function(BenchmarkId::new(name, format!("D{d_max}")), |b| {
                let mut p = start.clone();
                b.iter(|| simple_update_in_place(&mut p, &gate, Bond::ARight, UpdateParams::default()).unwrap())
            });
        }
    }
    group.finish();
}

fn ctm(c: &mut Criterion) {
    let mut group = c.benchmark_group("ctm");
    group.sample_size(20);
    let p = exact_ising_pepo(0.6).unwrap();
    for chi in [10, 20, 30] {
        group.bench_function(BenchmarkId::new("iteration", chi), |b| {
            let mut env = CtmEnvironment::initial(&p, chi).unwrap();
            b.iter(|| env.iterate().unwrap())
        });
    }
    group.bench_function("converge_ising_chi20", |b| b.iter(|| ctm_converge(&p, 20, 1e-8, 500).unwrap()));
    group.finish();
}

criterion_group!(benches, svd, simple_update, ctm);
criterion_main!(benches);
