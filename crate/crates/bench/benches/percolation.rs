use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use perc_bench::{d7, d7_critical};
use perc_core::cluster::{explore_cluster, Graph};
use perc_core::coupling::coupled_explore;
use perc_core::exact::ExactCounts;
use perc_core::{RandomStream, Torus, TorusSpec, VertexZ};

fn decomposition(c: &mut Criterion) {
    let mut g = c.benchmark_group("decompose");
    for side in [3, 4] {
        let torus = Torus::new(d7(side)).unwrap();
        let p = d7_critical(side);
        g.throughput(Throughput::Elements(torus.bond_count() as u64));
        let mut i = 0;
        g.bench_with_input(BenchmarkId::new("d7", side), &torus, |b, t| {
            b.iter(|| {
                i += 1;
                t.decompose(p, &RandomStream::new(1, i)).stats().max_size
            })
        });
    }
    g.finish();
}

fn exploration(c: &mut Criterion) {
    let mut g = c.benchmark_group("explore");
    let spec = d7(4);
    let torus = Torus::new(spec.clone()).unwrap();
    let o = VertexZ::origin(7);
    let p = 0.07;
    let mut i = 0;
    g.bench_function("lattice_d7", |b| {
        b.iter(|| {
            i += 1;
            explore_cluster(
                Graph::Lattice(&spec),
                &o,
                p,
                &RandomStream::new(2, i),
                1_000_000,
            )
            .unwrap()
            .size()
        })
    });
    g.bench_function("torus_d7_r4", |b| {
        b.iter(|| {
            i += 1;
            explore_cluster(
                Graph::Torus(&torus),
                &o,
                p,
                &RandomStream::new(3, i),
                1_000_000,
            )
            .unwrap()
            .size()
        })
    });
    g.finish();
}

fn coupling(c: &mut Criterion) {
    let spec = d7(4);
    let mut i = 0;
    c.bench_function("coupled_d7_r4", |b| {
        b.iter(|| {
            i += 1;
            coupled_explore(&spec, 0.07, &RandomStream::new(4, i), 1_000_000)
                .unwrap()
                .lattice_cluster
                .len()
        })
    });
}

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("enumerate");
    g.sample_size(10);
    let spec = TorusSpec::nearest_neighbor(2, 3).unwrap();
    g.bench_function("d2_r3", |b| {
        b.iter(|| {
            ExactCounts::enumerate(&spec)
                .unwrap()
                .measure(0.4)
                .unwrap()
                .chi
        })
    });
    g.finish();
}

criterion_group!(benches, decomposition, exploration, coupling, enumeration);
criterion_main!(benches);
