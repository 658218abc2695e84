use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use imbandits::diffusion::estimate_spread_mc;
use imbandits::oracle::{rr_generate, rr_select};
use imbandits::RngStream;
use imbandits_bench::random_graph;

fn bench_spread_mc(c: &mut Criterion) {
    let g = random_graph(500, 4, 1);
    let seeds: Vec<u32> = (0..10).collect();
    let mut group = c.benchmark_group("estimate_spread_mc");
    for n_sims in [1_000usize, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n_sims), &n_sims, |b, &n| {
            b.iter(|| estimate_spread_mc(&g, g.true_probs(), &seeds, n, RngStream::new(7)))
        });
    }
    group.finish();
}

fn bench_rr_oracle(c: &mut Criterion) {
    let g = random_graph(500, 4, 1);
    let mut group = c.benchmark_group("rr_oracle");
    for n_rr in [2_000usize, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(n_rr), &n_rr, |b, &n| {
            b.iter(|| {
                let sets = rr_generate(&g, g.true_probs(), n, RngStream::new(7));
                rr_select(&sets, 10, g.node_count())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_spread_mc, bench_rr_oracle);
criterion_main!(benches);
