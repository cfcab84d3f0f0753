//! Sequential vs pooled execution of a batch of independent trials.
//! Build with `--no-default-features` to measure the sequential fallback alone.
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use exactnmf::generators::lookup;
use exactnmf::heuristics::{HeuristicKind, HeuristicSpec, RefineConfig};
use exactnmf::{run_trials, Protocol};

fn trials(c: &mut Criterion) {
    let x = lookup("LEDM6").unwrap().matrix;
    let spec = HeuristicSpec::new(HeuristicKind::Rbr).with_refine(RefineConfig::iterations(500));
    // never stops early, so every configuration does the same 16 runs
    let protocol = Protocol::new(16, 17, 16).unwrap();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());

    let mut group = c.benchmark_group("run_trials_ledm6_rbr");
    group.sample_size(10);
    let mut counts = vec![1, cores.max(2), 8];
    counts.dedup();
    for workers in counts {
        group.bench_with_input(BenchmarkId::from_parameter(workers), &workers, |b, &w| {
            b.iter(|| run_trials("LEDM6", &x, 5, &spec, protocol, 1e-6, 0, black_box(w)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, trials);
criterion_main!(benches);
