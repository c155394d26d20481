//! Hot-path benchmarks: meander stepping, lazy bar realization, the
//! boundary-layer integral, and the renewal scan.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use stirring::bars::BarSource;
use stirring::bounds::integral_criterion;
use stirring::meander::{run_meander, Horizon, Limits};
use stirring::renewal::{simulate_walk, strong_renewal_points};
use stirring::{BarStore, EdgeId, Tree, TreeSpec};

fn meander_stepping(c: &mut Criterion) {
    let tree = Tree::new(TreeSpec::regular(2, 8192).unwrap());
    let limits = Limits {
        max_events: 10_000,
        horizon: Horizon::Unbounded,
        detect_cycles: false,
    };
    let mut seed = 0u64;
    c.bench_function("meander/10k-events-d2-T5", |b| {
        b.iter(|| {
            seed += 1;
            let store = BarStore::new(5.0, seed).unwrap();
            let traj = run_meander(&tree, &store, tree.root(), 0.0, &limits).unwrap();
            black_box(traj.events.len())
        })
    });
}

fn bar_realization(c: &mut Criterion) {
    let tree = Tree::new(TreeSpec::regular(2, 4096).unwrap());
    // One ray of a thousand edges, realized fresh each iteration.
    let mut ray = Vec::with_capacity(1_000);
    let mut v = tree.root();
    for _ in 0..1_000 {
        let child = tree.child_ids(v).unwrap()[0];
        ray.push(EdgeId { child });
        v = child;
    }
    let mut seed = 0u64;
    c.bench_function("bars/realize-1k-edges-T5", |b| {
        b.iter(|| {
            seed += 1;
            let store = BarStore::new(5.0, seed).unwrap();
            let total: usize = ray
                .iter()
                .map(|&e| store.heights(&tree, e).len())
                .sum();
            black_box(total)
        })
    });
}

fn boundary_layer_integral(c: &mut Criterion) {
    c.bench_function("bounds/integral-criterion-1287", |b| {
        b.iter(|| black_box(integral_criterion(1287, 1.0 / 3.0, 1e-9).unwrap()))
    });
}

fn renewal_scan(c: &mut Criterion) {
    let path = simulate_walk(2.0, 1_000_000, 42).unwrap();
    c.bench_function("renewal/scan-1m", |b| {
        b.iter(|| black_box(strong_renewal_points(&path).len()))
    });
}

criterion_group!(
    benches,
    meander_stepping,
    bar_realization,
    boundary_layer_integral,
    renewal_scan
);
criterion_main!(benches);
