use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jobshop::{DisjunctiveRules, DomainStore, Model};
use jobshop_bench::classic;

/// Root fixpoint at the optimal makespan, per rule set.
fn root_fixpoint(c: &mut Criterion) {
    let mut group = c.benchmark_group("root_fixpoint");
    for (name, horizon) in [("ft06", 55), ("ft10", 930), ("la21", 1046)] {
        let model = Model::from_instance(&classic(name));
        for (label, rules) in [("basic", DisjunctiveRules::BASIC), ("all", DisjunctiveRules::ALL)] {
            group.bench_with_input(BenchmarkId::new(label, name), &horizon, |b, &h| {
                b.iter(|| {
                    let mut store = DomainStore::with_horizon(model.clone(), rules, h);
                    store.fixpoint().is_ok()
                })
            });
        }
    }
    group.finish();
}

/// One decision and its propagation, undone again: the inner loop of search.
fn fix_and_restore(c: &mut Criterion) {
    let model = Model::from_instance(&classic("ft10"));
    let mut store = DomainStore::with_horizon(model, DisjunctiveRules::ALL, 1000);
    store.fixpoint().unwrap();
    let ops = store.num_ops();
    c.bench_function("fix_and_restore/ft10", |b| {
        let mut op = 0;
        b.iter(|| {
            let mark = store.mark();
            let est = store.est(op);
            let ok = store.fix_start(op, est).is_ok() && store.propagate().is_ok();
            store.restore(mark);
            op = (op + 1) % ops;
            ok
        })
    });
}

criterion_group!(benches, root_fixpoint, fix_and_restore);
criterion_main!(benches);
