#![allow(dead_code)]

use jobshop::{Instance, Job, Operation, Time};
use proptest::prelude::*;

/// Random small job shop: up to `max_jobs` chains of 1..=`max_len` ops on
/// `1..=max_machines` machines (recirculation allowed), durations in
/// `1..=max_dur`.
pub fn small_instance(
    max_jobs: usize,
    max_machines: usize,
    max_len: usize,
    max_dur: Time,
) -> impl Strategy<Value = Instance> {
    (1..=max_machines).prop_flat_map(move |m| {
        let op = (0..m, 1..=max_dur).prop_map(|(machine, d)| Operation::new(machine, d));
        let job = prop::collection::vec(op, 1..=max_len).prop_map(Job::new);
        prop::collection::vec(job, 1..=max_jobs).prop_map(move |jobs| Instance::new("rand", m, jobs).unwrap())
    })
}

/// Loads a bundled classic instance, dropping zero-length ops.
pub fn classic(name: &str) -> Instance {
    let path = format!("{}/data/classic/{name}.jss", env!("CARGO_MANIFEST_DIR"));
    jobshop::read_instance_with(
        &path,
        jobshop::ParseOptions {
            zero_durations: jobshop::ZeroDurations::Drop,
        },
    )
    .unwrap()
}

/// Feasible start-time range of every op of a one-machine pool, by
/// enumerating all orders. `None` when no order is feasible.
/// Pools are `(est, dur, lct)`.
pub fn pool_start_ranges(pool: &[(Time, Time, Time)]) -> Option<Vec<(Time, Time)>> {
    let n = pool.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut ranges: Vec<(Time, Time)> = vec![(Time::MAX, Time::MIN); n];
    let mut any = false;
    loop {
        // earliest schedule for this order
        let mut t = Time::MIN;
        let mut earliest = vec![0; n];
        let mut ok = true;
        for &i in &perm {
            let (est, dur, lct) = pool[i];
            let s = t.max(est);
            if s + dur > lct {
                ok = false;
                break;
            }
            earliest[i] = s;
            t = s + dur;
        }
        if ok {
            any = true;
            // latest schedule for the same order
            let mut t = Time::MAX;
            let mut latest = vec![0; n];
            for &i in perm.iter().rev() {
                let (_, dur, lct) = pool[i];
                let e = t.min(lct);
                latest[i] = e - dur;
                t = e - dur;
            }
            for i in 0..n {
                ranges[i].0 = ranges[i].0.min(earliest[i]);
                ranges[i].1 = ranges[i].1.max(latest[i]);
            }
        }
        if !next_perm(&mut perm) {
            break;
        }
    }
    any.then_some(ranges)
}

fn next_perm(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// One-machine store holding the pool, one single-op job per activity.
pub fn pool_store(pool: &[(Time, Time, Time)], rules: jobshop::DisjunctiveRules) -> jobshop::DomainStore {
    let jobs = pool
        .iter()
        .map(|&(_, d, _)| Job::new(vec![Operation::new(0, d)]))
        .collect();
    let inst = Instance::new("pool", 1, jobs).unwrap();
    let horizon = pool.iter().map(|p| p.2).max().unwrap();
    let mut store = jobshop::DomainStore::with_horizon(jobshop::Model::from_instance(&inst), rules, horizon);
    for (i, &(est, _, lct)) in pool.iter().enumerate() {
        store.set_est(i, est).unwrap();
        store.set_lct(i, lct).unwrap();
    }
    store
}
