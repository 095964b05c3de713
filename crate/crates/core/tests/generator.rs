use jobshop::generator::{
    chain_decompose, generate_instance, tile_machine_timelines, Flavor, GeneratorError, GeneratorSpec,
};
use jobshop::search::{solve, SearchConfig};
use jobshop::{lower_bound, parse_instance_named, validate_solution, write_instance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ops_per_job(spec: &GeneratorSpec) -> f64 {
    let (inst, _) = generate_instance(spec).unwrap();
    inst.num_ops() as f64 / inst.num_jobs() as f64
}

#[test]
fn every_shape_has_a_tight_certificate() {
    for flavor in [Flavor::LongJobs, Flavor::ShortJobs] {
        for (m, n) in [(1, 1), (2, 7), (5, 100), (10, 500)] {
            for seed in 0..3 {
                let spec = GeneratorSpec::new(flavor, m, n, seed);
                let (inst, cert) = generate_instance(&spec).unwrap();
                assert_eq!(inst.num_ops(), n);
                assert_eq!(inst.num_machines, m);
                assert_eq!(lower_bound(&inst), 600_000, "{}", spec.name());
                assert!(inst.machine_loads().iter().all(|&l| l == 600_000));
                assert!(cert.machine_load_ok);
                assert_eq!(cert.schedule.makespan, 600_000);
                assert_eq!(validate_solution(&inst, &cert.schedule), Ok(()));
                assert!(inst.operations().all(|(_, _, op)| op.duration >= spec.min_dur));
            }
        }
    }
}

#[test]
fn same_seed_same_instance() {
    let spec = GeneratorSpec::new(Flavor::ShortJobs, 5, 100, 9);
    assert_eq!(generate_instance(&spec).unwrap(), generate_instance(&spec).unwrap());
    let other = GeneratorSpec { seed: 10, ..spec };
    assert_ne!(
        generate_instance(&other).unwrap().0,
        generate_instance(&spec).unwrap().0
    );
}

#[test]
fn long_jobs_are_longer_than_short_jobs() {
    for seed in 0..5 {
        let long = ops_per_job(&GeneratorSpec::new(Flavor::LongJobs, 5, 200, seed));
        let short = ops_per_job(&GeneratorSpec::new(Flavor::ShortJobs, 5, 200, seed));
        assert!(long > short, "seed {seed}: {long} vs {short}");
    }
}

#[test]
fn tiles_and_chains_partition_the_segments() {
    let spec = GeneratorSpec::new(Flavor::ShortJobs, 4, 60, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let tiles = tile_machine_timelines(&spec, &mut rng).unwrap();
    assert_eq!(tiles.iter().map(Vec::len).sum::<usize>(), 60);
    for timeline in &tiles {
        assert_eq!(timeline.first().unwrap().start, 0);
        assert_eq!(timeline.last().unwrap().end(), 600_000);
        assert!(timeline.windows(2).all(|w| w[0].end() == w[1].start));
    }
    let chains = chain_decompose(&tiles, &spec, &mut rng);
    let mut seen: Vec<_> = chains.iter().flatten().copied().collect();
    assert_eq!(seen.len(), 60);
    seen.sort_by_key(|s| (s.machine, s.start));
    seen.dedup();
    assert_eq!(seen.len(), 60);
    for chain in &chains {
        assert!(chain.len() <= spec.chain_cap());
        assert!(chain.windows(2).all(|w| w[0].end() <= w[1].start));
    }
}

#[test]
fn text_round_trip_keeps_the_optimum() {
    let spec = GeneratorSpec::new(Flavor::LongJobs, 3, 40, 4);
    let (inst, cert) = generate_instance(&spec).unwrap();
    let back = parse_instance_named(&inst.name, &write_instance(&inst)).unwrap();
    assert_eq!(back, inst);
    assert_eq!(validate_solution(&back, &cert.schedule), Ok(()));
}

#[test]
fn solver_reaches_the_known_optimum() {
    let spec = GeneratorSpec::new(Flavor::ShortJobs, 3, 30, 1);
    let (inst, _) = generate_instance(&spec).unwrap();
    let (inc, _) = solve(&inst, &SearchConfig::default());
    assert!(inc.proven);
    assert_eq!(inc.makespan(), Some(600_000));
}

#[test]
fn bad_specs_are_rejected() {
    let spec = GeneratorSpec::new(Flavor::LongJobs, 0, 10, 0);
    assert_eq!(generate_instance(&spec).unwrap_err(), GeneratorError::NoMachines);
    let spec = GeneratorSpec::new(Flavor::LongJobs, 5, 3, 0);
    assert!(matches!(
        generate_instance(&spec),
        Err(GeneratorError::TooFewOps { .. })
    ));
    assert!(matches!(
        "medium".parse::<Flavor>(),
        Err(GeneratorError::UnknownFlavor(_))
    ));
    assert_eq!("shortJobs".parse::<Flavor>(), Ok(Flavor::ShortJobs));
}
