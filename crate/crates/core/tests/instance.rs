mod common;

use common::{classic, small_instance};
use jobshop::harness::brute_force_optimum;
use jobshop::{
    lower_bound, parse_instance, parse_instance_named, validate_solution, write_instance, Instance, Job, Operation,
    ParseError, Solution, Violation,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn text_round_trip(inst in small_instance(5, 4, 5, 99)) {
        let text = write_instance(&inst);
        let back = parse_instance_named(&inst.name, &text).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn lower_bound_never_exceeds_the_optimum(inst in small_instance(3, 3, 3, 9)) {
        let (opt, witness) = brute_force_optimum(&inst).unwrap();
        prop_assert!(lower_bound(&inst) <= opt);
        prop_assert_eq!(validate_solution(&inst, &witness), Ok(()));
    }
}

#[test]
fn ft06_header_and_bound() {
    let inst = classic("ft06");
    assert_eq!((inst.num_jobs(), inst.num_machines, inst.num_ops()), (6, 6, 36));
    assert!(inst.is_rectangular());
    assert!(!inst.has_recirculation());
    assert!(lower_bound(&inst) <= 55);
}

#[test]
fn malformed_files_are_rejected() {
    assert!(matches!(parse_instance(""), Err(ParseError::MissingHeader)));
    assert!(parse_instance("2 1\n0 3").is_err(), "missing job line");
    assert!(matches!(
        parse_instance("1 1\n1 3"),
        Err(ParseError::MachineOutOfRange { .. })
    ));
    assert!(matches!(
        parse_instance("1 1\n0 -3"),
        Err(ParseError::NonPositiveDuration { .. })
    ));
    assert!(matches!(parse_instance("1 1\n0 x"), Err(ParseError::BadInteger { .. })));
}

#[test]
fn checker_reports_each_kind_of_violation() {
    let inst = Instance::new(
        "v",
        2,
        vec![
            Job::new(vec![Operation::new(0, 3), Operation::new(1, 2)]),
            Job::new(vec![Operation::new(0, 2)]),
        ],
    )
    .unwrap();
    let ok = Solution::from_starts(&inst, vec![vec![0, 3], vec![3]]);
    assert_eq!(ok.makespan, 5);
    assert_eq!(validate_solution(&inst, &ok), Ok(()));

    let shape = Solution::from_starts(&inst, vec![vec![0, 3]]);
    assert!(matches!(validate_solution(&inst, &shape), Err(Violation::Shape { .. })));

    let precedence = Solution::from_starts(&inst, vec![vec![0, 2], vec![3]]);
    assert!(matches!(
        validate_solution(&inst, &precedence),
        Err(Violation::Precedence { .. })
    ));

    let overlap = Solution::from_starts(&inst, vec![vec![0, 3], vec![2]]);
    assert!(matches!(
        validate_solution(&inst, &overlap),
        Err(Violation::Overlap { .. })
    ));

    let negative = Solution::from_starts(&inst, vec![vec![-1, 3], vec![3]]);
    assert!(matches!(
        validate_solution(&inst, &negative),
        Err(Violation::NegativeStart { .. })
    ));

    let mut wrong_makespan = ok.clone();
    wrong_makespan.makespan = 4;
    assert_eq!(
        validate_solution(&inst, &wrong_makespan),
        Err(Violation::Makespan { claimed: 4, actual: 5 })
    );
}

#[test]
fn solution_json_round_trip() {
    let inst = classic("ft06");
    let starts = (0..inst.num_jobs()).map(|j| vec![0; inst.jobs[j].len()]).collect();
    let sol = Solution::from_starts(&inst, starts);
    assert_eq!(Solution::from_json(&sol.to_json()).unwrap(), sol);
}
