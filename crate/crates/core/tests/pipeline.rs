//! The reduction pipeline end to end.

use maxmin_core::cds::{solve_bruteforce, solve_structured, validate_instance_allowing, verify_solution, CdsInstance};
use maxmin_core::cnf::{figure_formula, parse_dimacs, Cnf3};
use maxmin_core::geom::int;
use maxmin_core::harness::{check_seeds, random_small_planar_cnf, sat_bruteforce};
use maxmin_core::reduction::points::{audit_perturbation, point_count};
use maxmin_core::reduction::*;
use num_bigint::BigInt;

fn all_assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << n).map(move |m| (0..n).map(|i| m >> i & 1 == 1).collect())
}

#[test]
fn encode_decode_round_trip_on_random_formulas() {
    for seed in 0..150 {
        let f = random_small_planar_cnf(seed, 3, 2);
        let (inst, cert) = compile_3sat_to_cds(&f, None).unwrap();
        for a in all_assignments(f.num_vars) {
            match encode_assignment(&cert, &a) {
                Ok(sol) => {
                    assert!(verify_solution(&inst, &sol), "seed {seed}");
                    let back = decode_solution(&cert, &sol).unwrap();
                    // unused variables decode to false
                    for v in 0..f.num_vars {
                        if !cert.variables[v].segments.is_empty() {
                            assert_eq!(back[v], a[v]);
                        }
                    }
                }
                Err(ReductionError::NotSatisfying { .. }) => assert!(!f.eval(&a)),
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn seeds_are_consistent() {
    for r in check_seeds(120) {
        let r = r.unwrap();
        assert!(r.consistent, "{r:?}");
    }
}

#[test]
fn reports_are_deterministic() {
    let a: Vec<String> = check_seeds(20).into_iter().map(|r| serde_json::to_string(&r.unwrap()).unwrap()).collect();
    let b: Vec<String> = check_seeds(20).into_iter().map(|r| serde_json::to_string(&r.unwrap()).unwrap()).collect();
    assert_eq!(a, b);
}

#[test]
fn figure_compilation() {
    let f = figure_formula();
    let (inst, cert) = compile_3sat_to_cds(&f, None).unwrap();
    let var_segments: usize = cert.variables.iter().map(|g| g.segments.len()).sum();
    let var_targets: usize = cert.variables.iter().map(|g| g.corner_targets.len()).sum();
    let clause_segments: usize = cert.clauses.iter().map(|c| c.segments.len()).sum();
    assert_eq!((var_segments, var_targets, clause_segments, cert.clauses.len()), (18, 18, 9, 3));
    for g in &cert.variables {
        assert_eq!(g.segments_of(Parity::Even).len(), g.segments_of(Parity::Odd).len());
    }
    assert!(validate_instance_allowing(&inst, &Default::default()).is_empty());
    let sol = solve_structured(&inst, &cert).unwrap().unwrap();
    assert!(f.eval(&decode_solution(&cert, &sol).unwrap()));
    assert!(sat_bruteforce(&f).unwrap().is_some());

    let perturbed = perturb(&inst).unwrap();
    assert!(audit_perturbation(&inst, &perturbed).is_ok());
    assert!(cert.check_against(&perturbed).is_ok());
    assert!(compute_clearance(&perturbed).unwrap() > int(0));
}

#[test]
fn figure_from_dimacs_with_hints() {
    let text = "c fig 1\nc layout clause 1 side=above order=1\nc layout clause 2 side=below order=1\nc layout clause 3 side=below order=2\np cnf 4 3\n1 2 -3 0\n-2 3 -4 0\n-1 2 4 0\n";
    let (f, hints) = parse_dimacs(text).unwrap();
    assert_eq!(f, figure_formula());
    let l = layout_incidence_graph(&f, Some(&hints)).unwrap();
    assert!(l.crossing_defects().is_empty());
    assert!(compile_3sat_to_cds(&f, Some(&hints)).is_ok());
}

#[test]
fn gap_mode_inequality() {
    let f = Cnf3::from_dimacs_clauses(2, &[&[1, -2]]).unwrap();
    let (inst, _) = compile_3sat_to_cds(&f, None).unwrap();
    let gap: GapPoly = "n^2".parse().unwrap();
    let (_, pi) = build_point_instance(&inst, Some(&gap)).unwrap();
    let n = pi.len();
    assert_eq!(n, point_count(&inst));
    let ratio = &pi.delta_sq / &pi.epsilon_sq;
    let n4 = maxmin_core::geom::Rational::from_integer(BigInt::from(n).pow(4));
    assert!(ratio > n4);
    assert!(pi.invariant_violations().is_empty());
}

#[test]
fn unsatisfiable_formula_has_no_cover() {
    let f = Cnf3::from_dimacs_clauses(2, &[&[1, 2], &[-1], &[-2]]).unwrap();
    let (inst, cert) = compile_3sat_to_cds(&f, None).unwrap();
    assert_eq!(solve_structured(&inst, &cert).unwrap(), None);
    assert_eq!(solve_bruteforce(&inst, 24).unwrap(), None);
}

#[test]
fn artifacts_round_trip_through_json() {
    let (inst, cert) = compile_3sat_to_cds(&Cnf3::from_dimacs_clauses(1, &[&[-1]]).unwrap(), None).unwrap();
    let back: CdsInstance = serde_json::from_str(&serde_json::to_string(&inst).unwrap()).unwrap();
    assert_eq!(back, inst);
    let cert2: GadgetCertificate = serde_json::from_str(&serde_json::to_string(&cert).unwrap()).unwrap();
    assert_eq!(cert2, cert);
    let (_, pi) = build_point_instance(&inst, None).unwrap();
    let pi2: PointInstance = serde_json::from_str(&serde_json::to_string(&pi).unwrap()).unwrap();
    assert_eq!(pi2, pi);
    assert!(pi2.invariant_violations().is_empty());
}

#[test]
fn degree_one_instances_are_sound() {
    for f in [
        Cnf3::from_dimacs_clauses(1, &[&[1]]).unwrap(),
        Cnf3::from_dimacs_clauses(3, &[&[1, -2, 3]]).unwrap(),
    ] {
        let (inst, _) = compile_3sat_to_cds(&f, None).unwrap();
        let (_, pi) = build_point_instance(&inst, None).unwrap();
        assert!(separation_soundness_audit(&pi).is_empty());
    }
}
