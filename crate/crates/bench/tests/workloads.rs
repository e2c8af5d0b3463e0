use nomlet::{letrec_match, MatchConfig};
use nomlet_bench::*;

#[test]
fn workloads_are_well_formed() {
    assert_eq!(unify_batch(10, 1), unify_batch(10, 1));
    assert_eq!(match_batch(5, 2).len(), 5);
    assert!(dag_batch(5, 3, 1000).iter().all(|p| p.validate().is_ok() && p.decompressed_size() <= 1000));
    assert_eq!(example3(6).equations.len(), 6);
    assert!(letrec_match(&[hamiltonian("K4")], &MatchConfig::decide()).unwrap().is_solvable());
    assert!(letrec_match(&[isomorphic_pair(6, 9)], &MatchConfig::decide()).unwrap().is_solvable());
}
