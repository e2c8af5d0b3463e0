//! Cross-module invariants checked against the brute-force oracles.

use std::collections::BTreeSet;

use proptest::prelude::*;

use crate::alpha::alpha_eq;
use crate::gen::{self, GenConfig};
use crate::matching::{letrec_dag_match, letrec_match, same_matchers, verify_matcher, MatchConfig};
use crate::oracle::brute_alpha;
use crate::perm::{PermGroup, Permutation};
use crate::term::Atom;
use crate::testing::{arb_ground, arb_perm};
use crate::unify::{instantiate_fresh, unify, verify_solution, UnifyConfig};

fn atoms() -> Vec<Atom> {
    ["a", "b", "c", "d"].into_iter().map(Atom::new).collect()
}

fn closure(gens: &[Permutation]) -> BTreeSet<Permutation> {
    let mut set: BTreeSet<Permutation> = [Permutation::identity()].into();
    let mut frontier = vec![Permutation::identity()];
    while let Some(p) = frontier.pop() {
        for g in gens {
            let q = g.compose(&p);
            if set.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    set
}

fn symmetric_group() -> BTreeSet<Permutation> {
    let a = atoms();
    let cycle = Permutation::from_swaps(vec![
        (a[0].clone(), a[1].clone()),
        (a[1].clone(), a[2].clone()),
        (a[2].clone(), a[3].clone()),
    ]);
    closure(&[Permutation::swap(a[0].clone(), a[1].clone()), cycle])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn alpha_agrees_with_literal_definition(e1 in arb_ground(2), e2 in arb_ground(2)) {
        prop_assert_eq!(alpha_eq(&e1, &e2).unwrap(), brute_alpha(&e1, &e2));
    }

    #[test]
    fn renamed_copies_are_alpha_equivalent(e in arb_ground(3), seed in any::<u64>()) {
        let copy = gen::rename_binders(&mut gen::rng(seed), &e, &atoms());
        prop_assert!(alpha_eq(&e, &copy).unwrap());
        prop_assert!(brute_alpha(&e, &copy));
    }

    #[test]
    fn membership_matches_closure(gens in prop::collection::vec(arb_perm(), 0..4)) {
        let g = PermGroup::generated(atoms(), gens.clone()).unwrap();
        let members = closure(&gens);
        prop_assert_eq!(g.order() as usize, members.len());
        for p in symmetric_group() {
            prop_assert_eq!(g.contains(&p).unwrap(), members.contains(&p));
        }
    }

    #[test]
    fn unifiers_are_sound(seed in any::<u64>()) {
        let problem = gen::random_unify_problem(&mut gen::rng(seed), &GenConfig::default());
        let all = unify(&problem, &UnifyConfig::collect()).unwrap();
        let first = unify(&problem, &UnifyConfig::decide()).unwrap();
        prop_assert_eq!(all.is_solvable(), first.is_solvable());
        for u in &all.unifiers {
            prop_assert!(verify_solution(&problem, &instantiate_fresh(u)).unwrap(), "{}", u);
        }
    }

    #[test]
    fn matchers_are_sound(seed in any::<u64>()) {
        let eqs = gen::random_match_problem(&mut gen::rng(seed), &GenConfig::default());
        let report = letrec_match(&eqs, &MatchConfig::collect()).unwrap();
        for m in &report.matchers {
            prop_assert!(verify_matcher(&eqs, m).unwrap(), "{}", m);
        }
    }

    #[test]
    fn dag_matching_agrees_with_decompression(seed in any::<u64>()) {
        let problem = gen::random_dag_problem(&mut gen::rng(seed), &GenConfig::default(), 300);
        let dag = letrec_dag_match(&problem, &MatchConfig::collect()).unwrap();
        let tree = letrec_match(&problem.decompress().unwrap(), &MatchConfig::collect()).unwrap();
        prop_assert!(same_matchers(&dag.expanded(), &tree.matchers));
    }
}
