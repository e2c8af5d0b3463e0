//! Workloads shared by the benchmarks.

use nomlet::gen::{example3_family, random_dag_problem, random_match_problem, random_unify_problem, rng, GenConfig};
use nomlet::oracle::{encode_graph_iso, encode_hamiltonian, random_graph, Graph};
use nomlet::{DagProblem, MatchEquation, UnifyProblem};

/// A fixed batch of random unification problems.
pub fn unify_batch(n: usize, seed: u64) -> Vec<UnifyProblem> {
    let cfg = GenConfig::default();
    let mut r = rng(seed);
    (0..n).map(|_| random_unify_problem(&mut r, &cfg)).collect()
}

pub fn match_batch(n: usize, seed: u64) -> Vec<Vec<MatchEquation>> {
    let cfg = GenConfig::default();
    let mut r = rng(seed);
    (0..n).map(|_| random_match_problem(&mut r, &cfg)).collect()
}

pub fn dag_batch(n: usize, seed: u64, max_size: usize) -> Vec<DagProblem> {
    let cfg = GenConfig::default();
    let mut r = rng(seed);
    (0..n).map(|_| random_dag_problem(&mut r, &cfg, max_size)).collect()
}

pub fn example3(n: usize) -> UnifyProblem {
    example3_family(n).problem
}

pub fn hamiltonian(name: &str) -> MatchEquation {
    encode_hamiltonian(&Graph::from_name(name).expect("known graph")).expect("regular graph")
}

/// A random graph on `n` vertices against a relabelled copy.
pub fn isomorphic_pair(n: usize, seed: u64) -> MatchEquation {
    let mut r = rng(seed);
    let g = random_graph(n, 0.5, &mut r);
    let h = Graph::new(n, g.edges().map(|(u, v)| (n - 1 - u, n - 1 - v))).expect("valid");
    encode_graph_iso(&g, &h).expect("same size")
}
