//! Proptest strategies shared by unit tests.

use proptest::prelude::*;

use crate::perm::Permutation;
use crate::term::{Atom, Env, Expr, FunSym, Var};

const ATOMS: [&str; 4] = ["a", "b", "c", "d"];

pub fn arb_atom() -> impl Strategy<Value = Atom> {
    prop::sample::select(&ATOMS[..]).prop_map(Atom::new)
}

pub fn arb_swap() -> impl Strategy<Value = Permutation> {
    (arb_atom(), arb_atom()).prop_map(|(a, b)| Permutation::swap(a, b))
}

pub fn arb_perm() -> impl Strategy<Value = Permutation> {
    prop::collection::vec((arb_atom(), arb_atom()), 0..3).prop_map(Permutation::from_swaps)
}

fn tree(leaf: BoxedStrategy<Expr>, depth: u32) -> BoxedStrategy<Expr> {
    leaf.prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            (arb_atom(), inner.clone()).prop_map(|(a, e)| Expr::Lam(a, Box::new(e))),
            inner.clone().prop_map(|e| Expr::App(FunSym::new("f"), vec![e])),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| Expr::App(FunSym::new("g"), vec![x, y])),
            (prop::collection::vec(inner.clone(), 0..3), inner.clone(), prop::sample::subsequence(&ATOMS[..], 2))
                .prop_map(|(es, body, names)| {
                    let bindings = names.iter().zip(es).map(|(a, e)| (Atom::new(a), e)).collect();
                    Expr::Letrec(Env::from_bindings(bindings).unwrap(), Box::new(body))
                }),
        ]
    })
    .boxed()
}

/// Ground expressions over atoms `a..d`, `f/1`, `g/2` and the constant `k`.
pub fn arb_ground(depth: u32) -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![4 => arb_atom().prop_map(Expr::Atom), 1 => Just(Expr::constant("k"))].boxed();
    tree(leaf, depth)
}

/// Like [`arb_ground`] with suspensions of `X` and `Y` as extra leaves.
pub fn arb_expr(depth: u32) -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        3 => arb_atom().prop_map(Expr::Atom),
        1 => Just(Expr::constant("k")),
        2 => (arb_perm(), prop::sample::select(&["X", "Y"][..])).prop_map(|(p, v)| Expr::Susp(p, Var::new(v))),
    ]
    .boxed();
    tree(leaf, depth)
}
