//! Slow reference implementations and generators for hard instances.
//!
//! Nothing here shares code with the engines beyond the term type, so the
//! oracles can be used to test them.

mod graph;

use std::collections::{BTreeMap, BTreeSet};

use crate::term::{Atom, EnvItem, Equation, Expr, FunSym, Var};

pub use graph::{
    encode_graph_iso, encode_hamiltonian, has_hamiltonian_cycle, isomorphic, random_graph, random_regular_graph, Graph,
};

/// Bounds for [`enum_ground`].
#[derive(Clone, Debug)]
pub struct GroundEnumConfig {
    pub atoms: Vec<Atom>,
    pub funsyms: Vec<(FunSym, usize)>,
    pub max_depth: usize,
    pub max_env: usize,
}

impl GroundEnumConfig {
    pub fn small(atoms: &[&str], funsyms: &[(&str, usize)], max_depth: usize, max_env: usize) -> GroundEnumConfig {
        GroundEnumConfig {
            atoms: atoms.iter().map(|a| Atom::new(a)).collect(),
            funsyms: funsyms.iter().map(|(f, n)| (FunSym::new(f), *n)).collect(),
            max_depth,
            max_env,
        }
    }

    /// Number of expressions [`enum_ground`] yields, by the counting recurrence.
    pub fn count(&self) -> u128 {
        let na = self.atoms.len() as u128;
        let leaves = na + self.funsyms.iter().filter(|(_, k)| *k == 0).count() as u128;
        let mut n = leaves;
        for _ in 0..self.max_depth {
            let prev = n;
            n = leaves + na * prev;
            for (_, k) in &self.funsyms {
                if *k > 0 {
                    n += prev.pow(*k as u32);
                }
            }
            for m in 1..=self.max_env.min(self.atoms.len()) {
                n += binomial(na, m as u128) * prev.pow(m as u32 + 1);
            }
        }
        n
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn subsets<T: Clone>(items: &[T], max: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for x in items {
        let mut more = Vec::new();
        for s in &out {
            if s.len() < max {
                let mut t = s.clone();
                t.push(x.clone());
                more.push(t);
            }
        }
        out.extend(more);
    }
    out
}

fn tuples(pool: &[Expr], k: usize) -> Vec<Vec<Expr>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                pool.iter().map(move |e| {
                    let mut t = t.clone();
                    t.push(e.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// Every ground expression within the bounds, each exactly once. Letrec
/// environments are listed with their binders in sorted order and are
/// non-empty.
pub fn enum_ground(pair: &GroundEnumConfig) -> std::vec::IntoIter<Expr> {
    let mut leaves: Vec<Expr> = pair.atoms.iter().cloned().map(Expr::Atom).collect();
    leaves.extend(pair.funsyms.iter().filter(|(_, k)| *k == 0).map(|(f, _)| Expr::App(f.clone(), Vec::new())));
    let mut atoms = pair.atoms.clone();
    atoms.sort();
    let binder_sets: Vec<Vec<Atom>> =
        subsets(&atoms, pair.max_env).into_iter().filter(|s| !s.is_empty()).collect();
    let mut level = leaves.clone();
    for _ in 0..pair.max_depth {
        let prev = level;
        level = leaves.clone();
        for a in &pair.atoms {
            level.extend(prev.iter().map(|e| Expr::Lam(a.clone(), Box::new(e.clone()))));
        }
        for (f, k) in &pair.funsyms {
            if *k > 0 {
                level.extend(tuples(&prev, *k).into_iter().map(|args| Expr::App(f.clone(), args)));
            }
        }
        for binders in &binder_sets {
            for mut es in tuples(&prev, binders.len() + 1) {
                let body = es.pop().expect("non-empty");
                let items = binders.iter().cloned().zip(es).map(|(a, e)| EnvItem::Bind(a, e)).collect();
                let env = crate::term::Env::new(items).expect("distinct binders");
                level.push(Expr::Letrec(env, Box::new(body)));
            }
        }
    }
    level.into_iter()
}

/// Free atoms by the textbook recursion.
pub fn naive_free_atoms(e: &Expr) -> BTreeSet<Atom> {
    match e {
        Expr::Atom(a) => [a.clone()].into(),
        Expr::Susp(..) => BTreeSet::new(),
        Expr::Lam(a, b) => {
            let mut s = naive_free_atoms(b);
            s.remove(a);
            s
        }
        Expr::App(_, args) => args.iter().flat_map(naive_free_atoms).collect(),
        Expr::Letrec(env, b) => {
            let mut s = naive_free_atoms(b);
            for item in env.items() {
                if let EnvItem::Bind(_, x) = item {
                    s.extend(naive_free_atoms(x));
                }
            }
            for item in env.items() {
                if let EnvItem::Bind(a, _) = item {
                    s.remove(a);
                }
            }
            s
        }
    }
}

fn swap_expr(a: &Atom, b: &Atom, e: &Expr) -> Expr {
    e.permute(&crate::perm::Permutation::swap(a.clone(), b.clone()))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Alpha-equivalence by the defining clauses, trying every correspondence
/// of letrec bindings. Intended for small inputs only.
pub fn brute_alpha(e1: &Expr, e2: &Expr) -> bool {
    match (e1, e2) {
        (Expr::Atom(a), Expr::Atom(b)) => a == b,
        (Expr::Susp(p, x), Expr::Susp(q, y)) => p == q && x == y,
        (Expr::App(f, xs), Expr::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| brute_alpha(x, y))
        }
        (Expr::Lam(a, s), Expr::Lam(b, t)) => {
            if a == b {
                brute_alpha(s, t)
            } else {
                !naive_free_atoms(t).contains(a) && brute_alpha(s, &swap_expr(a, b, t))
            }
        }
        (Expr::Letrec(env1, r1), Expr::Letrec(env2, r2)) => {
            if env1.len() != env2.len() || env1.has_env_vars() || env2.has_env_vars() {
                return false;
            }
            let left: Vec<(&Atom, &Expr)> = env1.bindings().collect();
            let right: Vec<(&Atom, &Expr)> = env2.bindings().collect();
            let n = left.len();
            let lhs = nest(left.iter().map(|(a, _)| (*a).clone()), left.iter().map(|(_, e)| (*e).clone()), r1);
            permutations(n).into_iter().any(|rho| {
                let rhs = nest(
                    rho.iter().map(|&i| right[i].0.clone()),
                    rho.iter().map(|&i| right[i].1.clone()),
                    r2,
                );
                brute_alpha(&lhs, &rhs)
            })
        }
        _ => false,
    }
}

fn nest(binders: impl DoubleEndedIterator<Item = Atom>, exprs: impl Iterator<Item = Expr>, body: &Expr) -> Expr {
    let mut args: Vec<Expr> = exprs.collect();
    args.push(body.clone());
    let mut e = Expr::App(FunSym::tuple(args.len()), args);
    for a in binders.rev() {
        e = Expr::Lam(a, Box::new(e));
    }
    e
}

/// A unification problem: equations plus freshness constraints `a # e`.
#[derive(Clone, Debug, Default)]
pub struct BruteProblem {
    pub equations: Vec<Equation>,
    pub freshness: Vec<(Atom, Expr)>,
}

fn substitute(e: &Expr, rho: &BTreeMap<Var, Expr>) -> Expr {
    match e {
        Expr::Atom(_) => e.clone(),
        Expr::Susp(p, x) => match rho.get(x) {
            Some(v) => v.permute(p),
            None => e.clone(),
        },
        Expr::Lam(a, b) => Expr::Lam(a.clone(), Box::new(substitute(b, rho))),
        Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(|a| substitute(a, rho)).collect()),
        Expr::Letrec(env, b) => {
            let items = env
                .items()
                .iter()
                .map(|item| match item {
                    EnvItem::Bind(a, x) => EnvItem::Bind(a.clone(), substitute(x, rho)),
                    other => other.clone(),
                })
                .collect();
            Expr::Letrec(crate::term::Env::new(items).expect("binders unchanged"), Box::new(substitute(b, rho)))
        }
    }
}

/// Equation sides over atoms `a, b`, variables `X, Y`, `f/1`, `g/2`, of
/// depth at most 2 and environments of at most 2 bindings.
pub fn small_sides() -> Vec<Expr> {
    let a = || Expr::atom("a");
    let b = || Expr::atom("b");
    let x = || Expr::var("X");
    let y = || Expr::var("Y");
    let sx = || Expr::Susp(crate::perm::Permutation::swap(Atom::new("a"), Atom::new("b")), Var::new("X"));
    let leaves = [a(), b(), x(), y(), sx()];
    let f = |e: Expr| Expr::app("f", vec![e]);
    let g = |l: Expr, r: Expr| Expr::app("g", vec![l, r]);
    let letrec = |bs: Vec<(&str, Expr)>, body: Expr| Expr::letrec(bs, body).expect("distinct binders");
    let mut out: Vec<Expr> = leaves.to_vec();
    for l in &leaves {
        out.push(Expr::lam("a", l.clone()));
        out.push(Expr::lam("b", l.clone()));
        out.push(f(l.clone()));
    }
    for l in [a(), x(), y()] {
        for r in [a(), x(), y()] {
            out.push(g(l.clone(), r));
        }
    }
    for (l, body) in [(x(), a()), (x(), x()), (b(), a()), (b(), x())] {
        out.push(letrec(vec![("a", l)], body));
    }
    for (l, r) in [(x(), y()), (y(), x()), (a(), x()), (x(), x())] {
        out.push(letrec(vec![("a", l), ("b", r)], a()));
    }
    out.extend([
        Expr::lam("a", Expr::lam("b", x())),
        Expr::lam("a", f(x())),
        Expr::lam("b", f(sx())),
        Expr::lam("a", g(a(), x())),
        f(Expr::lam("a", x())),
        f(f(x())),
        g(Expr::lam("a", x()), Expr::lam("b", y())),
        letrec(vec![("a", f(x()))], f(a())),
        letrec(vec![("a", Expr::lam("b", x()))], a()),
        Expr::lam("a", letrec(vec![("b", x())], b())),
    ]);
    out
}

/// Every unordered pair of [`small_sides`] with at least one variable,
/// alone, with `a # X`, and with `c # Y`.
pub fn small_problems() -> Vec<BruteProblem> {
    let sides = small_sides();
    let mut out = Vec::new();
    for i in 0..sides.len() {
        for j in i..sides.len() {
            let eq = Equation::new(sides[i].clone(), sides[j].clone());
            let mut vars = BTreeSet::new();
            eq.lhs.collect_vars(&mut vars);
            eq.rhs.collect_vars(&mut vars);
            if vars.is_empty() {
                continue;
            }
            out.push(BruteProblem { equations: vec![eq.clone()], freshness: vec![] });
            for (atom, var) in [("a", "X"), ("c", "Y")] {
                if vars.contains(&Var::new(var)) {
                    out.push(BruteProblem { equations: vec![eq.clone()], freshness: vec![(Atom::new(atom), Expr::var(var))] });
                }
            }
        }
    }
    out
}

/// Whether a ground assignment solves the problem.
pub fn brute_check(problem: &BruteProblem, rho: &BTreeMap<Var, Expr>) -> bool {
    problem.freshness.iter().all(|(a, e)| !naive_free_atoms(&substitute(e, rho)).contains(a))
        && problem.equations.iter().all(|eq| brute_alpha(&substitute(&eq.lhs, rho), &substitute(&eq.rhs, rho)))
}

/// All assignments of enumerated ground expressions to the problem's
/// variables that solve it.
pub fn brute_solve(problem: &BruteProblem, pair: &GroundEnumConfig) -> Vec<BTreeMap<Var, Expr>> {
    let values: Vec<Expr> = enum_ground(pair).collect();
    brute_solve_over(problem, &values)
}

/// [`brute_solve`] over an explicit value space.
pub fn brute_solve_over(problem: &BruteProblem, values: &[Expr]) -> Vec<BTreeMap<Var, Expr>> {
    let mut vars = BTreeSet::new();
    for eq in &problem.equations {
        eq.lhs.collect_vars(&mut vars);
        eq.rhs.collect_vars(&mut vars);
    }
    for (_, e) in &problem.freshness {
        e.collect_vars(&mut vars);
    }
    let vars: Vec<Var> = vars.into_iter().collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    if !vars.is_empty() && values.is_empty() {
        return out;
    }
    loop {
        let rho: BTreeMap<Var, Expr> = vars.iter().cloned().zip(idx.iter().map(|&i| values[i].clone())).collect();
        if brute_check(problem, &rho) {
            out.push(rho);
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < values.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}
