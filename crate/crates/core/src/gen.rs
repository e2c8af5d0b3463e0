//! Seeded random problem generators.
//!
//! Problems are built from random ground expressions: holes are punched
//! into a ground term to get a pattern, and the other side is an
//! alpha-renamed copy. Such problems are solvable unless a mutation step
//! is applied afterwards.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matching::{DagProblem, MatchEquation};
use crate::perm::Permutation;
use crate::term::{Atom, Env, Equation, Expr, FunSym, Var};
use crate::unify::UnifyProblem;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape parameters for the generators.
#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    /// Atoms are drawn from the first `atoms` of `a, b, c, d, e, …`.
    pub atoms: usize,
    pub max_depth: usize,
    /// Largest letrec environment.
    pub max_env: usize,
    /// Holes punched per side.
    pub holes: usize,
    /// Chance that a hole becomes a suspension with a non-identity swap.
    pub perm_prob: f64,
    /// Chance of adding one freshness constraint.
    pub fresh_prob: f64,
    /// Chance of changing one atom of the right side.
    pub mutate_prob: f64,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig { atoms: 5, max_depth: 3, max_env: 2, holes: 2, perm_prob: 0.3, fresh_prob: 0.3, mutate_prob: 0.2 }
    }
}

impl GenConfig {
    pub fn atom_pool(&self) -> Vec<Atom> {
        (0..self.atoms.max(1)).map(|i| Atom::new(&atom_name(i))).collect()
    }
}

fn atom_name(i: usize) -> String {
    let letters = "abcdefghijklmnopqrstuvwxyz".as_bytes();
    if i < letters.len() {
        (letters[i] as char).to_string()
    } else {
        format!("a{i}")
    }
}

/// A ground expression over `f/1`, `g/2` and the constant `k`.
pub fn random_ground<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Expr {
    let pool = cfg.atom_pool();
    ground_at(rng, &pool, cfg.max_depth, cfg.max_env)
}

fn ground_at<R: Rng>(rng: &mut R, pool: &[Atom], depth: usize, max_env: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.85) { Expr::Atom(pool.choose(rng).unwrap().clone()) } else { Expr::constant("k") };
    }
    let d = depth - 1;
    match rng.gen_range(0..4) {
        0 => Expr::Lam(pool.choose(rng).unwrap().clone(), Box::new(ground_at(rng, pool, d, max_env))),
        1 => Expr::App(FunSym::new("f"), vec![ground_at(rng, pool, d, max_env)]),
        2 => Expr::App(FunSym::new("g"), vec![ground_at(rng, pool, d, max_env), ground_at(rng, pool, d, max_env)]),
        _ if max_env == 0 => Expr::App(FunSym::new("f"), vec![ground_at(rng, pool, d, max_env)]),
        _ => {
            let n = rng.gen_range(1..=max_env.min(pool.len()));
            let binders: Vec<Atom> = pool.choose_multiple(rng, n).cloned().collect();
            let bindings = binders.into_iter().map(|a| (a, ground_at(rng, pool, d, max_env))).collect();
            let body = ground_at(rng, pool, d, max_env);
            Expr::Letrec(Env::from_bindings(bindings).expect("distinct binders"), Box::new(body))
        }
    }
}

/// A random expression `∼`-equal to `e`: binders are renamed to atoms
/// that are not free where they would capture, and letrec bindings are
/// shuffled.
pub fn rename_binders<R: Rng>(rng: &mut R, e: &Expr, pool: &[Atom]) -> Expr {
    match e {
        Expr::Atom(_) | Expr::Susp(..) => e.clone(),
        Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(|x| rename_binders(rng, x, pool)).collect()),
        Expr::Lam(a, b) => {
            let free = b.free_atoms();
            let ok: Vec<&Atom> = pool.iter().filter(|c| *c == a || !free.contains(*c)).collect();
            let c = (*ok.choose(rng).unwrap()).clone();
            let b = b.permute(&Permutation::swap(a.clone(), c.clone()));
            Expr::Lam(c, Box::new(rename_binders(rng, &b, pool)))
        }
        Expr::Letrec(env, _) => {
            let mut cur = e.clone();
            if let Some((a, _)) = env.bindings().next() {
                let free = e.free_atoms();
                let ok: Vec<&Atom> = pool.iter().filter(|c| !free.contains(*c)).collect();
                if let Some(c) = ok.choose(rng) {
                    cur = e.permute(&Permutation::swap(a.clone(), (*c).clone()));
                }
            }
            let Expr::Letrec(env, body) = cur else { unreachable!() };
            let mut items: Vec<(Atom, Expr)> =
                env.bindings().map(|(a, x)| (a.clone(), rename_binders(rng, x, pool))).collect();
            items.shuffle(rng);
            Expr::Letrec(Env::from_bindings(items).expect("distinct binders"), Box::new(rename_binders(rng, &body, pool)))
        }
    }
}

/// Replaces one atom occurrence by a different atom of the pool.
pub fn mutate_atom<R: Rng>(rng: &mut R, e: &Expr, pool: &[Atom]) -> Expr {
    let mut count = 0;
    e.visit(&mut |x| {
        if matches!(x, Expr::Atom(_)) {
            count += 1;
        }
    });
    if count == 0 || pool.len() < 2 {
        return Expr::App(FunSym::new("f"), vec![e.clone()]);
    }
    let target = rng.gen_range(0..count);
    let mut k = 0;
    replace_atom(rng, e, pool, target, &mut k)
}

fn replace_atom<R: Rng>(rng: &mut R, e: &Expr, pool: &[Atom], target: usize, k: &mut usize) -> Expr {
    match e {
        Expr::Atom(a) => {
            let here = *k;
            *k += 1;
            if here == target {
                let others: Vec<&Atom> = pool.iter().filter(|c| *c != a).collect();
                Expr::Atom((*others.choose(rng).unwrap()).clone())
            } else {
                e.clone()
            }
        }
        Expr::Susp(..) => e.clone(),
        Expr::Lam(a, b) => Expr::Lam(a.clone(), Box::new(replace_atom(rng, b, pool, target, k))),
        Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(|x| replace_atom(rng, x, pool, target, k)).collect()),
        Expr::Letrec(env, b) => {
            let items = env.bindings().map(|(a, x)| (a.clone(), replace_atom(rng, x, pool, target, k))).collect();
            Expr::Letrec(Env::from_bindings(items).expect("same binders"), Box::new(replace_atom(rng, b, pool, target, k)))
        }
    }
}

/// Hole table shared by the sides of one problem: variable name and the
/// subterm it stands for.
#[derive(Default)]
struct Holes {
    values: Vec<(Var, Expr)>,
}

impl Holes {
    fn hole<R: Rng>(&mut self, rng: &mut R, sub: &Expr, cfg: &GenConfig, pool: &[Atom]) -> Expr {
        let pi = if pool.len() >= 2 && rng.gen_bool(cfg.perm_prob) {
            let two: Vec<&Atom> = pool.choose_multiple(rng, 2).collect();
            Permutation::swap(two[0].clone(), two[1].clone())
        } else {
            Permutation::identity()
        };
        for (x, v) in &self.values {
            if v.permute(&pi) == *sub {
                return Expr::Susp(pi, x.clone());
            }
        }
        let x = Var::new(&format!("X{}", self.values.len() + 1));
        self.values.push((x.clone(), sub.permute(&pi.inverse())));
        Expr::Susp(pi, x)
    }

    fn vars(&self) -> Vec<Var> {
        self.values.iter().map(|(x, _)| x.clone()).collect()
    }
}

fn punch<R: Rng>(rng: &mut R, e: &Expr, cfg: &GenConfig, pool: &[Atom], holes: &mut Holes) -> Expr {
    let size = e.size();
    let n = cfg.holes.min(size);
    let mut at: BTreeSet<usize> = BTreeSet::new();
    while at.len() < n {
        at.insert(rng.gen_range(0..size));
    }
    let mut k = 0;
    punch_at(rng, e, &at, &mut k, cfg, pool, holes)
}

fn punch_at<R: Rng>(
    rng: &mut R,
    e: &Expr,
    at: &BTreeSet<usize>,
    k: &mut usize,
    cfg: &GenConfig,
    pool: &[Atom],
    holes: &mut Holes,
) -> Expr {
    let here = *k;
    if at.contains(&here) {
        *k += e.size();
        return holes.hole(rng, e, cfg, pool);
    }
    *k += 1;
    match e {
        Expr::Atom(_) | Expr::Susp(..) => e.clone(),
        Expr::Lam(a, b) => Expr::Lam(a.clone(), Box::new(punch_at(rng, b, at, k, cfg, pool, holes))),
        Expr::App(f, args) => {
            Expr::App(f.clone(), args.iter().map(|x| punch_at(rng, x, at, k, cfg, pool, holes)).collect())
        }
        Expr::Letrec(env, b) => {
            let items = env.bindings().map(|(a, x)| (a.clone(), punch_at(rng, x, at, k, cfg, pool, holes))).collect();
            let body = punch_at(rng, b, at, k, cfg, pool, holes);
            Expr::Letrec(Env::from_bindings(items).expect("same binders"), Box::new(body))
        }
    }
}

/// One or two equations between punched copies of random ground terms,
/// with an optional freshness constraint.
pub fn random_unify_problem<R: Rng>(rng: &mut R, cfg: &GenConfig) -> UnifyProblem {
    let pool = cfg.atom_pool();
    let mut holes = Holes::default();
    let mut equations = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let g = random_ground(rng, cfg);
        let lhs = punch(rng, &g, cfg, &pool, &mut holes);
        let renamed = rename_binders(rng, &g, &pool);
        let mut rhs = punch(rng, &renamed, cfg, &pool, &mut holes);
        if rng.gen_bool(cfg.mutate_prob) {
            rhs = mutate_atom(rng, &rhs, &pool);
        }
        equations.push(Equation::new(lhs, rhs));
    }
    let mut problem = UnifyProblem::new(equations);
    let vars = holes.vars();
    if !vars.is_empty() && rng.gen_bool(cfg.fresh_prob) {
        let x = vars.choose(rng).unwrap().clone();
        let a = pool.choose(rng).unwrap().clone();
        problem.freshness.push((a, Expr::plain(x)));
    }
    problem
}

/// Match equations whose left sides are punched ground terms and whose
/// right sides are renamed copies.
pub fn random_match_problem<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Vec<MatchEquation> {
    let pool = cfg.atom_pool();
    let mut holes = Holes::default();
    let mut out = Vec::new();
    for _ in 0..rng.gen_range(1..=2) {
        let g = random_ground(rng, cfg);
        let lhs = punch(rng, &g, cfg, &pool, &mut holes);
        let mut rhs = rename_binders(rng, &g, &pool);
        if rng.gen_bool(cfg.mutate_prob) {
            rhs = mutate_atom(rng, &rhs, &pool);
        }
        out.push(MatchEquation::new(lhs, rhs));
    }
    out
}

fn node_expr<R: Rng>(rng: &mut R, pool: &[Atom], nodes: &[Var], depth: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.2) {
        if !nodes.is_empty() && rng.gen_bool(0.6) {
            return Expr::plain(nodes.choose(rng).unwrap().clone());
        }
        return Expr::Atom(pool.choose(rng).unwrap().clone());
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 => Expr::Lam(pool.choose(rng).unwrap().clone(), Box::new(node_expr(rng, pool, nodes, d))),
        1 => Expr::App(FunSym::new("f"), vec![node_expr(rng, pool, nodes, d)]),
        2 => {
            let x = node_expr(rng, pool, nodes, d);
            Expr::App(FunSym::new("g"), vec![x.clone(), x])
        }
        3 => Expr::App(FunSym::new("g"), vec![node_expr(rng, pool, nodes, d), node_expr(rng, pool, nodes, d)]),
        _ => {
            let a = pool.choose(rng).unwrap().clone();
            let env = Env::from_bindings(vec![(a, node_expr(rng, pool, nodes, d))]).expect("one binder");
            Expr::Letrec(env, Box::new(node_expr(rng, pool, nodes, d)))
        }
    }
}

/// A dag matching problem: shared ground nodes, right sides built over
/// them, and left sides punched from the expanded right sides.
///
/// Problems whose expansion exceeds `max_size` are redrawn with fewer
/// nodes, so the result always satisfies the bound.
pub fn random_dag_problem<R: Rng>(rng: &mut R, cfg: &GenConfig, max_size: usize) -> DagProblem {
    let pool = cfg.atom_pool();
    let mut node_count = rng.gen_range(1..=8usize);
    loop {
        let mut nodes: Vec<(Var, Expr)> = Vec::new();
        for i in 0..node_count {
            let names: Vec<Var> = nodes.iter().map(|(n, _)| n.clone()).collect();
            let e = node_expr(rng, &pool, &names, cfg.max_depth);
            nodes.push((Var::new(&format!("N{i}")), e));
        }
        let names: Vec<Var> = nodes.iter().map(|(n, _)| n.clone()).collect();
        let mut problem = DagProblem { nodes, equations: Vec::new() };
        let mut holes = Holes::default();
        let subst: crate::term::Substitution = problem.nodes.iter().cloned().collect();
        let mut big = false;
        for _ in 0..rng.gen_range(1..=2) {
            let rhs = node_expr(rng, &pool, &names, 2);
            let mut probe = problem.clone();
            probe.equations.push(MatchEquation::new(Expr::constant("k"), rhs.clone()));
            if probe.decompressed_size() * 2 > max_size {
                big = true;
                break;
            }
            let full = subst.resolve(&rhs);
            let renamed = rename_binders(rng, &full, &pool);
            let lhs = punch(rng, &renamed, cfg, &pool, &mut holes);
            let rhs = if rng.gen_bool(cfg.mutate_prob) { mutate_atom(rng, &rhs, &pool) } else { rhs };
            problem.equations.push(MatchEquation::new(lhs, rhs));
        }
        if !big && problem.decompressed_size() <= max_size {
            return problem;
        }
        node_count = node_count.saturating_sub(1).max(1);
    }
}

/// The family `{Xn ≐ π·Xn, Xn ≐ f X(n-1) ρn·X(n-1), …, X2 ≐ f X1 ρ2·X1}`
/// whose fixpoint equations on `X1` are all `ρ⁻¹πρ` with `ρ` a product of
/// a subsequence of `ρn, …, ρ2`.
#[derive(Clone, Debug)]
pub struct Example3 {
    pub problem: UnifyProblem,
    pub pi: Permutation,
    /// `ρ2, …, ρn`.
    pub rhos: Vec<Permutation>,
    pub support: Vec<Atom>,
}

/// Size of the atom support of [`example3_family`].
pub const EXAMPLE3_ATOMS: usize = 10;
/// Up to this size all `2^(n-1)` conjugates are pairwise distinct.
pub const EXAMPLE3_DISTINCT_UP_TO: usize = 10;

fn random_perm<R: Rng>(rng: &mut R, support: &[Atom]) -> Permutation {
    let mut img = support.to_vec();
    img.shuffle(rng);
    Permutation::from_map(support.iter().cloned().zip(img).collect()).expect("bijection")
}

fn cycle(support: &[Atom]) -> Permutation {
    let n = support.len();
    let map: BTreeMap<Atom, Atom> = (0..n).map(|i| (support[i].clone(), support[(i + 1) % n].clone())).collect();
    Permutation::from_map(map).expect("bijection")
}

/// The fixpoint permutations on `X1` that the rules derive for the family
/// built from `pi` and `rhos` (`ρ2, …, ρn`), as a set.
pub fn example3_conjugates(pi: &Permutation, rhos: &[Permutation]) -> BTreeSet<Permutation> {
    let mut level: BTreeSet<Permutation> = [pi.clone()].into();
    for rho in rhos.iter().rev() {
        let next: Vec<Permutation> = level.iter().map(|s| rho.inverse().compose(s).compose(rho)).collect();
        level.extend(next);
    }
    level
}

fn example3_perms() -> (Permutation, Vec<Permutation>, Vec<Atom>) {
    let support: Vec<Atom> = (1..=EXAMPLE3_ATOMS).map(|i| Atom::new(&format!("a{i}"))).collect();
    let pi = cycle(&support);
    for seed in 0.. {
        let mut r = rng(seed);
        let rhos: Vec<Permutation> = (0..EXAMPLE3_DISTINCT_UP_TO - 1).map(|_| random_perm(&mut r, &support)).collect();
        if example3_conjugates(&pi, &rhos).len() == 1 << rhos.len() {
            return (pi, rhos, support);
        }
    }
    unreachable!()
}

/// The size-`n` member of the family (`n ≥ 1`). The permutations of the
/// size-`n` member are a prefix of those of every larger member.
pub fn example3_family(n: usize) -> Example3 {
    let (pi, mut rhos, support) = example3_perms();
    let mut r = rng(u64::MAX);
    while rhos.len() + 1 < n {
        rhos.push(random_perm(&mut r, &support));
    }
    rhos.truncate(n.saturating_sub(1));
    let x = |i: usize| Var::new(&format!("X{i}"));
    let mut equations = vec![Equation::new(Expr::plain(x(n)), Expr::Susp(pi.clone(), x(n)))];
    for k in (2..=n).rev() {
        let rho = rhos[k - 2].clone();
        let rhs = Expr::App(FunSym::new("f"), vec![Expr::plain(x(k - 1)), Expr::Susp(rho, x(k - 1))]);
        equations.push(Equation::new(Expr::plain(x(k)), rhs));
    }
    Example3 { problem: UnifyProblem::new(equations), pi, rhos, support }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alpha::alpha_eq;

    #[test]
    fn renaming_preserves_alpha() {
        let cfg = GenConfig::default();
        let pool = cfg.atom_pool();
        let mut r = rng(7);
        for _ in 0..300 {
            let g = random_ground(&mut r, &cfg);
            let h = rename_binders(&mut r, &g, &pool);
            assert!(alpha_eq(&g, &h).unwrap(), "{g} vs {h}");
            assert!(g.depth() <= cfg.max_depth + 1);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let cfg = GenConfig::default();
        let a: Vec<_> = (0..20).map(|_| ()).scan(rng(3), |r, _| Some(random_unify_problem(r, &cfg))).collect();
        let b: Vec<_> = (0..20).map(|_| ()).scan(rng(3), |r, _| Some(random_unify_problem(r, &cfg))).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn dag_problems_respect_size() {
        let cfg = GenConfig::default();
        let mut r = rng(11);
        for _ in 0..50 {
            let p = random_dag_problem(&mut r, &cfg, 1000);
            p.validate().unwrap();
            assert!(p.decompressed_size() <= 1000);
        }
    }

    #[test]
    fn example3_shape() {
        let fam = example3_family(4);
        assert_eq!(fam.problem.equations.len(), 4);
        assert_eq!(fam.rhos.len(), 3);
        assert_eq!(example3_conjugates(&fam.pi, &fam.rhos).len(), 8);
        let big = example3_family(12);
        assert_eq!(big.rhos[..3], fam.rhos[..]);
    }
}
