//! Expressions of the letrec language: atoms, suspensions, abstractions,
//! function applications and recursive let.
//!
//! The same tree type covers ground expressions, expressions with
//! unification variables, and expressions whose environments contain
//! environment variables. Which of these is admissible is checked by the
//! individual algorithms.

mod parse;
mod print;
mod subst;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::TermError;
use crate::perm::Permutation;

pub use parse::{parse_expression, ArityTable, Parser};
pub use print::format_env;
pub use subst::{apply_subst, flatten, fresh_atom, Equation, Substitution, VarSupply};
pub(crate) use subst::flatten_expr;

macro_rules! name_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(name: &str) -> Self {
                $name(Arc::from(name))
            }

            pub fn name(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name::new(s)
            }
        }
    };
}

name_type!(
    /// An object-level name. Atoms are bound by `lam` and `letrec` and are
    /// moved around by permutations.
    Atom
);
name_type!(
    /// A unification variable.
    Var
);
name_type!(
    /// A variable standing for a (partial) letrec environment.
    EnvVar
);
name_type!(
    /// A function symbol. Its arity is the number of arguments it is applied to.
    FunSym
);

impl FunSym {
    /// The internal tuple constructor of the given width.
    pub fn tuple(width: usize) -> FunSym {
        FunSym::new(&format!("tuple{width}"))
    }
}

/// An expression of the letrec language.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Atom(Atom),
    /// `π·X`. A plain variable carries the identity permutation.
    Susp(Permutation, Var),
    Lam(Atom, Box<Expr>),
    App(FunSym, Vec<Expr>),
    Letrec(Env, Box<Expr>),
}

/// One item of a letrec environment.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum EnvItem {
    Bind(Atom, Expr),
    Var(Permutation, EnvVar),
}

/// A letrec environment. Binding atoms are pairwise distinct.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Env {
    items: Vec<EnvItem>,
}

impl Env {
    pub fn new(items: Vec<EnvItem>) -> Result<Env, TermError> {
        let mut seen = BTreeSet::new();
        for item in &items {
            if let EnvItem::Bind(a, _) = item {
                if !seen.insert(a.clone()) {
                    return Err(TermError::DuplicateBinder(a.to_string()));
                }
            }
        }
        Ok(Env { items })
    }

    pub fn from_bindings(bindings: Vec<(Atom, Expr)>) -> Result<Env, TermError> {
        Env::new(bindings.into_iter().map(|(a, e)| EnvItem::Bind(a, e)).collect())
    }

    pub(crate) fn new_unchecked(items: Vec<EnvItem>) -> Env {
        debug_assert!(Env::new(items.clone()).is_ok());
        Env { items }
    }

    pub fn empty() -> Env {
        Env { items: Vec::new() }
    }

    pub fn items(&self) -> &[EnvItem] {
        &self.items
    }

    pub fn into_items(self) -> Vec<EnvItem> {
        self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// The letrec-atoms: atoms bound by the `Bind` items.
    pub fn letrec_atoms(&self) -> BTreeSet<Atom> {
        self.bindings().map(|(a, _)| a.clone()).collect()
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&Atom, &Expr)> {
        self.items.iter().filter_map(|item| match item {
            EnvItem::Bind(a, e) => Some((a, e)),
            EnvItem::Var(..) => None,
        })
    }

    pub fn has_env_vars(&self) -> bool {
        self.items.iter().any(|i| matches!(i, EnvItem::Var(..)))
    }

    pub fn permute(&self, p: &Permutation) -> Env {
        Env {
            items: self
                .items
                .iter()
                .map(|item| match item {
                    EnvItem::Bind(a, e) => EnvItem::Bind(p.apply(a), e.permute(p)),
                    EnvItem::Var(q, v) => EnvItem::Var(p.compose(q), v.clone()),
                })
                .collect(),
        }
    }
}

/// The top symbol of an expression, used by clash detection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Top<'a> {
    Var(&'a Var),
    Atom(&'a Atom),
    Fun(&'a FunSym, usize),
    Lam,
    Letrec(usize),
}

/// Free, bound and all atoms of an expression.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AtomSetReport {
    pub free: BTreeSet<Atom>,
    pub bound: BTreeSet<Atom>,
    pub all: BTreeSet<Atom>,
}

impl Expr {
    pub fn atom(name: &str) -> Expr {
        Expr::Atom(Atom::new(name))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Susp(Permutation::identity(), Var::new(name))
    }

    pub fn plain(v: Var) -> Expr {
        Expr::Susp(Permutation::identity(), v)
    }

    pub fn lam(binder: &str, body: Expr) -> Expr {
        Expr::Lam(Atom::new(binder), Box::new(body))
    }

    pub fn app(f: &str, args: Vec<Expr>) -> Expr {
        Expr::App(FunSym::new(f), args)
    }

    pub fn constant(f: &str) -> Expr {
        Expr::App(FunSym::new(f), Vec::new())
    }

    pub fn tuple(args: Vec<Expr>) -> Expr {
        Expr::App(FunSym::tuple(args.len()), args)
    }

    /// Builds a letrec from plain bindings, rejecting duplicate binders.
    pub fn letrec(bindings: Vec<(&str, Expr)>, body: Expr) -> Result<Expr, TermError> {
        let env = Env::from_bindings(bindings.into_iter().map(|(a, e)| (Atom::new(a), e)).collect())?;
        Ok(Expr::Letrec(env, Box::new(body)))
    }

    pub fn as_plain_var(&self) -> Option<&Var> {
        match self {
            Expr::Susp(p, v) if p.is_identity() => Some(v),
            _ => None,
        }
    }

    pub fn is_susp(&self) -> bool {
        matches!(self, Expr::Susp(..))
    }

    pub fn tops(&self) -> Top<'_> {
        match self {
            Expr::Atom(a) => Top::Atom(a),
            Expr::Susp(_, v) => Top::Var(v),
            Expr::Lam(..) => Top::Lam,
            Expr::App(f, args) => Top::Fun(f, args.len()),
            Expr::Letrec(env, _) => Top::Letrec(env.len()),
        }
    }

    /// `π·e`: pushes the permutation down to atoms and suspensions,
    /// renaming bound atoms as well.
    pub fn permute(&self, p: &Permutation) -> Expr {
        if p.is_identity() {
            return self.clone();
        }
        match self {
            Expr::Atom(a) => Expr::Atom(p.apply(a)),
            Expr::Susp(q, v) => Expr::Susp(p.compose(q), v.clone()),
            Expr::Lam(a, e) => Expr::Lam(p.apply(a), Box::new(e.permute(p))),
            Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(|e| e.permute(p)).collect()),
            Expr::Letrec(env, e) => Expr::Letrec(env.permute(p), Box::new(e.permute(p))),
        }
    }

    /// True if no variables and no environment variables occur.
    pub fn is_ground(&self) -> bool {
        match self {
            Expr::Atom(_) => true,
            Expr::Susp(..) => false,
            Expr::Lam(_, e) => e.is_ground(),
            Expr::App(_, args) => args.iter().all(Expr::is_ground),
            Expr::Letrec(env, e) => {
                e.is_ground()
                    && env.items.iter().all(|i| match i {
                        EnvItem::Bind(_, e) => e.is_ground(),
                        EnvItem::Var(..) => false,
                    })
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        self.visit(&mut |e| {
            if let Expr::Susp(_, v) = e {
                out.insert(v.clone());
            }
        });
    }

    pub fn env_vars(&self) -> BTreeSet<EnvVar> {
        let mut out = BTreeSet::new();
        self.visit_envs(&mut |env| {
            for item in env.items() {
                if let EnvItem::Var(_, v) = item {
                    out.insert(v.clone());
                }
            }
        });
        out
    }

    pub fn occurs(&self, var: &Var) -> bool {
        match self {
            Expr::Atom(_) => false,
            Expr::Susp(_, v) => v == var,
            Expr::Lam(_, e) => e.occurs(var),
            Expr::App(_, args) => args.iter().any(|e| e.occurs(var)),
            Expr::Letrec(env, e) => e.occurs(var) || env.bindings().any(|(_, e)| e.occurs(var)),
        }
    }

    /// Pre-order traversal over all subexpressions.
    pub fn visit<F: FnMut(&Expr)>(&self, f: &mut F) {
        f(self);
        match self {
            Expr::Atom(_) | Expr::Susp(..) => {}
            Expr::Lam(_, e) => e.visit(f),
            Expr::App(_, args) => args.iter().for_each(|e| e.visit(f)),
            Expr::Letrec(env, e) => {
                for (_, b) in env.bindings() {
                    b.visit(f);
                }
                e.visit(f);
            }
        }
    }

    fn visit_envs<F: FnMut(&Env)>(&self, f: &mut F) {
        self.visit(&mut |e| {
            if let Expr::Letrec(env, _) = e {
                f(env);
            }
        });
    }

    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Atom(_) | Expr::Susp(..) => 0,
            Expr::Lam(_, e) => 1 + e.depth(),
            Expr::App(_, args) => args.iter().map(|e| 1 + e.depth()).max().unwrap_or(0),
            Expr::Letrec(env, e) => {
                1 + env.bindings().map(|(_, b)| b.depth()).chain(std::iter::once(e.depth())).max().unwrap_or(0)
            }
        }
    }

    /// Free atoms. Variables contribute nothing.
    pub fn free_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Atom>, out: &mut BTreeSet<Atom>) {
        match self {
            Expr::Atom(a) => {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
            Expr::Susp(..) => {}
            Expr::Lam(a, e) => {
                bound.push(a.clone());
                e.collect_free(bound, out);
                bound.pop();
            }
            Expr::App(_, args) => args.iter().for_each(|e| e.collect_free(bound, out)),
            Expr::Letrec(env, e) => {
                let mark = bound.len();
                bound.extend(env.bindings().map(|(a, _)| a.clone()));
                for (_, b) in env.bindings() {
                    b.collect_free(bound, out);
                }
                e.collect_free(bound, out);
                bound.truncate(mark);
            }
        }
    }

    pub fn has_free_atom(&self, a: &Atom) -> bool {
        match self {
            Expr::Atom(b) => a == b,
            Expr::Susp(..) => false,
            Expr::Lam(b, e) => a != b && e.has_free_atom(a),
            Expr::App(_, args) => args.iter().any(|e| e.has_free_atom(a)),
            Expr::Letrec(env, e) => {
                !env.bindings().any(|(b, _)| b == a)
                    && (e.has_free_atom(a) || env.bindings().any(|(_, b)| b.has_free_atom(a)))
            }
        }
    }

    /// Every atom that occurs syntactically, including binders and atoms
    /// mentioned by suspension permutations.
    pub fn all_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_all_atoms(&mut out);
        out
    }

    pub fn collect_all_atoms(&self, out: &mut BTreeSet<Atom>) {
        self.visit(&mut |e| match e {
            Expr::Atom(a) => {
                out.insert(a.clone());
            }
            Expr::Susp(p, _) => out.extend(p.support()),
            Expr::Lam(a, _) => {
                out.insert(a.clone());
            }
            Expr::Letrec(env, _) => {
                for item in env.items() {
                    match item {
                        EnvItem::Bind(a, _) => {
                            out.insert(a.clone());
                        }
                        EnvItem::Var(p, _) => out.extend(p.support()),
                    }
                }
            }
            Expr::App(..) => {}
        });
    }

    pub fn bound_atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| match e {
            Expr::Lam(a, _) => {
                out.insert(a.clone());
            }
            Expr::Letrec(env, _) => out.extend(env.letrec_atoms()),
            _ => {}
        });
        out
    }

    /// Collects function symbols with their arities.
    pub fn fun_syms(&self, out: &mut BTreeMap<FunSym, usize>) {
        self.visit(&mut |e| {
            if let Expr::App(f, args) = e {
                out.insert(f.clone(), args.len());
            }
        });
    }

    /// False iff some letrec has a nonempty sub-environment whose binders
    /// are used neither by the rest of the environment nor by the body.
    pub fn is_garbage_free(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |e| {
            if let Expr::Letrec(env, body) = e {
                if !env_garbage_free(env, body) {
                    ok = false;
                }
            }
        });
        ok
    }
}

fn env_garbage_free(env: &Env, body: &Expr) -> bool {
    let binds: BTreeMap<&Atom, &Expr> = env.bindings().collect();
    let mut reached: BTreeSet<&Atom> = BTreeSet::new();
    let mut work: Vec<&Atom> = Vec::new();
    let body_free = body.free_atoms();
    for a in binds.keys() {
        if body_free.contains(*a) {
            reached.insert(*a);
            work.push(*a);
        }
    }
    while let Some(a) = work.pop() {
        let fa = binds[a].free_atoms();
        for b in binds.keys() {
            if fa.contains(*b) && reached.insert(*b) {
                work.push(*b);
            }
        }
    }
    reached.len() == binds.len()
}

/// Free, bound and all atoms of `e`.
pub fn atoms_of(e: &Expr) -> AtomSetReport {
    AtomSetReport { free: e.free_atoms(), bound: e.bound_atoms(), all: e.all_atoms() }
}

/// Atoms of every expression, in order of first appearance is not kept;
/// the set is sorted.
pub fn atoms_of_all<'a>(exprs: impl IntoIterator<Item = &'a Expr>) -> BTreeSet<Atom> {
    let mut out = BTreeSet::new();
    for e in exprs {
        e.collect_all_atoms(&mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse_expression(s, &mut ArityTable::new()).unwrap()
    }

    #[test]
    fn atoms_of_closed_lambda() {
        let r = atoms_of(&p("(lam a a)"));
        assert!(r.free.is_empty());
        assert_eq!(r.bound, [Atom::new("a")].into_iter().collect());
    }

    #[test]
    fn atoms_of_fixpoint_example() {
        let r = atoms_of(&p("(letrec (c a) (d b) in (True))"));
        assert_eq!(r.free, [Atom::new("a"), Atom::new("b")].into_iter().collect());
        assert_eq!(r.bound, [Atom::new("c"), Atom::new("d")].into_iter().collect());
        assert!(r.free.is_subset(&r.all) && r.bound.is_subset(&r.all));
    }

    #[test]
    fn atoms_of_mutual_recursion() {
        let r = atoms_of(&p("(letrec (a (pair a b)) (b (pair a b)) in b)"));
        assert!(r.free.is_empty());
        assert_eq!(r.bound.len(), 2);
    }

    #[test]
    fn duplicate_binder_is_rejected() {
        assert!(matches!(
            Expr::letrec(vec![("a", Expr::atom("b")), ("a", Expr::atom("c"))], Expr::atom("a")),
            Err(TermError::DuplicateBinder(_))
        ));
    }

    #[test]
    fn garbage_detection() {
        assert!(p("(letrec (a (node a)) in a)").is_garbage_free());
        assert!(!p("(letrec (a b) (c d) in a)").is_garbage_free());
        assert!(!p("(lam x (letrec (a b) (c d) in a))").is_garbage_free());
        assert!(p("(letrec (a c) (c d) in a)").is_garbage_free());
    }

    #[test]
    fn permute_renames_bound_atoms() {
        let pi = Permutation::swap(Atom::new("a"), Atom::new("b"));
        assert_eq!(p("(lam a a)").permute(&pi), p("(lam b b)"));
        assert_eq!(
            p("(letrec (c a) (d b) in (True))").permute(&pi),
            p("(letrec (c b) (d a) in (True))")
        );
    }

    #[test]
    fn permute_composes_suspensions() {
        let ab = Permutation::swap(Atom::new("a"), Atom::new("b"));
        let cd = Permutation::swap(Atom::new("c"), Atom::new("d"));
        let e = Expr::Susp(cd.clone(), Var::new("X"));
        assert_eq!(e.permute(&ab), Expr::Susp(ab.compose(&cd), Var::new("X")));
    }

    #[test]
    fn depth_counts_constructors() {
        assert_eq!(p("a").depth(), 0);
        assert_eq!(p("(f a b)").depth(), 1);
        assert_eq!(p("(f (g a) b)").depth(), 2);
        assert_eq!(p("(c)").depth(), 0);
    }
}
