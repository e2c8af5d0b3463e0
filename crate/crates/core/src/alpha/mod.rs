//! Alpha-equivalence of ground expressions and freshness constraints.

pub(crate) mod solver;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Failure, TermError};
use crate::term::{Atom, EnvItem, Expr, Var};

/// `a # e`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreshnessConstraint {
    pub atom: Atom,
    pub target: Expr,
}

impl FreshnessConstraint {
    pub fn new(atom: Atom, target: Expr) -> FreshnessConstraint {
        FreshnessConstraint { atom, target }
    }

    pub fn is_atomic(&self) -> bool {
        self.target.as_plain_var().is_some()
    }
}

impl fmt::Display for FreshnessConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} # {}", self.atom, self.target)
    }
}

impl fmt::Debug for FreshnessConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A set of freshness constraints, split into simplified atomic ones and a
/// work-list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreshnessStore {
    atomic: BTreeSet<(Atom, Var)>,
    pending: Vec<FreshnessConstraint>,
}

impl FreshnessStore {
    pub fn new() -> FreshnessStore {
        FreshnessStore::default()
    }

    pub fn push(&mut self, atom: Atom, target: Expr) {
        self.pending.push(FreshnessConstraint::new(atom, target));
    }

    pub fn atomic(&self) -> &BTreeSet<(Atom, Var)> {
        &self.atomic
    }

    pub fn pending(&self) -> &[FreshnessConstraint] {
        &self.pending
    }

    pub fn is_empty(&self) -> bool {
        self.atomic.is_empty() && self.pending.is_empty()
    }

    pub fn insert_atomic(&mut self, atom: Atom, var: Var) -> bool {
        self.atomic.insert((atom, var))
    }

    pub fn remove_var(&mut self, var: &Var) -> Vec<Atom> {
        let hit: Vec<(Atom, Var)> = self.atomic.iter().filter(|(_, v)| v == var).cloned().collect();
        for h in &hit {
            self.atomic.remove(h);
        }
        hit.into_iter().map(|(a, _)| a).collect()
    }

    /// Runs the simplification rules until the work-list is empty.
    pub fn simplify(&mut self) -> Result<(), Failure> {
        while let Some(FreshnessConstraint { atom, target }) = self.pending.pop() {
            match target {
                Expr::Atom(b) => {
                    if b == atom {
                        return Err(Failure::FreshnessFail);
                    }
                }
                Expr::Susp(p, x) => {
                    self.atomic.insert((p.inverse().apply(&atom), x));
                }
                Expr::Lam(b, body) => {
                    if b != atom {
                        self.pending.push(FreshnessConstraint::new(atom, *body));
                    }
                }
                Expr::App(_, args) => {
                    for a in args.into_iter().rev() {
                        self.pending.push(FreshnessConstraint::new(atom.clone(), a));
                    }
                }
                Expr::Letrec(env, body) => {
                    if env.letrec_atoms().contains(&atom) {
                        continue;
                    }
                    self.pending.push(FreshnessConstraint::new(atom.clone(), *body));
                    for item in env.into_items().into_iter().rev() {
                        if let EnvItem::Bind(_, e) = item {
                            self.pending.push(FreshnessConstraint::new(atom.clone(), e));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn simplify_freshness(mut store: FreshnessStore) -> Result<FreshnessStore, Failure> {
    store.simplify()?;
    Ok(store)
}

/// `a # e` for a ground expression.
pub fn check_fresh(a: &Atom, e: &Expr) -> bool {
    !e.has_free_atom(a)
}

fn require_ground(e: &Expr) -> Result<(), TermError> {
    if e.is_ground() {
        Ok(())
    } else {
        Err(TermError::NonGround(e.to_string()))
    }
}

/// Decides `e1 ∼ e2` for ground expressions.
pub fn alpha_eq(e1: &Expr, e2: &Expr) -> Result<bool, TermError> {
    Ok(alpha_witness(e1, e2)?.is_some())
}

/// Like [`alpha_eq`], and on success also returns the pairing of binders of
/// the two top-level letrec environments (empty for other expressions).
pub fn alpha_witness(e1: &Expr, e2: &Expr) -> Result<Option<Vec<(Atom, Atom)>>, TermError> {
    require_ground(e1)?;
    require_ground(e2)?;
    let out = solver::solve(&[(e1.clone(), e2.clone())], solver::Limits::first()).map_err(|e| match e {
        crate::error::EngineError::Term(t) => t,
        other => TermError::Unsupported(other.to_string()),
    })?;
    Ok(out.solutions.into_iter().next().map(|s| s.witness))
}
