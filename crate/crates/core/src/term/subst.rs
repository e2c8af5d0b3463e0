use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::{Atom, Env, EnvItem, Expr, Var};

/// A substitution stored as a list of single replacements. A replacement
/// may mention variables that are bound by other entries; [`Substitution::resolve`]
/// follows these references, so shared right-hand sides stay shared until
/// the substitution is applied.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct Substitution {
    entries: Vec<(Var, Expr)>,
    index: BTreeMap<Var, usize>,
}

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    /// Adds `var ↦ expr`. Rebinding a variable replaces the earlier entry.
    pub fn bind(&mut self, var: Var, expr: Expr) {
        match self.index.get(&var) {
            Some(&i) => self.entries[i].1 = expr,
            None => {
                self.index.insert(var.clone(), self.entries.len());
                self.entries.push((var, expr));
            }
        }
    }

    pub fn get(&self, var: &Var) -> Option<&Expr> {
        self.index.get(var).map(|&i| &self.entries[i].1)
    }

    pub fn contains(&self, var: &Var) -> bool {
        self.index.contains_key(var)
    }

    pub fn entries(&self) -> &[(Var, Expr)] {
        &self.entries
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.entries.iter().map(|(v, _)| v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Applies the substitution exhaustively. The substitution must be acyclic.
    pub fn resolve(&self, e: &Expr) -> Expr {
        let mut memo = HashMap::new();
        self.resolve_memo(e, &mut memo)
    }

    pub fn resolve_var(&self, v: &Var) -> Expr {
        self.resolve(&Expr::plain(v.clone()))
    }

    fn resolve_memo(&self, e: &Expr, memo: &mut HashMap<Var, Expr>) -> Expr {
        match e {
            Expr::Atom(_) => e.clone(),
            Expr::Susp(p, v) => match self.get(v) {
                None => e.clone(),
                Some(rhs) => {
                    let val = match memo.get(v) {
                        Some(val) => val.clone(),
                        None => {
                            let val = self.resolve_memo(&rhs.clone(), memo);
                            memo.insert(v.clone(), val.clone());
                            val
                        }
                    };
                    val.permute(p)
                }
            },
            Expr::Lam(a, b) => Expr::Lam(a.clone(), Box::new(self.resolve_memo(b, memo))),
            Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(|a| self.resolve_memo(a, memo)).collect()),
            Expr::Letrec(env, b) => {
                let items = env
                    .items()
                    .iter()
                    .map(|item| match item {
                        EnvItem::Bind(a, x) => EnvItem::Bind(a.clone(), self.resolve_memo(x, memo)),
                        other => other.clone(),
                    })
                    .collect();
                Expr::Letrec(Env::new_unchecked(items), Box::new(self.resolve_memo(b, memo)))
            }
        }
    }

    /// Replaces occurrences of `var` only, without following other entries.
    pub fn replace_var(e: &Expr, var: &Var, by: &Expr) -> Expr {
        match e {
            Expr::Susp(p, v) if v == var => by.permute(p),
            Expr::Atom(_) | Expr::Susp(..) => e.clone(),
            Expr::Lam(a, b) => Expr::Lam(a.clone(), Box::new(Self::replace_var(b, var, by))),
            Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(|a| Self::replace_var(a, var, by)).collect()),
            Expr::Letrec(env, b) => {
                let items = env
                    .items()
                    .iter()
                    .map(|item| match item {
                        EnvItem::Bind(a, x) => EnvItem::Bind(a.clone(), Self::replace_var(x, var, by)),
                        other => other.clone(),
                    })
                    .collect();
                Expr::Letrec(Env::new_unchecked(items), Box::new(Self::replace_var(b, var, by)))
            }
        }
    }
}

impl FromIterator<(Var, Expr)> for Substitution {
    fn from_iter<T: IntoIterator<Item = (Var, Expr)>>(iter: T) -> Self {
        let mut s = Substitution::new();
        for (v, e) in iter {
            s.bind(v, e);
        }
        s
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter().map(|(v, e)| (v, e))).finish()
    }
}

/// `eθ`: each suspension `π·X` with `X` bound becomes `π·(Xθ)`.
pub fn apply_subst(e: &Expr, theta: &Substitution) -> Expr {
    theta.resolve(e)
}

/// Source of fresh variables `_X0, _X1, …` that avoids a set of taken names.
#[derive(Clone, Debug, Default)]
pub struct VarSupply {
    next: usize,
    taken: BTreeSet<Var>,
}

impl VarSupply {
    pub fn avoiding(taken: impl IntoIterator<Item = Var>) -> VarSupply {
        VarSupply { next: 0, taken: taken.into_iter().collect() }
    }

    pub fn fresh(&mut self) -> Var {
        loop {
            let v = Var::new(&format!("_X{}", self.next));
            self.next += 1;
            if !self.taken.contains(&v) {
                return v;
            }
        }
    }
}

/// The first atom `_a0, _a1, …` not in `avoid`.
pub fn fresh_atom(avoid: &BTreeSet<Atom>) -> Atom {
    (0..)
        .map(|i| Atom::new(&format!("_a{i}")))
        .find(|a| !avoid.contains(a))
        .expect("infinitely many candidates")
}

/// An equation `lhs ≐ rhs`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Equation {
    pub lhs: Expr,
    pub rhs: Expr,
}

impl Equation {
    pub fn new(lhs: Expr, rhs: Expr) -> Equation {
        Equation { lhs, rhs }
    }

    pub fn flipped(&self) -> Equation {
        Equation { lhs: self.rhs.clone(), rhs: self.lhs.clone() }
    }

    /// The equation with its sides in a canonical order, for set semantics
    /// of symmetric equations.
    pub fn symmetric_key(&self) -> (&Expr, &Expr) {
        if self.lhs <= self.rhs {
            (&self.lhs, &self.rhs)
        } else {
            (&self.rhs, &self.lhs)
        }
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn leafify(e: &Expr, supply: &mut VarSupply, out: &mut Vec<Equation>) -> Expr {
    if e.is_susp() {
        return e.clone();
    }
    let y = supply.fresh();
    let slot = out.len();
    out.push(Equation::new(Expr::plain(y.clone()), e.clone()));
    let flat = flatten_expr(e, supply, out);
    out[slot].rhs = flat;
    Expr::plain(y)
}

/// One level of `e` with every proper subexpression replaced by a
/// suspension or a fresh variable defined in `out`. Atoms below the top
/// get variables too, so that merging two flat expressions removes a
/// symbol.
pub(crate) fn flatten_expr(e: &Expr, supply: &mut VarSupply, out: &mut Vec<Equation>) -> Expr {
    match e {
        Expr::Atom(_) | Expr::Susp(..) => e.clone(),
        Expr::Lam(a, b) => Expr::Lam(a.clone(), Box::new(leafify(b, supply, out))),
        Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(|a| leafify(a, supply, out)).collect()),
        Expr::Letrec(env, b) => {
            let items = env
                .items()
                .iter()
                .map(|item| match item {
                    EnvItem::Bind(a, x) => EnvItem::Bind(a.clone(), leafify(x, supply, out)),
                    other => other.clone(),
                })
                .collect();
            Expr::Letrec(Env::new_unchecked(items), Box::new(leafify(b, supply, out)))
        }
    }
}

/// `flat(eq)`: exhaustive flattening. The first equation of the result is
/// the flattened input equation.
pub fn flatten(eq: &Equation, supply: &mut VarSupply) -> Vec<Equation> {
    let mut out = vec![Equation::new(eq.lhs.clone(), eq.rhs.clone())];
    let lhs = flatten_expr(&eq.lhs, supply, &mut out);
    let rhs = flatten_expr(&eq.rhs, supply, &mut out);
    out[0] = Equation::new(lhs, rhs);
    out
}
