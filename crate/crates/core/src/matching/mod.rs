//! Nominal letrec matching: ground right-hand sides, dag-compressed
//! problems, and environment variables on the left.

mod dag;
mod env;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use dag::{letrec_dag_match, DagMatchReport, DagMatcher, DagProblem};
pub use env::letrec_env_match;

use crate::alpha::{alpha_eq, solver};
use crate::error::{EngineError, Failure, TermError};
use crate::term::{Atom, Env, EnvItem, EnvVar, Expr, Var};
use crate::unify::Mode;

/// `lhs ⊴ rhs` with a ground right side.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatchEquation {
    pub lhs: Expr,
    pub rhs: Expr,
}

impl MatchEquation {
    pub fn new(lhs: Expr, rhs: Expr) -> MatchEquation {
        MatchEquation { lhs, rhs }
    }
}

impl fmt::Display for MatchEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <= {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for MatchEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An assignment of expressions to variables and environments to
/// environment variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matcher {
    pub exprs: BTreeMap<Var, Expr>,
    pub envs: BTreeMap<EnvVar, Env>,
}

impl Matcher {
    pub fn get(&self, x: &Var) -> Option<&Expr> {
        self.exprs.get(x)
    }

    pub fn get_env(&self, x: &EnvVar) -> Option<&Env> {
        self.envs.get(x)
    }

    /// Instantiates `e`. Unassigned variables are left in place.
    pub fn apply(&self, e: &Expr) -> Expr {
        match e {
            Expr::Atom(_) => e.clone(),
            Expr::Susp(p, x) => match self.exprs.get(x) {
                Some(v) => v.permute(p),
                None => e.clone(),
            },
            Expr::Lam(a, b) => Expr::Lam(a.clone(), Box::new(self.apply(b))),
            Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(|x| self.apply(x)).collect()),
            Expr::Letrec(env, b) => {
                let mut items = Vec::new();
                for item in env.items() {
                    match item {
                        EnvItem::Bind(a, x) => items.push(EnvItem::Bind(a.clone(), self.apply(x))),
                        EnvItem::Var(p, v) => match self.envs.get(v) {
                            Some(val) => items.extend(val.permute(p).into_items()),
                            None => items.push(item.clone()),
                        },
                    }
                }
                Expr::Letrec(Env::new_unchecked(items), Box::new(self.apply(b)))
            }
        }
    }

    /// Same domain, and pointwise `∼` (environments compared binding by
    /// binding under equal binder names).
    pub fn equivalent(&self, other: &Matcher) -> bool {
        self.exprs.len() == other.exprs.len()
            && self.envs.len() == other.envs.len()
            && self
                .exprs
                .iter()
                .all(|(x, e)| other.exprs.get(x).is_some_and(|f| alpha_eq(e, f).unwrap_or(false)))
            && self.envs.iter().all(|(x, e)| other.envs.get(x).is_some_and(|f| env_equivalent(e, f)))
    }
}

impl fmt::Display for Matcher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.envs.iter().map(|(x, e)| format!("{x} -> {}", env_text(e))).collect();
        parts.extend(self.exprs.iter().map(|(x, e)| format!("{x} -> {e}")));
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// `a1 e1; a2 e2; …`, the binding list of an environment.
pub fn env_text(env: &Env) -> String {
    let e = Expr::Letrec(env.clone(), Box::new(Expr::atom("_")));
    let s = e.to_string();
    s.strip_prefix("(letrec ")
        .and_then(|s| s.strip_suffix(" in _)"))
        .map(str::to_string)
        .unwrap_or_else(|| if env.is_empty() { String::new() } else { s })
}

/// Equal binder sets with `∼`-equal bound expressions.
pub fn env_equivalent(e1: &Env, e2: &Env) -> bool {
    let m1: BTreeMap<&Atom, &Expr> = e1.bindings().collect();
    let m2: BTreeMap<&Atom, &Expr> = e2.bindings().collect();
    m1.len() == e1.len()
        && m2.len() == e2.len()
        && m1.len() == m2.len()
        && m1.iter().all(|(a, x)| m2.get(a).is_some_and(|y| alpha_eq(x, y).unwrap_or(false)))
}

/// Keeps the first of each class of equivalent matchers.
pub fn dedupe_matchers(ms: Vec<Matcher>) -> Vec<Matcher> {
    let mut out: Vec<Matcher> = Vec::new();
    for m in ms {
        if !out.iter().any(|o| o.equivalent(&m)) {
            out.push(m);
        }
    }
    out
}

/// Whether two matcher lists are equal as sets up to equivalence.
pub fn same_matchers(a: &[Matcher], b: &[Matcher]) -> bool {
    a.iter().all(|m| b.iter().any(|n| m.equivalent(n))) && b.iter().all(|m| a.iter().any(|n| m.equivalent(n)))
}

/// Whether `m` solves every equation.
pub fn verify_matcher(eqs: &[MatchEquation], m: &Matcher) -> Result<bool, TermError> {
    for eq in eqs {
        if !alpha_eq(&m.apply(&eq.lhs), &eq.rhs)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchConfig {
    pub mode: Mode,
    pub max_solutions: Option<usize>,
    /// Bound on branching points explored.
    pub step_limit: usize,
    pub trace: bool,
}

impl Default for MatchConfig {
    fn default() -> MatchConfig {
        MatchConfig { mode: Mode::Collect, max_solutions: None, step_limit: 1_000_000, trace: false }
    }
}

impl MatchConfig {
    pub fn decide() -> MatchConfig {
        MatchConfig { mode: Mode::Decide, ..MatchConfig::default() }
    }

    pub fn collect() -> MatchConfig {
        MatchConfig::default()
    }

    pub(crate) fn solution_cap(&self) -> usize {
        match self.mode {
            Mode::Decide => 1,
            Mode::Collect => self.max_solutions.unwrap_or(usize::MAX),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchReport {
    pub matchers: Vec<Matcher>,
    pub failures: BTreeMap<Failure, usize>,
    pub branches: usize,
    pub trace: Vec<String>,
}

impl MatchReport {
    pub fn is_solvable(&self) -> bool {
        !self.matchers.is_empty()
    }

    pub fn main_failure(&self) -> Option<Failure> {
        self.failures.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(f, _)| *f)
    }
}

fn check_problem(eqs: &[MatchEquation]) -> Result<(), TermError> {
    for eq in eqs {
        if !eq.rhs.is_ground() {
            return Err(TermError::NonGround(eq.rhs.to_string()));
        }
    }
    Ok(())
}

/// Matching with ground right-hand sides and no environment variables.
pub fn letrec_match(eqs: &[MatchEquation], cfg: &MatchConfig) -> Result<MatchReport, EngineError> {
    check_problem(eqs)?;
    let pairs: Vec<(Expr, Expr)> = eqs.iter().map(|e| (e.lhs.clone(), e.rhs.clone())).collect();
    let cap = cfg.solution_cap();
    let limits = solver::Limits { max_solutions: cap, max_branches: cfg.step_limit };
    let out = solver::solve(&pairs, limits)?;
    let mut vars = BTreeSet::new();
    for eq in eqs {
        eq.lhs.collect_vars(&mut vars);
    }
    let raw: Vec<Matcher> = out
        .solutions
        .into_iter()
        .map(|s| Matcher { exprs: s.values.into_iter().filter(|(x, _)| vars.contains(x)).collect(), envs: BTreeMap::new() })
        .collect();
    let matchers = dedupe_matchers(raw);
    let mut trace = Vec::new();
    if cfg.trace {
        trace.push(format!("branch points: {}", out.branches));
        for (f, n) in &out.failures {
            trace.push(format!("failed branches ({f}): {n}"));
        }
        for m in &matchers {
            trace.push(format!("matcher {m}"));
        }
    }
    Ok(MatchReport { matchers, failures: out.failures, branches: out.branches, trace })
}
