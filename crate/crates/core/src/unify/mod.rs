//! Nominal letrec unification.

mod engine;
mod order;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use engine::{
    check_failures, decompose, peel_lambdas, rule7_equation, rule_decompose_letrec, rule_elimfp, rule_fps, rule_mms, Halt,
    UnifyState,
};
pub(crate) use engine::Engine;
pub use order::VarDepOrder;

use crate::alpha::{alpha_eq, check_fresh};
use crate::error::{EngineError, Failure, TermError};
use crate::matching::{letrec_match, MatchConfig, MatchEquation};
use crate::perm::Permutation;
use crate::term::{fresh_atom, Atom, Equation, Expr, Substitution, Var};

/// A unification problem `(Γ, ∇)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnifyProblem {
    pub equations: Vec<Equation>,
    pub freshness: Vec<(Atom, Expr)>,
}

impl UnifyProblem {
    pub fn new(equations: Vec<Equation>) -> UnifyProblem {
        UnifyProblem { equations, freshness: Vec::new() }
    }

    pub fn with_freshness(mut self, atom: Atom, e: Expr) -> UnifyProblem {
        self.freshness.push((atom, e));
        self
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for eq in &self.equations {
            eq.lhs.collect_vars(&mut out);
            eq.rhs.collect_vars(&mut out);
        }
        for (_, e) in &self.freshness {
            e.collect_vars(&mut out);
        }
        out
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for eq in &self.equations {
            eq.lhs.collect_all_atoms(&mut out);
            eq.rhs.collect_all_atoms(&mut out);
        }
        for (a, e) in &self.freshness {
            out.insert(a.clone());
            e.collect_all_atoms(&mut out);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Stop at the first unifier.
    Decide,
    /// Enumerate the complete set.
    #[default]
    Collect,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnifyConfig {
    pub mode: Mode,
    pub max_solutions: Option<usize>,
    /// Drop fixpoint equations generated by the stored ones.
    pub elimfp: bool,
    pub step_limit: usize,
    pub trace: bool,
}

impl Default for UnifyConfig {
    fn default() -> UnifyConfig {
        UnifyConfig { mode: Mode::Collect, max_solutions: None, elimfp: true, step_limit: 1_000_000, trace: false }
    }
}

impl UnifyConfig {
    pub fn decide() -> UnifyConfig {
        UnifyConfig { mode: Mode::Decide, ..UnifyConfig::default() }
    }

    pub fn collect() -> UnifyConfig {
        UnifyConfig::default()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    /// Alternatives created by the branching rule.
    pub branches: usize,
    pub rule_counts: BTreeMap<String, usize>,
    /// Largest number of fixpoint equations held for one variable.
    pub max_fixpoint_eqs: usize,
    /// Macro steps where the measure did not decrease.
    pub measure_violations: usize,
    pub measures_checked: usize,
    pub steps: usize,
}

impl Stats {
    pub fn rule(&self, name: &str) -> usize {
        self.rule_counts.get(name).copied().unwrap_or(0)
    }
}

/// A unifier `(σ, ∇, X)`: a substitution in triangular form, atomic
/// freshness constraints on its residual variables and fixpoint equations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unifier {
    pub sigma: Substitution,
    pub freshness: BTreeSet<(Atom, Var)>,
    pub fixpoints: Vec<(Var, Permutation)>,
    pub(crate) vars: BTreeSet<Var>,
    pub(crate) atoms: BTreeSet<Atom>,
}

impl Unifier {
    /// The variables of the input problem.
    pub fn vars(&self) -> &BTreeSet<Var> {
        &self.vars
    }

    /// The atoms of the input problem.
    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    /// `Xσ`, fully expanded.
    pub fn value(&self, x: &Var) -> Expr {
        self.sigma.resolve_var(x)
    }

    /// Input variables that `σ` leaves unbound.
    pub fn residual_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for x in &self.vars {
            if !self.sigma.contains(x) {
                out.insert(x.clone());
            }
        }
        for (_, e) in self.sigma.entries() {
            for v in e.vars() {
                if !self.sigma.contains(&v) {
                    out.insert(v);
                }
            }
        }
        out
    }

    pub fn instantiate_fresh(&self) -> Substitution {
        instantiate_fresh(self)
    }
}

impl fmt::Display for Unifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binds: Vec<String> = self.sigma.entries().iter().map(|(x, e)| format!("{x} -> {e}")).collect();
        let fresh: Vec<String> = self.freshness.iter().map(|(a, x)| format!("{a} # {x}")).collect();
        let fix: Vec<String> = self.fixpoints.iter().map(|(x, p)| format!("{x} = {p} . {x}")).collect();
        write!(f, "{{{}}} with {{{}}} fix {{{}}}", binds.join(", "), fresh.join(", "), fix.join(", "))
    }
}

/// Replaces every residual variable by one atom outside the problem.
///
/// The result grounds every input variable and satisfies the problem when
/// the unifier is sound, since a fresh atom satisfies every freshness and
/// fixpoint constraint on the residual variables.
pub fn instantiate_fresh(u: &Unifier) -> Substitution {
    let c = fresh_atom(&u.atoms);
    let fill = Expr::Atom(c.clone());
    let mut out = Substitution::new();
    for x in &u.vars {
        let v = u.value(x);
        let g = ground_with(&v, &c, &fill);
        out.bind(x.clone(), g);
    }
    out
}

fn ground_with(e: &Expr, c: &Atom, fill: &Expr) -> Expr {
    match e {
        Expr::Atom(_) => e.clone(),
        Expr::Susp(p, _) => {
            if p.moves(c) {
                Expr::Atom(p.apply(c))
            } else {
                fill.clone()
            }
        }
        Expr::Lam(a, b) => Expr::Lam(a.clone(), Box::new(ground_with(b, c, fill))),
        Expr::App(f, args) => Expr::App(f.clone(), args.iter().map(|a| ground_with(a, c, fill)).collect()),
        Expr::Letrec(env, b) => {
            let items = env
                .items()
                .iter()
                .map(|item| match item {
                    crate::term::EnvItem::Bind(a, x) => crate::term::EnvItem::Bind(a.clone(), ground_with(x, c, fill)),
                    other => other.clone(),
                })
                .collect();
            Expr::Letrec(crate::term::Env::new_unchecked(items), Box::new(ground_with(b, c, fill)))
        }
    }
}

/// Whether a grounding substitution solves the problem.
pub fn verify_solution(problem: &UnifyProblem, rho: &Substitution) -> Result<bool, TermError> {
    for eq in &problem.equations {
        if !alpha_eq(&rho.resolve(&eq.lhs), &rho.resolve(&eq.rhs))? {
            return Ok(false);
        }
    }
    for (a, e) in &problem.freshness {
        let g = rho.resolve(e);
        if !g.is_ground() {
            return Err(TermError::NonGround(g.to_string()));
        }
        if !check_fresh(a, &g) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the ground assignment `rho` is an instance of `u`: some
/// grounding `γ` of the residual variables satisfies the freshness and
/// fixpoint constraints of `u` and gives `Xσγ ∼ Xρ` for every input
/// variable `X` that `rho` assigns.
pub fn is_instance(u: &Unifier, rho: &Substitution) -> Result<bool, EngineError> {
    let mut eqs = Vec::new();
    for x in &u.vars {
        if let Some(g) = rho.get(x) {
            eqs.push(MatchEquation::new(u.value(x), g.clone()));
        }
    }
    let report = letrec_match(&eqs, &MatchConfig::collect())?;
    for m in &report.matchers {
        let fresh_ok = u.freshness.iter().all(|(a, y)| m.get(y).is_none_or(|g| check_fresh(a, g)));
        let fix_ok = u
            .fixpoints
            .iter()
            .all(|(y, p)| m.get(y).is_none_or(|g| alpha_eq(&g.permute(p), g).unwrap_or(false)));
        if fresh_ok && fix_ok {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnifyReport {
    pub unifiers: Vec<Unifier>,
    pub stats: Stats,
    /// Failed branches by cause.
    pub failures: BTreeMap<Failure, usize>,
    pub trace: Vec<String>,
}

impl UnifyReport {
    pub fn is_solvable(&self) -> bool {
        !self.unifiers.is_empty()
    }

    /// The most frequent failure cause, ties broken by the fixed order of
    /// [`Failure`].
    pub fn main_failure(&self) -> Option<Failure> {
        self.failures.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(f, _)| *f)
    }
}

/// Runs the unification rules on a problem.
pub fn unify(problem: &UnifyProblem, cfg: &UnifyConfig) -> Result<UnifyReport, EngineError> {
    let init = UnifyState::new(problem, cfg.elimfp)?;
    let mut engine = Engine::new(cfg.clone());
    let unifiers = engine.run(init)?;
    Ok(UnifyReport { unifiers, stats: engine.stats, failures: engine.failures, trace: engine.trace })
}

/// The lexicographic termination measure `(μ1, …, μ6)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Measure(pub [usize; 6]);

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.0;
        write!(f, "({}, {}, {}, {}, {}, {})", m[0], m[1], m[2], m[3], m[4], m[5])
    }
}

/// Letrec count, symbol count, distinct variables, variable occurrences,
/// equations without a variable side, and equation count.
pub fn measure(eqs: &[Equation]) -> Measure {
    let mut letrecs = 0;
    let mut symbols = 0;
    let mut occurrences = 0;
    let mut vars = BTreeSet::new();
    let mut non_var = 0;
    for eq in eqs {
        for side in [&eq.lhs, &eq.rhs] {
            side.visit(&mut |e| match e {
                Expr::Atom(_) => symbols += 1,
                Expr::Susp(_, x) => {
                    occurrences += 1;
                    vars.insert(x.clone());
                }
                Expr::Lam(..) => symbols += 2,
                Expr::App(..) => symbols += 1,
                Expr::Letrec(env, _) => {
                    letrecs += 1;
                    symbols += 1 + env.len();
                }
            });
        }
        if eq.lhs.as_plain_var().is_none() && eq.rhs.as_plain_var().is_none() {
            non_var += 1;
        }
    }
    Measure([letrecs, symbols, vars.len(), occurrences, non_var, eqs.len()])
}

#[cfg(test)]
mod tests;
