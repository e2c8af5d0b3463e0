use std::collections::{BTreeMap, BTreeSet};

use super::{MatchConfig, MatchEquation, Matcher};
use crate::error::{EngineError, Failure, TermError};
use crate::term::{Equation, Expr, Substitution, Var};
use crate::unify::{Engine, Stats, UnifyConfig, UnifyState};

/// Match equations whose right sides may refer to shared nodes
/// `N = e`. Node definitions may refer to earlier nodes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DagProblem {
    pub nodes: Vec<(Var, Expr)>,
    pub equations: Vec<MatchEquation>,
}

impl DagProblem {
    pub fn node_vars(&self) -> BTreeSet<Var> {
        self.nodes.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Node definitions must only use earlier nodes, and right sides only
    /// nodes; left sides must not use nodes at all.
    pub fn validate(&self) -> Result<(), TermError> {
        let mut seen = BTreeSet::new();
        for (n, e) in &self.nodes {
            if let Some(v) = e.vars().into_iter().find(|v| !seen.contains(v)) {
                return Err(TermError::Unsupported(format!("node {n} refers to {v}, which is not an earlier node")));
            }
            if !seen.insert(n.clone()) {
                return Err(TermError::Unsupported(format!("node {n} defined twice")));
            }
            if !e.env_vars().is_empty() {
                return Err(TermError::Unsupported(format!("environment variable in node {n}")));
            }
        }
        for eq in &self.equations {
            if let Some(v) = eq.rhs.vars().into_iter().find(|v| !seen.contains(v)) {
                return Err(TermError::NonGround(format!("{} (variable {v})", eq.rhs)));
            }
            if let Some(v) = eq.lhs.vars().into_iter().find(|v| seen.contains(v)) {
                return Err(TermError::Unsupported(format!("node {v} on a left-hand side")));
            }
        }
        Ok(())
    }

    fn node_subst(&self) -> Substitution {
        self.nodes.iter().cloned().collect()
    }

    /// The plain matching problem with every node expanded.
    pub fn decompress(&self) -> Result<Vec<MatchEquation>, TermError> {
        self.validate()?;
        let s = self.node_subst();
        Ok(self.equations.iter().map(|eq| MatchEquation::new(eq.lhs.clone(), s.resolve(&eq.rhs))).collect())
    }

    /// Size of the decompressed problem, computed without expanding it.
    pub fn decompressed_size(&self) -> usize {
        let mut sizes: BTreeMap<Var, usize> = BTreeMap::new();
        for (n, e) in &self.nodes {
            let s = expanded_size(e, &sizes);
            sizes.insert(n.clone(), s);
        }
        self.equations.iter().map(|eq| eq.lhs.size() + expanded_size(&eq.rhs, &sizes)).sum()
    }

    /// The number of expression nodes written down.
    pub fn compressed_size(&self) -> usize {
        self.nodes.iter().map(|(_, e)| e.size()).sum::<usize>()
            + self.equations.iter().map(|eq| eq.lhs.size() + eq.rhs.size()).sum::<usize>()
    }
}

fn expanded_size(e: &Expr, sizes: &BTreeMap<Var, usize>) -> usize {
    let mut total = 0usize;
    e.visit(&mut |x| {
        total = total.saturating_add(match x {
            Expr::Susp(_, v) => sizes.get(v).copied().unwrap_or(1),
            _ => 1,
        })
    });
    total
}

/// A matcher in triangular form over pattern variables, nodes and the
/// variables introduced by flattening.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DagMatcher {
    pub sigma: Substitution,
    pub vars: BTreeSet<Var>,
}

impl DagMatcher {
    pub fn value(&self, x: &Var) -> Expr {
        self.sigma.resolve_var(x)
    }

    /// The expanded matcher on the pattern variables.
    pub fn to_matcher(&self) -> Matcher {
        Matcher { exprs: self.vars.iter().map(|x| (x.clone(), self.value(x))).collect(), envs: BTreeMap::new() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DagMatchReport {
    pub matchers: Vec<DagMatcher>,
    pub stats: Stats,
    pub failures: BTreeMap<Failure, usize>,
    pub trace: Vec<String>,
}

impl DagMatchReport {
    pub fn is_solvable(&self) -> bool {
        !self.matchers.is_empty()
    }

    pub fn expanded(&self) -> Vec<Matcher> {
        self.matchers.iter().map(DagMatcher::to_matcher).collect()
    }
}

/// Runs the unification rules in matching mode on a dag problem.
pub fn letrec_dag_match(problem: &DagProblem, cfg: &MatchConfig) -> Result<DagMatchReport, EngineError> {
    problem.validate()?;
    let nodes = problem.node_vars();
    let mut eqs: Vec<Equation> =
        problem.nodes.iter().map(|(n, e)| Equation::new(Expr::plain(n.clone()), e.clone())).collect();
    eqs.extend(problem.equations.iter().map(|eq| Equation::new(eq.lhs.clone(), eq.rhs.clone())));
    let init = UnifyState::build(&eqs, &[], Some(&nodes), true)?;
    let ucfg = UnifyConfig {
        mode: cfg.mode,
        max_solutions: cfg.max_solutions,
        elimfp: true,
        step_limit: cfg.step_limit,
        trace: cfg.trace,
    };
    let mut engine = Engine::new(ucfg);
    let unifiers = engine.run(init)?;
    let mut pattern = BTreeSet::new();
    for eq in &problem.equations {
        eq.lhs.collect_vars(&mut pattern);
    }
    let mut matchers: Vec<DagMatcher> = Vec::new();
    let mut seen: Vec<Matcher> = Vec::new();
    for u in unifiers {
        let dm = DagMatcher { sigma: u.sigma, vars: pattern.clone() };
        let m = dm.to_matcher();
        if seen.iter().any(|s| s.equivalent(&m)) {
            continue;
        }
        seen.push(m);
        matchers.push(dm);
    }
    Ok(DagMatchReport { matchers, stats: engine.stats, failures: engine.failures, trace: engine.trace })
}
