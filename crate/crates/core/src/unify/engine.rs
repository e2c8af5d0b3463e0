use std::collections::{BTreeMap, BTreeSet};
use std::mem;
use std::sync::Arc;

use super::order::VarDepOrder;
use super::{measure, Measure, Mode, Stats, UnifyConfig, UnifyProblem, Unifier};
use crate::alpha::FreshnessStore;
use crate::error::{EngineError, Failure, TermError};
use crate::perm::{PermGroup, Permutation};
use crate::term::{flatten, flatten_expr, Atom, Equation, Expr, FunSym, Substitution, Var, VarSupply};

/// Why a rule application or a branch stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Halt {
    Fail(Failure),
    Abort(EngineError),
}

impl From<Failure> for Halt {
    fn from(f: Failure) -> Halt {
        Halt::Fail(f)
    }
}

impl From<EngineError> for Halt {
    fn from(e: EngineError) -> Halt {
        Halt::Abort(e)
    }
}

type R<T> = Result<T, Halt>;

#[derive(Clone, Debug)]
struct FixBlock {
    perms: Vec<Permutation>,
    group: Option<PermGroup>,
}

/// A state `(Γ, ∇, θ)` of the unification rules.
///
/// Equations of `Γ` are kept in four buckets: unprocessed ones, variable
/// equations `X ≐ e` with `e` neither a variable nor a suspension, letrec
/// equations awaiting the branching rule, and fixpoint equations grouped by
/// variable.
#[derive(Clone, Debug)]
pub struct UnifyState {
    todo: Vec<Equation>,
    fresh_todo: Vec<(Atom, Expr)>,
    var_eqs: Vec<(Var, Expr)>,
    letrec_eqs: Vec<Equation>,
    deferred: Vec<Equation>,
    fix: BTreeMap<Var, FixBlock>,
    nabla: BTreeSet<(Atom, Var)>,
    theta: Substitution,
    supply: VarSupply,
    support: Arc<Vec<Atom>>,
    elimfp: bool,
    pattern: Arc<BTreeSet<Var>>,
    dag: bool,
    input_vars: Arc<BTreeSet<Var>>,
    trace: Vec<String>,
}

impl UnifyState {
    /// The initial state of a problem: flattened equations, empty `θ`.
    pub fn new(problem: &UnifyProblem, elimfp: bool) -> Result<UnifyState, EngineError> {
        UnifyState::build(&problem.equations, &problem.freshness, None, elimfp)
    }

    /// With `nodes` set, every equation whose left side is not a plain node
    /// variable is a match equation, and the variables of its left side
    /// (including those introduced by flattening it) are pattern variables.
    pub(crate) fn build(
        eqs: &[Equation],
        fresh: &[(Atom, Expr)],
        nodes: Option<&BTreeSet<Var>>,
        elimfp: bool,
    ) -> Result<UnifyState, EngineError> {
        let all = eqs.iter().flat_map(|q| [&q.lhs, &q.rhs]).chain(fresh.iter().map(|(_, e)| e));
        let mut atoms = BTreeSet::new();
        let mut vars = BTreeSet::new();
        for e in all {
            if !e.env_vars().is_empty() {
                return Err(TermError::Unsupported(format!("environment variable in unification problem: {e}")).into());
            }
            e.collect_all_atoms(&mut atoms);
            e.collect_vars(&mut vars);
        }
        atoms.extend(fresh.iter().map(|(a, _)| a.clone()));
        let mut supply = VarSupply::avoiding(vars.clone());
        let mut todo = Vec::new();
        let mut pattern = BTreeSet::new();
        for eq in eqs {
            match nodes {
                Some(nodes) if eq.lhs.as_plain_var().map_or(true, |v| !nodes.contains(v)) => {
                    let mut defs = Vec::new();
                    let l = flatten_expr(&eq.lhs, &mut supply, &mut defs);
                    eq.lhs.collect_vars(&mut pattern);
                    for d in &defs {
                        d.lhs.collect_vars(&mut pattern);
                    }
                    let r = flatten_expr(&eq.rhs, &mut supply, &mut defs);
                    todo.push(Equation::new(l, r));
                    todo.extend(defs);
                }
                _ => todo.extend(flatten(eq, &mut supply)),
            }
        }
        todo.reverse();
        let mut fresh_todo: Vec<(Atom, Expr)> = fresh.to_vec();
        fresh_todo.reverse();
        Ok(UnifyState {
            todo,
            fresh_todo,
            var_eqs: Vec::new(),
            letrec_eqs: Vec::new(),
            deferred: Vec::new(),
            fix: BTreeMap::new(),
            nabla: BTreeSet::new(),
            theta: Substitution::new(),
            supply,
            support: Arc::new(atoms.into_iter().collect()),
            elimfp,
            pattern: Arc::new(pattern),
            dag: nodes.is_some(),
            input_vars: Arc::new(vars),
            trace: Vec::new(),
        })
    }

    /// All equations of `Γ`, fixpoint equations included.
    pub fn equations(&self) -> Vec<Equation> {
        let mut out: Vec<Equation> = self.todo.iter().rev().cloned().collect();
        out.extend(self.var_eqs.iter().map(|(x, e)| Equation::new(Expr::plain(x.clone()), e.clone())));
        out.extend(self.letrec_eqs.iter().cloned());
        out.extend(self.deferred.iter().cloned());
        for (x, b) in &self.fix {
            for p in &b.perms {
                out.push(Equation::new(Expr::plain(x.clone()), Expr::Susp(p.clone(), x.clone())));
            }
        }
        out
    }

    pub fn fixpoints(&self) -> Vec<(Var, Permutation)> {
        self.fix.iter().flat_map(|(x, b)| b.perms.iter().map(move |p| (x.clone(), p.clone()))).collect()
    }

    pub fn fixpoint_count(&self, x: &Var) -> usize {
        self.fix.get(x).map_or(0, |b| b.perms.len())
    }

    pub fn freshness(&self) -> &BTreeSet<(Atom, Var)> {
        &self.nabla
    }

    pub fn substitution(&self) -> &Substitution {
        &self.theta
    }

    pub fn support(&self) -> &[Atom] {
        &self.support
    }

    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    pub fn measure(&self) -> Measure {
        measure(&self.equations())
    }

    /// Adds `x ↦ e` to `θ` directly.
    pub fn bind(&mut self, x: Var, e: Expr) {
        self.theta.bind(x, e);
    }

    /// Adds an atomic freshness constraint directly.
    pub fn add_freshness(&mut self, a: Atom, x: Var) {
        self.nabla.insert((a, x));
    }

    fn order(&self) -> VarDepOrder {
        let mut order = VarDepOrder::new();
        for (x, e) in &self.var_eqs {
            order.add(x, e);
        }
        for eq in &self.todo {
            for (l, r) in [(&eq.lhs, &eq.rhs), (&eq.rhs, &eq.lhs)] {
                if let Some(x) = l.as_plain_var() {
                    order.add(x, r);
                }
            }
        }
        order
    }

    /// Variables that reach a pattern variable through their equations or `θ`.
    fn tainted(&self) -> BTreeSet<Var> {
        let mut refs: Vec<(Var, BTreeSet<Var>)> = self.var_eqs.iter().map(|(x, e)| (x.clone(), e.vars())).collect();
        refs.extend(self.theta.entries().iter().map(|(x, e)| (x.clone(), e.vars())));
        let mut tainted: BTreeSet<Var> = (*self.pattern).clone();
        loop {
            let before = tainted.len();
            for (x, vs) in &refs {
                if !tainted.contains(x) && vs.iter().any(|v| tainted.contains(v)) {
                    tainted.insert(x.clone());
                }
            }
            if tainted.len() == before {
                return tainted;
            }
        }
    }

    fn ground_wrt(e: &Expr, tainted: &BTreeSet<Var>) -> bool {
        e.vars().iter().all(|v| !tainted.contains(v))
    }
}

enum Norm {
    Done,
    Branch(Vec<UnifyState>),
}

pub(crate) struct Engine {
    pub cfg: UnifyConfig,
    pub stats: Stats,
    pub failures: BTreeMap<Failure, usize>,
    pub trace: Vec<String>,
}

fn tops_clash(l: &Expr, r: &Expr) -> bool {
    match (l, r) {
        (Expr::Susp(..), _) | (_, Expr::Susp(..)) => false,
        (Expr::Atom(a), Expr::Atom(b)) => a != b,
        (Expr::App(f, xs), Expr::App(g, ys)) => f != g || xs.len() != ys.len(),
        (Expr::Lam(..), Expr::Lam(..)) => false,
        (Expr::Letrec(e1, _), Expr::Letrec(e2, _)) => e1.len() != e2.len(),
        _ => true,
    }
}

/// Free atoms of `xθ`, ignoring unbound variables, computed over the
/// entries of `θ` without expanding it.
fn theta_free_atoms(theta: &Substitution, x: &Var, memo: &mut BTreeMap<Var, BTreeSet<Atom>>) -> BTreeSet<Atom> {
    if let Some(s) = memo.get(x) {
        return s.clone();
    }
    let s = match theta.get(x) {
        Some(e) => expr_free_atoms(theta, e, memo),
        None => BTreeSet::new(),
    };
    memo.insert(x.clone(), s.clone());
    s
}

fn expr_free_atoms(theta: &Substitution, e: &Expr, memo: &mut BTreeMap<Var, BTreeSet<Atom>>) -> BTreeSet<Atom> {
    match e {
        Expr::Atom(a) => [a.clone()].into(),
        Expr::Susp(p, y) => theta_free_atoms(theta, y, memo).iter().map(|a| p.apply(a)).collect(),
        Expr::Lam(a, b) => {
            let mut s = expr_free_atoms(theta, b, memo);
            s.remove(a);
            s
        }
        Expr::App(_, args) => args.iter().flat_map(|a| expr_free_atoms(theta, a, memo)).collect(),
        Expr::Letrec(env, b) => {
            let mut s = expr_free_atoms(theta, b, memo);
            for (_, x) in env.bindings() {
                s.extend(expr_free_atoms(theta, x, memo));
            }
            for a in env.letrec_atoms() {
                s.remove(&a);
            }
            s
        }
    }
}

/// Pushes constraints on variables bound by `θ` through their values until
/// only constraints on unbound variables remain.
fn resolve_freshness(theta: &Substitution, nabla: &BTreeSet<(Atom, Var)>) -> Result<BTreeSet<(Atom, Var)>, Failure> {
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut work: Vec<(Atom, Expr)> = Vec::new();
    let mut visit = |a: Atom, x: Var, work: &mut Vec<(Atom, Expr)>, out: &mut BTreeSet<(Atom, Var)>| match theta.get(&x) {
        Some(e) => {
            if seen.insert((a.clone(), x)) {
                work.push((a, e.clone()));
            }
        }
        None => {
            out.insert((a, x));
        }
    };
    for (a, x) in nabla {
        visit(a.clone(), x.clone(), &mut work, &mut out);
    }
    while let Some((a, e)) = work.pop() {
        match e {
            Expr::Atom(b) => {
                if a == b {
                    return Err(Failure::FreshnessSolutionFail);
                }
            }
            Expr::Susp(p, y) => visit(p.inverse().apply(&a), y, &mut work, &mut out),
            Expr::Lam(b, s) => {
                if a != b {
                    work.push((a, *s));
                }
            }
            Expr::App(_, args) => work.extend(args.into_iter().map(|x| (a.clone(), x))),
            Expr::Letrec(env, r) => {
                if !env.letrec_atoms().contains(&a) {
                    work.push((a.clone(), *r));
                    work.extend(env.bindings().map(|(_, x)| (a.clone(), x.clone())));
                }
            }
        }
    }
    Ok(out)
}

/// Clash, cycle, freshness and freshness-solution failures of a state.
pub fn check_failures(st: &UnifyState) -> Option<Failure> {
    for eq in st.equations() {
        if tops_clash(&eq.lhs, &eq.rhs) {
            return Some(Failure::Clash);
        }
    }
    if st.order().find_cycle().is_some() {
        return Some(Failure::CycleDetected);
    }
    let mut store = FreshnessStore::new();
    for (a, e) in &st.fresh_todo {
        store.push(a.clone(), e.clone());
    }
    if store.simplify().is_err() {
        return Some(Failure::FreshnessFail);
    }
    let mut memo = BTreeMap::new();
    for (a, x) in &st.nabla {
        if st.theta.contains(x) && theta_free_atoms(&st.theta, x, &mut memo).contains(a) {
            return Some(Failure::FreshnessSolutionFail);
        }
    }
    None
}

/// Permutations of `0..n` in lexicographic order.
pub(crate) fn lex_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..n).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { return out };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).expect("exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// `λa1…λan.(e1,…,en,body)`.
pub(crate) fn lambda_chain(binders: &[Atom], exprs: &[Expr], body: &Expr) -> Expr {
    let mut args: Vec<Expr> = exprs.to_vec();
    args.push(body.clone());
    let mut e = Expr::App(FunSym::tuple(args.len()), args);
    for a in binders.iter().rev() {
        e = Expr::Lam(a.clone(), Box::new(e));
    }
    e
}

impl Engine {
    pub fn new(cfg: UnifyConfig) -> Engine {
        Engine { cfg, stats: Stats::default(), failures: BTreeMap::new(), trace: Vec::new() }
    }

    fn tick(&mut self, st: &mut UnifyState, rule: &'static str, detail: impl FnOnce() -> String) -> R<()> {
        self.stats.steps += 1;
        *self.stats.rule_counts.entry(rule.to_string()).or_default() += 1;
        if self.cfg.trace {
            st.trace.push(format!("{rule}: {}", detail()));
        }
        if self.stats.steps > self.cfg.step_limit {
            return Err(Halt::Abort(EngineError::StepLimitExceeded(self.cfg.step_limit)));
        }
        Ok(())
    }

    /// Runs the search and returns the unifiers found.
    pub fn run(&mut self, init: UnifyState) -> Result<Vec<Unifier>, EngineError> {
        let limit = match self.cfg.mode {
            Mode::Decide => 1,
            Mode::Collect => self.cfg.max_solutions.unwrap_or(usize::MAX),
        };
        let mut stack: Vec<(UnifyState, Option<Measure>)> = vec![(init, None)];
        let mut out = Vec::new();
        let mut branch_no = 0;
        while let Some((mut st, parent)) = stack.pop() {
            let res = self.branch(&mut st, parent, &mut stack);
            if self.cfg.trace && !matches!(res, Ok(None)) {
                branch_no += 1;
                let verdict = match &res {
                    Ok(_) => "output".to_string(),
                    Err(Halt::Fail(f)) => format!("fail ({f})"),
                    Err(Halt::Abort(e)) => format!("abort ({e})"),
                };
                self.trace.push(format!("branch {branch_no}: {verdict}"));
                self.trace.extend(st.trace.drain(..).map(|s| format!("  {s}")));
            }
            match res {
                Ok(Some(u)) => {
                    out.push(u);
                    if out.len() >= limit {
                        break;
                    }
                }
                Ok(None) => {}
                Err(Halt::Fail(f)) => *self.failures.entry(f).or_default() += 1,
                Err(Halt::Abort(e)) => return Err(e),
            }
        }
        Ok(out)
    }

    fn branch(
        &mut self,
        st: &mut UnifyState,
        mut parent: Option<Measure>,
        stack: &mut Vec<(UnifyState, Option<Measure>)>,
    ) -> R<Option<Unifier>> {
        loop {
            if let Norm::Branch(children) = self.normalize(st)? {
                for c in children.into_iter().rev() {
                    stack.push((c, parent));
                }
                return Ok(None);
            }
            if let Some(f) = check_failures(st) {
                return Err(f.into());
            }
            let m = st.measure();
            if let Some(p) = parent {
                self.stats.measures_checked += 1;
                if m >= p {
                    self.stats.measure_violations += 1;
                    if self.cfg.trace {
                        st.trace.push(format!("measure did not decrease: {p} -> {m}"));
                    }
                }
            }
            parent = Some(m);
            if self.try_mms(st)? || self.try_fps(st)? {
                continue;
            }
            if !st.var_eqs.is_empty() {
                return Err(Failure::CycleDetected.into());
            }
            return self.output(st).map(Some);
        }
    }

    /// Standard and decomposition rules to exhaustion. Rule (7) is applied
    /// last and ends the pass with its alternatives.
    fn normalize(&mut self, st: &mut UnifyState) -> R<Norm> {
        self.decompose(st)?;
        if st.letrec_eqs.is_empty() {
            return Ok(Norm::Done);
        }
        let eq = st.letrec_eqs.remove(0);
        Ok(Norm::Branch(self.rule7(st, &eq)?))
    }

    /// Rules (1)–(6).
    fn decompose(&mut self, st: &mut UnifyState) -> R<()> {
        loop {
            while let Some((a, e)) = st.fresh_todo.pop() {
                self.add_fresh(st, a, &e)?;
            }
            while let Some(eq) = st.todo.pop() {
                self.process(st, eq)?;
            }
            if st.deferred.is_empty() {
                return Ok(());
            }
            let pending = mem::take(&mut st.deferred);
            let mut rest = Vec::new();
            let mut progressed = false;
            for eq in pending {
                if self.dag_lambda(st, &eq)? {
                    progressed = true;
                } else {
                    rest.push(eq);
                }
            }
            if !progressed {
                let eq = rest.remove(0);
                let (Expr::Lam(a, s), Expr::Lam(b, t)) = (eq.lhs, eq.rhs) else { unreachable!("deferred λ-equation") };
                self.lambda(st, a, *s, b, *t)?;
            }
            st.deferred.extend(rest);
        }
    }

    fn process(&mut self, st: &mut UnifyState, eq: Equation) -> R<()> {
        if eq.lhs == eq.rhs {
            return self.tick(st, "(1)", || eq.to_string());
        }
        match (eq.lhs, eq.rhs) {
            (Expr::Susp(p, x), Expr::Susp(q, y)) => {
                if x == y {
                    let perm = p.inverse().compose(&q);
                    self.add_fixpoint(st, &x, perm)
                } else if st.pattern.contains(&y) && !st.pattern.contains(&x) {
                    self.bind_var(st, y, q.inverse().compose(&p), x)
                } else {
                    self.bind_var(st, x, p.inverse().compose(&q), y)
                }
            }
            (Expr::Susp(p, x), r) | (r, Expr::Susp(p, x)) => self.orient(st, p, x, r),
            (Expr::App(f, xs), Expr::App(g, ys)) if f == g && xs.len() == ys.len() => {
                self.tick(st, "(4)", || f.to_string())?;
                for (a, b) in xs.into_iter().zip(ys).rev() {
                    st.todo.push(Equation::new(a, b));
                }
                Ok(())
            }
            (Expr::Lam(a, s), Expr::Lam(b, t)) => {
                if a == b {
                    self.tick(st, "(5)", || a.to_string())?;
                    st.todo.push(Equation::new(*s, *t));
                    Ok(())
                } else if st.dag {
                    let eq = Equation::new(Expr::Lam(a, s), Expr::Lam(b, t));
                    if !self.dag_lambda(st, &eq)? {
                        st.deferred.push(eq);
                    }
                    Ok(())
                } else {
                    self.lambda(st, a, *s, b, *t)
                }
            }
            (l @ Expr::Letrec(..), r @ Expr::Letrec(..)) => {
                if tops_clash(&l, &r) {
                    return Err(Failure::Clash.into());
                }
                let eq = Equation::new(l, r);
                if !st.letrec_eqs.iter().any(|e| e.symmetric_key() == eq.symmetric_key()) {
                    st.letrec_eqs.push(eq);
                }
                Ok(())
            }
            _ => Err(Failure::Clash.into()),
        }
    }

    /// Rule (2) where needed, then store `x ≐ e`.
    fn orient(&mut self, st: &mut UnifyState, p: Permutation, x: Var, e: Expr) -> R<()> {
        let e = if p.is_identity() {
            e
        } else {
            self.tick(st, "(2)", || format!("{x}"))?;
            e.permute(&p.inverse())
        };
        self.add_var_eq(st, x, e)
    }

    fn add_var_eq(&mut self, st: &mut UnifyState, x: Var, e: Expr) -> R<()> {
        if st.var_eqs.iter().any(|(y, f)| *y == x && *f == e) {
            return self.tick(st, "(1)", || format!("{x} = {e}"));
        }
        st.var_eqs.push((x, e));
        Ok(())
    }

    /// Rules (3) and (3'): `x ↦ ρ·y` everywhere.
    fn bind_var(&mut self, st: &mut UnifyState, x: Var, rho: Permutation, y: Var) -> R<()> {
        let by = Expr::Susp(rho.clone(), y.clone());
        let rule = if rho.is_identity() { "(3')" } else { "(3)" };
        self.tick(st, rule, || format!("{x} := {by}"))?;
        st.theta.bind(x.clone(), by.clone());
        let inv = rho.inverse();
        st.nabla = mem::take(&mut st.nabla)
            .into_iter()
            .map(|(a, v)| if v == x { (inv.apply(&a), y.clone()) } else { (a, v) })
            .collect();
        let sub = |e: Expr| if e.occurs(&x) { Substitution::replace_var(&e, &x, &by) } else { e };
        for eq in st.todo.iter_mut().chain(st.letrec_eqs.iter_mut()).chain(st.deferred.iter_mut()) {
            let old = mem::replace(eq, Equation::new(Expr::atom("_"), Expr::atom("_")));
            *eq = Equation::new(sub(old.lhs), sub(old.rhs));
        }
        for eq in st.fresh_todo.iter_mut() {
            let e = mem::replace(&mut eq.1, Expr::atom("_"));
            eq.1 = sub(e);
        }
        for (z, e) in mem::take(&mut st.var_eqs) {
            let e = sub(e);
            if z == x {
                st.todo.push(Equation::new(by.clone(), e));
            } else {
                self.add_var_eq(st, z, e)?;
            }
        }
        if let Some(block) = st.fix.remove(&x) {
            for tau in block.perms {
                let conj = inv.compose(&tau).compose(&rho);
                self.add_fixpoint(st, &y, conj)?;
            }
        }
        Ok(())
    }

    /// Inserts `x ≐ π·x`, dropping it if `π` lies in the group generated by
    /// the permutations already stored for `x`.
    fn add_fixpoint(&mut self, st: &mut UnifyState, x: &Var, perm: Permutation) -> R<()> {
        if perm.is_identity() {
            return self.tick(st, "(1)", || format!("{x} = {x}"));
        }
        let elimfp = st.elimfp;
        let support = st.support.clone();
        let block = st.fix.entry(x.clone()).or_insert_with(|| FixBlock {
            perms: Vec::new(),
            group: elimfp.then(|| PermGroup::new(support.iter().cloned())),
        });
        if let Some(g) = &block.group {
            if perm.support().any(|a| !g.support().contains(&a)) {
                let mut atoms: BTreeSet<Atom> = g.support().iter().cloned().collect();
                atoms.extend(perm.support());
                let mut grown = PermGroup::new(atoms);
                for q in &block.perms {
                    grown.extend(q).map_err(EngineError::from)?;
                }
                block.group = Some(grown);
            }
        }
        let redundant = match &mut block.group {
            Some(g) => !g.extend(&perm).map_err(EngineError::from)?,
            None => block.perms.contains(&perm),
        };
        if redundant {
            let rule = if elimfp { "ElimFP" } else { "(1)" };
            return self.tick(st, rule, || format!("{x} = ({perm} . {x})"));
        }
        block.perms.push(perm);
        let n = block.perms.len();
        self.stats.max_fixpoint_eqs = self.stats.max_fixpoint_eqs.max(n);
        Ok(())
    }

    fn add_fresh(&mut self, st: &mut UnifyState, a: Atom, e: &Expr) -> R<()> {
        let mut store = FreshnessStore::new();
        store.push(a, e.clone());
        store.simplify()?;
        st.nabla.extend(store.atomic().iter().cloned());
        Ok(())
    }

    /// Rule (6): `λa.s ≐ λb.t` becomes `s ≐ (a b)·t` with `a # t`.
    fn lambda(&mut self, st: &mut UnifyState, a: Atom, s: Expr, b: Atom, t: Expr) -> R<()> {
        self.tick(st, "(6)", || format!("{a} {b}"))?;
        let sw = Permutation::swap(a.clone(), b);
        st.todo.push(Equation::new(s, t.permute(&sw)));
        self.add_fresh(st, a, &t)
    }

    /// Rule (6) restricted to a right side that does not depend on pattern
    /// variables. Either orientation is tried.
    fn dag_lambda(&mut self, st: &mut UnifyState, eq: &Equation) -> R<bool> {
        let (Expr::Lam(a, s), Expr::Lam(b, t)) = (&eq.lhs, &eq.rhs) else { unreachable!("λ-equation") };
        let tainted = st.tainted();
        if UnifyState::ground_wrt(&eq.rhs, &tainted) {
            self.lambda(st, a.clone(), (**s).clone(), b.clone(), (**t).clone())?;
            Ok(true)
        } else if UnifyState::ground_wrt(&eq.lhs, &tainted) {
            self.lambda(st, b.clone(), (**t).clone(), a.clone(), (**s).clone())?;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Rule (7): one successor per correspondence of bindings.
    fn rule7(&mut self, st: &mut UnifyState, eq: &Equation) -> R<Vec<UnifyState>> {
        let (Expr::Letrec(e1, r1), Expr::Letrec(e2, r2)) = (&eq.lhs, &eq.rhs) else { unreachable!("letrec equation") };
        let (la, le): (Vec<Atom>, Vec<Expr>) = e1.bindings().map(|(a, e)| (a.clone(), e.clone())).unzip();
        let (ra, re): (Vec<Atom>, Vec<Expr>) = e2.bindings().map(|(a, e)| (a.clone(), e.clone())).unzip();
        let lhs = lambda_chain(&la, &le, r1);
        let mut children = Vec::new();
        for rho in lex_permutations(la.len()) {
            let mut c = st.clone();
            let rb: Vec<Atom> = rho.iter().map(|&i| ra[i].clone()).collect();
            let rx: Vec<Expr> = rho.iter().map(|&i| re[i].clone()).collect();
            self.tick(&mut c, "(7)", || format!("{eq} with ρ = {rho:?}"))?;
            let flat = flatten(&Equation::new(lhs.clone(), lambda_chain(&rb, &rx, r2)), &mut c.supply);
            c.todo.extend(flat.into_iter().rev());
            children.push(c);
        }
        self.stats.branches += children.len();
        Ok(children)
    }

    /// (MMS) on the first variable with two equations.
    fn try_mms(&mut self, st: &mut UnifyState) -> R<bool> {
        let mut first: BTreeMap<&Var, usize> = BTreeMap::new();
        let mut found = None;
        for (j, (x, _)) in st.var_eqs.iter().enumerate() {
            match first.get(x) {
                Some(&i) => {
                    found = Some((i, j));
                    break;
                }
                None => {
                    first.insert(x, j);
                }
            }
        }
        let Some((i, j)) = found else { return Ok(false) };
        let (keep, drop) = if st.dag {
            let tainted = st.tainted();
            let gi = UnifyState::ground_wrt(&st.var_eqs[i].1, &tainted);
            let gj = UnifyState::ground_wrt(&st.var_eqs[j].1, &tainted);
            if !gi && gj {
                (j, i)
            } else {
                (i, j)
            }
        } else {
            (i, j)
        };
        let e1 = st.var_eqs[keep].1.clone();
        let (x, e2) = st.var_eqs.remove(drop);
        self.tick(st, "MMS", || format!("{x} = {e1}, {x} = {e2}"))?;
        st.todo.push(Equation::new(e1, e2));
        Ok(true)
    }

    /// (FPS) on the first maximal variable that occurs nowhere else.
    fn try_fps(&mut self, st: &mut UnifyState) -> R<bool> {
        let order = st.order();
        let pick = (0..st.var_eqs.len()).find(|&i| {
            let x = &st.var_eqs[i].0;
            order.is_maximal(x) && !st.deferred.iter().any(|eq| eq.lhs.occurs(x) || eq.rhs.occurs(x))
        });
        let Some(i) = pick else { return Ok(false) };
        let (x, e) = st.var_eqs.remove(i);
        self.tick(st, "FPS", || format!("{x} := {e}"))?;
        st.theta.bind(x.clone(), e.clone());
        if let Some(block) = st.fix.remove(&x) {
            for tau in block.perms {
                st.todo.push(Equation::new(e.clone(), e.permute(&tau)));
            }
        }
        Ok(true)
    }

    fn output(&mut self, st: &mut UnifyState) -> R<Unifier> {
        self.tick(st, "Output", String::new)?;
        let freshness = resolve_freshness(&st.theta, &st.nabla)?;
        Ok(Unifier {
            sigma: st.theta.clone(),
            freshness,
            fixpoints: st.fixpoints(),
            vars: (*st.input_vars).clone(),
            atoms: st.support.iter().cloned().collect(),
        })
    }
}

/// The equation produced by rule (7) for the correspondence `rho`, before
/// flattening.
pub fn rule7_equation(eq: &Equation, rho: &[usize]) -> Result<Equation, Halt> {
    let (Expr::Letrec(e1, r1), Expr::Letrec(e2, r2)) = (&eq.lhs, &eq.rhs) else {
        return Err(Halt::Abort(TermError::Unsupported(format!("not a letrec equation: {eq}")).into()));
    };
    if tops_clash(&eq.lhs, &eq.rhs) {
        return Err(Failure::Clash.into());
    }
    let (la, le): (Vec<Atom>, Vec<Expr>) = e1.bindings().map(|(a, e)| (a.clone(), e.clone())).unzip();
    let (ra, re): (Vec<Atom>, Vec<Expr>) = e2.bindings().map(|(a, e)| (a.clone(), e.clone())).unzip();
    let mut sorted = rho.to_vec();
    sorted.sort_unstable();
    if sorted != (0..la.len()).collect::<Vec<_>>() {
        return Err(Halt::Abort(TermError::Unsupported(format!("not a permutation of 0..{}: {rho:?}", la.len())).into()));
    }
    let rb: Vec<Atom> = rho.iter().map(|&i| ra[i].clone()).collect();
    let rx: Vec<Expr> = rho.iter().map(|&i| re[i].clone()).collect();
    Ok(Equation::new(lambda_chain(&la, &le, r1), lambda_chain(&rb, &rx, r2)))
}

/// Rules (5) and (6) on the common λ-prefix of an equation, without
/// flattening. Returns the remaining equation and the freshness
/// constraints introduced.
pub fn peel_lambdas(eq: &Equation) -> (Equation, Vec<(Atom, Expr)>) {
    let mut fresh = Vec::new();
    let (mut l, mut r) = (eq.lhs.clone(), eq.rhs.clone());
    while let (Expr::Lam(a, s), Expr::Lam(b, t)) = (&l, &r) {
        let (a, s, b, t) = (a.clone(), (**s).clone(), b.clone(), (**t).clone());
        if a == b {
            (l, r) = (s, t);
        } else {
            fresh.push((a.clone(), t.clone()));
            (l, r) = (s, t.permute(&Permutation::swap(a, b)));
        }
    }
    (Equation::new(l, r), fresh)
}

fn with_engine<T>(f: impl FnOnce(&mut Engine) -> R<T>) -> R<T> {
    let mut engine = Engine::new(UnifyConfig::default());
    f(&mut engine)
}

/// Rules (1)–(6) to exhaustion, leaving letrec equations in place.
pub fn decompose(st: &UnifyState) -> Result<UnifyState, Halt> {
    let mut st = st.clone();
    with_engine(|e| e.decompose(&mut st))?;
    Ok(st)
}

/// Rule (7) on a letrec equation of `st`, which is removed from `Γ` if
/// present. Each successor has the flattened equation pending.
pub fn rule_decompose_letrec(st: &UnifyState, eq: &Equation) -> Result<Vec<UnifyState>, Halt> {
    if !matches!((&eq.lhs, &eq.rhs), (Expr::Letrec(..), Expr::Letrec(..))) {
        return Err(Halt::Abort(TermError::Unsupported(format!("not a letrec equation: {eq}")).into()));
    }
    if tops_clash(&eq.lhs, &eq.rhs) {
        return Err(Failure::Clash.into());
    }
    let mut st = st.clone();
    st.letrec_eqs.retain(|e| e.symmetric_key() != eq.symmetric_key());
    st.todo.retain(|e| e.symmetric_key() != eq.symmetric_key());
    with_engine(|e| e.rule7(&mut st, eq))
}

/// (MMS) on `x`, followed by rules (1)–(6). `None` if `x` does not have two
/// variable equations after decomposition.
pub fn rule_mms(st: &UnifyState, x: &Var) -> Result<Option<UnifyState>, Halt> {
    let mut st = decompose(st)?;
    let idx: Vec<usize> = st.var_eqs.iter().enumerate().filter(|(_, (y, _))| y == x).map(|(i, _)| i).collect();
    if idx.len() < 2 {
        return Ok(None);
    }
    let e1 = st.var_eqs[idx[0]].1.clone();
    let (_, e2) = st.var_eqs.remove(idx[1]);
    with_engine(|e| {
        e.tick(&mut st, "MMS", String::new)?;
        st.todo.push(Equation::new(e1, e2));
        e.decompose(&mut st)
    })?;
    Ok(Some(st))
}

/// (FPS) on `x`, followed by rules (1)–(6). `None` if the side conditions
/// do not hold.
pub fn rule_fps(st: &UnifyState, x: &Var) -> Result<Option<UnifyState>, Halt> {
    let mut st = decompose(st)?;
    let idx: Vec<usize> = st.var_eqs.iter().enumerate().filter(|(_, (y, _))| y == x).map(|(i, _)| i).collect();
    if idx.len() != 1 || !st.order().is_maximal(x) || check_failures(&st).is_some() {
        return Ok(None);
    }
    let (x, e) = st.var_eqs.remove(idx[0]);
    st.theta.bind(x.clone(), e.clone());
    if let Some(block) = st.fix.remove(&x) {
        for tau in block.perms {
            st.todo.push(Equation::new(e.clone(), e.permute(&tau)));
        }
    }
    with_engine(|eng| eng.decompose(&mut st))?;
    Ok(Some(st))
}

/// (ElimFP) as an insertion filter: adds `x ≐ π·x` unless `π` is generated
/// by the stored fixpoint permutations of `x`. Returns whether it was
/// dropped.
pub fn rule_elimfp(st: &mut UnifyState, x: &Var, pi: &Permutation) -> Result<bool, Halt> {
    let before = st.fixpoint_count(x);
    with_engine(|e| e.add_fixpoint(st, x, pi.clone()))?;
    Ok(st.fixpoint_count(x) == before)
}
