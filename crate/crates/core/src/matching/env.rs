use std::collections::BTreeMap;

use super::{dedupe_matchers, env_equivalent, MatchConfig, MatchEquation, MatchReport, Matcher};
use crate::alpha::{alpha_eq, check_fresh};
use crate::error::{EngineError, Failure, TermError};
use crate::perm::Permutation;
use crate::term::{Atom, Env, EnvItem, EnvVar, Expr};

type Bindings = Vec<(Atom, Expr)>;

/// A letrec equation with fixed and open environment parts on both sides.
#[derive(Clone, Debug)]
struct LetrecGoal {
    fixed_binds: Vec<(Expr, Expr)>,
    fixed_envs: Vec<(EnvVar, Bindings)>,
    open_left: Vec<EnvItem>,
    body_left: Expr,
    fixed_right: Bindings,
    open_right: Bindings,
    body_right: Expr,
}

impl LetrecGoal {
    fn swap_right(&mut self, p: &Permutation) {
        for (a, e) in self.fixed_right.iter_mut().chain(self.open_right.iter_mut()) {
            *a = p.apply(a);
            *e = e.permute(p);
        }
        for (_, e) in self.fixed_binds.iter_mut() {
            *e = e.permute(p);
        }
        for (_, bs) in self.fixed_envs.iter_mut() {
            for (a, e) in bs.iter_mut() {
                *a = p.apply(a);
                *e = e.permute(p);
            }
        }
        self.body_right = self.body_right.permute(p);
    }

    /// The whole right side as an expression.
    fn right_expr(&self) -> Expr {
        let items = self
            .fixed_right
            .iter()
            .chain(self.open_right.iter())
            .map(|(a, e)| EnvItem::Bind(a.clone(), e.clone()))
            .collect();
        Expr::Letrec(Env::new_unchecked(items), Box::new(self.body_right.clone()))
    }
}

#[derive(Clone, Debug)]
enum Goal {
    Expr(Expr, Expr),
    Env(EnvVar, Bindings),
    Letrec(Box<LetrecGoal>),
}

#[derive(Clone, Debug, Default)]
struct State {
    goals: Vec<Goal>,
    matcher: Matcher,
}

enum Step {
    Done,
    Branch(Vec<State>),
}

fn check_input(eqs: &[MatchEquation]) -> Result<(), TermError> {
    for eq in eqs {
        if !eq.rhs.is_ground() {
            return Err(TermError::NonGround(eq.rhs.to_string()));
        }
        let mut bad = None;
        eq.lhs.visit(&mut |e| match e {
            Expr::Susp(p, _) if !p.is_identity() => bad = Some(e.to_string()),
            Expr::Letrec(env, _) => {
                for item in env.items() {
                    if let EnvItem::Var(p, _) = item {
                        if !p.is_identity() {
                            bad = Some(e.to_string());
                        }
                    }
                }
            }
            _ => {}
        });
        if let Some(s) = bad {
            return Err(TermError::Unsupported(format!("suspension in environment matching: {s}")));
        }
    }
    Ok(())
}

fn bindings_of(env: &Env) -> Bindings {
    env.bindings().map(|(a, e)| (a.clone(), e.clone())).collect()
}

impl State {
    /// Processes goals until a branching point or the end.
    fn run(&mut self) -> Result<Step, Failure> {
        while let Some(goal) = self.goals.pop() {
            match goal {
                Goal::Expr(s, t) => self.expr(s, t)?,
                Goal::Env(v, bs) => {
                    let env = Env::new_unchecked(bs.into_iter().map(|(a, e)| EnvItem::Bind(a, e)).collect());
                    match self.matcher.envs.get(&v) {
                        Some(old) if !env_equivalent(old, &env) => return Err(Failure::MergeFail),
                        Some(_) => {}
                        None => {
                            self.matcher.envs.insert(v, env);
                        }
                    }
                }
                Goal::Letrec(g) => return self.letrec(*g).map(Step::Branch),
            }
        }
        Ok(Step::Done)
    }

    fn expr(&mut self, s: Expr, t: Expr) -> Result<(), Failure> {
        if s == t {
            return Ok(());
        }
        match (s, t) {
            (Expr::Susp(_, x), t) => match self.matcher.exprs.get(&x) {
                Some(old) => {
                    if !alpha_eq(old, &t).unwrap_or(false) {
                        return Err(Failure::MergeFail);
                    }
                }
                None => {
                    self.matcher.exprs.insert(x, t);
                }
            },
            (Expr::Atom(_), Expr::Atom(_)) => return Err(Failure::Clash),
            (Expr::App(f, xs), Expr::App(g, ys)) if f == g && xs.len() == ys.len() => {
                self.goals.extend(xs.into_iter().zip(ys).rev().map(|(a, b)| Goal::Expr(a, b)));
            }
            (Expr::Lam(a, s), Expr::Lam(b, t)) => {
                if a == b {
                    self.goals.push(Goal::Expr(*s, *t));
                } else if check_fresh(&a, &t) {
                    let t = t.permute(&Permutation::swap(a, b));
                    self.goals.push(Goal::Expr(*s, t));
                } else {
                    return Err(Failure::FreshnessGuardFail);
                }
            }
            (Expr::Letrec(e1, r1), Expr::Letrec(e2, r2)) => {
                let plain = e1.items().iter().filter(|i| matches!(i, EnvItem::Bind(..))).count();
                let exact = !e1.has_env_vars();
                if plain > e2.len() || (exact && plain != e2.len()) {
                    return Err(Failure::Clash);
                }
                // popped from the end: bindings first, then environment variables left to right
                let (binds, vars): (Vec<EnvItem>, Vec<EnvItem>) =
                    e1.into_items().into_iter().partition(|i| matches!(i, EnvItem::Bind(..)));
                let open_left: Vec<EnvItem> = vars.into_iter().rev().chain(binds).collect();
                self.goals.push(Goal::Letrec(Box::new(LetrecGoal {
                    fixed_binds: Vec::new(),
                    fixed_envs: Vec::new(),
                    open_left,
                    body_left: *r1,
                    fixed_right: Vec::new(),
                    open_right: bindings_of(&e2),
                    body_right: *r2,
                })));
            }
            _ => return Err(Failure::Clash),
        }
        Ok(())
    }

    /// One selection step on a letrec goal; the goal is consumed.
    fn letrec(&mut self, mut g: LetrecGoal) -> Result<Vec<State>, Failure> {
        let Some(item) = g.open_left.pop() else {
            if !g.open_right.is_empty() {
                return Err(Failure::Clash);
            }
            let mut next = self.clone();
            next.goals.push(Goal::Expr(g.body_left, g.body_right));
            for (v, bs) in g.fixed_envs.into_iter().rev() {
                next.goals.push(Goal::Env(v, bs));
            }
            for (s, t) in g.fixed_binds.into_iter().rev() {
                next.goals.push(Goal::Expr(s, t));
            }
            return Ok(vec![next]);
        };
        let mut out = Vec::new();
        match item {
            EnvItem::Bind(a, s) => {
                if g.open_right.is_empty() {
                    return Err(Failure::Clash);
                }
                let whole = g.right_expr();
                for j in 0..g.open_right.len() {
                    let b = g.open_right[j].0.clone();
                    if a != b && !check_fresh(&a, &whole) {
                        continue;
                    }
                    let mut h = g.clone();
                    let (_, t) = h.open_right.remove(j);
                    h.fixed_right.push((b.clone(), t));
                    if a != b {
                        h.swap_right(&Permutation::swap(a.clone(), b));
                    }
                    let t = h.fixed_right.last().map(|(_, t)| t.clone()).expect("just pushed");
                    h.fixed_binds.push((s.clone(), t));
                    let mut next = self.clone();
                    next.goals.push(Goal::Letrec(Box::new(h)));
                    out.push(next);
                }
                if out.is_empty() {
                    return Err(Failure::FreshnessGuardFail);
                }
            }
            EnvItem::Var(_, v) => {
                let n = g.open_right.len();
                let last_var = !g.open_left.iter().any(|i| matches!(i, EnvItem::Var(..)));
                if !last_var && n >= 63 {
                    return Err(Failure::Clash);
                }
                let masks: Vec<u64> = if last_var { vec![u64::MAX] } else { (0..(1u64 << n)).collect() };
                for mask in masks {
                    let mut h = g.clone();
                    let mut taken = Vec::new();
                    let mut rest = Vec::new();
                    for (i, bind) in h.open_right.drain(..).enumerate() {
                        if i >= 64 || mask >> i & 1 == 1 {
                            taken.push(bind);
                        } else {
                            rest.push(bind);
                        }
                    }
                    h.open_right = rest;
                    h.fixed_right.extend(taken.iter().cloned());
                    h.fixed_envs.push((v.clone(), taken));
                    let mut next = self.clone();
                    next.goals.push(Goal::Letrec(Box::new(h)));
                    out.push(next);
                }
            }
        }
        Ok(out)
    }
}

/// Matching where environment variables and expression variables occur on
/// the left only.
pub fn letrec_env_match(eqs: &[MatchEquation], cfg: &MatchConfig) -> Result<MatchReport, EngineError> {
    check_input(eqs)?;
    let cap = cfg.solution_cap();
    let init = State {
        goals: eqs.iter().rev().map(|e| Goal::Expr(e.lhs.clone(), e.rhs.clone())).collect(),
        matcher: Matcher::default(),
    };
    let mut stack = vec![init];
    let mut failures: BTreeMap<Failure, usize> = BTreeMap::new();
    let mut found = Vec::new();
    let mut branches = 0usize;
    let mut trace = Vec::new();
    while let Some(mut st) = stack.pop() {
        match st.run() {
            Ok(Step::Done) => {
                if cfg.trace {
                    trace.push(format!("matcher {}", st.matcher));
                }
                found.push(st.matcher);
                if found.len() >= cap {
                    break;
                }
            }
            Ok(Step::Branch(next)) => {
                branches += 1;
                if branches > cfg.step_limit {
                    return Err(EngineError::StepLimitExceeded(cfg.step_limit));
                }
                stack.extend(next.into_iter().rev());
            }
            Err(f) => {
                if cfg.trace {
                    trace.push(format!("fail ({f})"));
                }
                *failures.entry(f).or_default() += 1;
            }
        }
    }
    Ok(MatchReport { matchers: dedupe_matchers(found), failures, branches, trace })
}
