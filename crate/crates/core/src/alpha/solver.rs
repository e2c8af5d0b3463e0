//! Matching of an expression with unification variables against a ground
//! expression up to alpha-equivalence.
//!
//! Binders of the two sides are paired up: a `lam` frame pairs its single
//! binder, a `letrec` frame holds a partial bijection between its binding
//! atoms that is extended on demand. Atom occurrences fix entries of these
//! bijections, and every new pair of letrec binders adds the goal that the
//! two bound expressions match. When no goal can make progress the search
//! branches on one unpaired left binder.

use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use crate::error::{EngineError, Failure, TermError};
use crate::perm::Permutation;
use crate::term::{Atom, Expr, Var};

struct Shape {
    left: Vec<Atom>,
    right: Vec<Atom>,
    left_exprs: Vec<Expr>,
    right_exprs: Vec<Expr>,
    inner: Ctx,
    letrec: bool,
}

#[derive(Clone)]
struct Frame {
    shape: Rc<Shape>,
    l2r: Vec<Option<usize>>,
    r2l: Vec<Option<usize>>,
}

struct CtxNode {
    frame: usize,
    parent: Ctx,
}

type Ctx = Option<Rc<CtxNode>>;

#[derive(Clone)]
struct Goal {
    pat: Expr,
    tgt: Expr,
    ctx: Ctx,
    merge: bool,
}

#[derive(Clone)]
struct State {
    frames: Vec<Frame>,
    values: BTreeMap<Var, Expr>,
    ready: Vec<Goal>,
    blocked: Vec<Goal>,
    changed: bool,
}

enum Step {
    Done,
    Blocked,
}

enum Rename {
    Renamed(Expr),
    Blocked,
}

/// A solution: values for the pattern variables and, if the top-level
/// pair of expressions are letrecs, the pairing of their binders.
#[derive(Clone, Debug)]
pub(crate) struct Solution {
    pub values: BTreeMap<Var, Expr>,
    pub witness: Vec<(Atom, Atom)>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Outcome {
    pub solutions: Vec<Solution>,
    pub failures: BTreeMap<Failure, usize>,
    pub branches: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Limits {
    pub max_solutions: usize,
    pub max_branches: usize,
}

impl Limits {
    pub fn first() -> Limits {
        Limits { max_solutions: 1, max_branches: usize::MAX }
    }
}

fn check_input(pat: &Expr, tgt: &Expr) -> Result<(), TermError> {
    let mut bad = None;
    pat.visit(&mut |e| {
        if let Expr::Letrec(env, _) = e {
            if env.has_env_vars() {
                bad = Some(e.to_string());
            }
        }
    });
    if let Some(s) = bad {
        return Err(TermError::Unsupported(format!("environment variable in {s}")));
    }
    if !tgt.is_ground() {
        return Err(TermError::NonGround(tgt.to_string()));
    }
    Ok(())
}

/// Solves `pats[i] ⊴ tgts[i]` simultaneously. Targets must be ground.
pub(crate) fn solve(pairs: &[(Expr, Expr)], limits: Limits) -> Result<Outcome, EngineError> {
    for (p, t) in pairs {
        check_input(p, t)?;
    }
    let mut init = State {
        frames: Vec::new(),
        values: BTreeMap::new(),
        ready: pairs
            .iter()
            .rev()
            .map(|(p, t)| Goal { pat: p.clone(), tgt: t.clone(), ctx: None, merge: false })
            .collect(),
        blocked: Vec::new(),
        changed: false,
    };
    let top_letrec = match pairs {
        [(Expr::Letrec(..), Expr::Letrec(..))] => true,
        _ => false,
    };
    // the top-level letrec frame must be frame 0 for the witness
    if top_letrec {
        if let Some(g) = init.ready.pop() {
            if let Err(f) = init.step(g).map(|_| ()) {
                let mut out = Outcome::default();
                *out.failures.entry(f).or_default() += 1;
                return Ok(out);
            }
        }
    }
    let mut out = Outcome::default();
    let mut stack = vec![init];
    while let Some(mut st) = stack.pop() {
        match st.run() {
            Err(f) => *out.failures.entry(f).or_default() += 1,
            Ok(None) => {
                let witness = if top_letrec { st.witness() } else { Vec::new() };
                out.solutions.push(Solution { values: st.values, witness });
                if out.solutions.len() >= limits.max_solutions {
                    break;
                }
            }
            Ok(Some((f, i, cands))) => {
                out.branches += 1;
                if out.branches > limits.max_branches {
                    return Err(EngineError::StepLimitExceeded(limits.max_branches));
                }
                for &j in cands.iter().rev() {
                    let mut next = st.clone();
                    match next.assign(f, i, j) {
                        Ok(()) => stack.push(next),
                        Err(e) => *out.failures.entry(e).or_default() += 1,
                    }
                }
            }
        }
    }
    Ok(out)
}

fn lookup(ctx: &Ctx, frames: &[Frame], x: &Atom, left: bool) -> Option<(usize, usize)> {
    let mut cur = ctx.as_ref();
    while let Some(node) = cur {
        let shape = &frames[node.frame].shape;
        let side = if left { &shape.left } else { &shape.right };
        if let Some(i) = side.iter().position(|a| a == x) {
            return Some((node.frame, i));
        }
        cur = node.parent.as_ref();
    }
    None
}

impl State {
    fn witness(&self) -> Vec<(Atom, Atom)> {
        let Some(f) = self.frames.first() else { return Vec::new() };
        f.shape
            .left
            .iter()
            .zip(&f.l2r)
            .filter_map(|(a, j)| j.map(|j| (a.clone(), f.shape.right[j].clone())))
            .collect()
    }

    fn push_frame(&mut self, shape: Shape) -> usize {
        let n = shape.left.len();
        self.frames.push(Frame { shape: Rc::new(shape), l2r: vec![None; n], r2l: vec![None; n] });
        self.frames.len() - 1
    }

    /// Drains all goals. Returns the branching point if the search is stuck.
    fn run(&mut self) -> Result<Option<(usize, usize, Vec<usize>)>, Failure> {
        loop {
            while let Some(g) = self.ready.pop() {
                if let Step::Blocked = self.step(g.clone())? {
                    self.blocked.push(g);
                }
            }
            if self.changed && !self.blocked.is_empty() {
                self.changed = false;
                self.ready = std::mem::take(&mut self.blocked);
                self.ready.reverse();
                continue;
            }
            self.changed = false;
            return Ok(self.choose());
        }
    }

    fn choose(&self) -> Option<(usize, usize, Vec<usize>)> {
        let mut best: Option<(usize, usize, Vec<usize>)> = None;
        for (f, frame) in self.frames.iter().enumerate() {
            if !frame.shape.letrec {
                continue;
            }
            for i in 0..frame.l2r.len() {
                if frame.l2r[i].is_some() {
                    continue;
                }
                let cands: Vec<usize> = (0..frame.r2l.len())
                    .filter(|&j| frame.r2l[j].is_none())
                    .filter(|&j| self.compatible(&frame.shape.left_exprs[i], &frame.shape.right_exprs[j], frame, false, 4))
                    .collect();
                if best.as_ref().map_or(true, |b| cands.len() < b.2.len()) {
                    let done = cands.is_empty();
                    best = Some((f, i, cands));
                    if done {
                        return best;
                    }
                }
            }
        }
        best
    }

    /// A cheap necessary condition for `s ⊴ t` where both sit directly
    /// under the binders of `frame`.
    fn compatible(&self, s: &Expr, t: &Expr, frame: &Frame, shadowed: bool, fuel: usize) -> bool {
        if fuel == 0 {
            return true;
        }
        match (s, t) {
            (Expr::Susp(p, x), _) => match self.values.get(x) {
                Some(v) => self.compatible(&v.permute(p), t, frame, shadowed, fuel - 1),
                None => true,
            },
            (Expr::Atom(x), Expr::Atom(y)) => {
                if shadowed {
                    return true;
                }
                let i = frame.shape.left.iter().position(|a| a == x);
                let j = frame.shape.right.iter().position(|a| a == y);
                match (i, j) {
                    (Some(i), Some(j)) => {
                        frame.l2r[i].map_or(true, |k| k == j) && frame.r2l[j].map_or(true, |k| k == i)
                    }
                    (None, None) => true,
                    _ => false,
                }
            }
            (Expr::Lam(_, a), Expr::Lam(_, b)) => self.compatible(a, b, frame, true, fuel - 1),
            (Expr::App(f, xs), Expr::App(g, ys)) => {
                f == g
                    && xs.len() == ys.len()
                    && xs.iter().zip(ys).all(|(a, b)| self.compatible(a, b, frame, shadowed, fuel - 1))
            }
            (Expr::Letrec(e1, _), Expr::Letrec(e2, _)) => e1.len() == e2.len(),
            _ => false,
        }
    }

    fn assign(&mut self, f: usize, i: usize, j: usize) -> Result<(), Failure> {
        let frame = &mut self.frames[f];
        if frame.l2r[i] == Some(j) {
            return Ok(());
        }
        if frame.l2r[i].is_some() || frame.r2l[j].is_some() {
            return Err(Failure::Clash);
        }
        frame.l2r[i] = Some(j);
        frame.r2l[j] = Some(i);
        self.changed = true;
        let shape = frame.shape.clone();
        self.ready.push(Goal {
            pat: shape.left_exprs[i].clone(),
            tgt: shape.right_exprs[j].clone(),
            ctx: shape.inner.clone(),
            merge: false,
        });
        Ok(())
    }

    fn step(&mut self, g: Goal) -> Result<Step, Failure> {
        let clash = if g.merge { Failure::MergeFail } else { Failure::Clash };
        match (&g.pat, &g.tgt) {
            (Expr::Susp(p, x), t) => {
                if let Some(v) = self.values.get(x) {
                    self.ready.push(Goal { pat: v.permute(p), tgt: t.clone(), ctx: g.ctx, merge: true });
                    return Ok(Step::Done);
                }
                match self.rename(t, &g.ctx)? {
                    Rename::Blocked => Ok(Step::Blocked),
                    Rename::Renamed(r) => {
                        self.values.insert(x.clone(), r.permute(&p.inverse()));
                        self.changed = true;
                        Ok(Step::Done)
                    }
                }
            }
            (Expr::Atom(x), Expr::Atom(y)) => {
                let lx = lookup(&g.ctx, &self.frames, x, true);
                let ry = lookup(&g.ctx, &self.frames, y, false);
                match (lx, ry) {
                    (None, None) if x == y => Ok(Step::Done),
                    (Some((f, i)), Some((h, j))) if f == h => {
                        if self.frames[f].shape.letrec {
                            self.assign(f, i, j).map_err(|_| clash)?;
                        }
                        Ok(Step::Done)
                    }
                    _ => Err(clash),
                }
            }
            (Expr::Lam(a, s), Expr::Lam(b, t)) => {
                let f = self.push_frame(Shape {
                    left: vec![a.clone()],
                    right: vec![b.clone()],
                    left_exprs: Vec::new(),
                    right_exprs: Vec::new(),
                    inner: None,
                    letrec: false,
                });
                let ctx = Some(Rc::new(CtxNode { frame: f, parent: g.ctx }));
                self.ready.push(Goal { pat: (**s).clone(), tgt: (**t).clone(), ctx, merge: g.merge });
                Ok(Step::Done)
            }
            (Expr::App(f, xs), Expr::App(h, ys)) if f == h && xs.len() == ys.len() => {
                for (s, t) in xs.iter().zip(ys).rev() {
                    self.ready.push(Goal { pat: s.clone(), tgt: t.clone(), ctx: g.ctx.clone(), merge: g.merge });
                }
                Ok(Step::Done)
            }
            (Expr::Letrec(e1, s), Expr::Letrec(e2, t)) if e1.len() == e2.len() => {
                let (left, left_exprs): (Vec<_>, Vec<_>) = e1.bindings().map(|(a, e)| (a.clone(), e.clone())).unzip();
                let (right, right_exprs): (Vec<_>, Vec<_>) = e2.bindings().map(|(a, e)| (a.clone(), e.clone())).unzip();
                let f = self.frames.len();
                let ctx = Some(Rc::new(CtxNode { frame: f, parent: g.ctx }));
                self.push_frame(Shape { left, right, left_exprs, right_exprs, inner: ctx.clone(), letrec: true });
                self.ready.push(Goal { pat: (**s).clone(), tgt: (**t).clone(), ctx, merge: g.merge });
                Ok(Step::Done)
            }
            _ => Err(clash),
        }
    }

    /// Renames the free atoms of a ground target into the pattern side's
    /// names, so that it can be stored as the value of a variable.
    fn rename(&self, t: &Expr, ctx: &Ctx) -> Result<Rename, Failure> {
        let mut map = BTreeMap::new();
        for y in t.free_atoms() {
            match lookup(ctx, &self.frames, &y, false) {
                None => {
                    if lookup(ctx, &self.frames, &y, true).is_some() {
                        return Err(Failure::FreshnessGuardFail);
                    }
                }
                Some((f, j)) => {
                    let frame = &self.frames[f];
                    let i = if frame.shape.letrec {
                        match frame.r2l[j] {
                            Some(i) => i,
                            None => return Ok(Rename::Blocked),
                        }
                    } else {
                        0
                    };
                    let x = frame.shape.left[i].clone();
                    if lookup(ctx, &self.frames, &x, true) != Some((f, i)) {
                        return Err(Failure::FreshnessGuardFail);
                    }
                    if x != y {
                        map.insert(y, x);
                    }
                }
            }
        }
        if map.is_empty() {
            return Ok(Rename::Renamed(t.clone()));
        }
        let dom: BTreeSet<Atom> = map.keys().cloned().collect();
        let ran: BTreeSet<Atom> = map.values().cloned().collect();
        let mut full = map.clone();
        for (r, d) in ran.difference(&dom).zip(dom.difference(&ran)) {
            full.insert(r.clone(), d.clone());
        }
        let p = Permutation::from_map(full).expect("extension of an injective map");
        Ok(Rename::Renamed(t.permute(&p)))
    }
}
