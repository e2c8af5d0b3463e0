use std::collections::{BTreeMap, BTreeSet};

use crate::term::{Equation, Expr, Var};

/// The variable dependency relation: `X ≻ Y` when some equation `X ≐ e`
/// has a non-variable `e` mentioning `Y`.
#[derive(Clone, Debug, Default)]
pub struct VarDepOrder {
    edges: BTreeMap<Var, BTreeSet<Var>>,
}

impl VarDepOrder {
    pub fn new() -> VarDepOrder {
        VarDepOrder::default()
    }

    pub fn from_equations<'a>(eqs: impl IntoIterator<Item = &'a Equation>) -> VarDepOrder {
        let mut order = VarDepOrder::new();
        for eq in eqs {
            for (l, r) in [(&eq.lhs, &eq.rhs), (&eq.rhs, &eq.lhs)] {
                if let Some(x) = l.as_plain_var() {
                    order.add(x, r);
                }
            }
        }
        order
    }

    /// Records `x ≐ e`. Suspensions and variables add no edges.
    pub fn add(&mut self, x: &Var, e: &Expr) {
        if e.is_susp() {
            return;
        }
        let entry = self.edges.entry(x.clone()).or_default();
        for y in e.vars() {
            entry.insert(y);
        }
    }

    pub fn successors(&self, x: &Var) -> impl Iterator<Item = &Var> {
        self.edges.get(x).into_iter().flatten()
    }

    /// `x >vd y`, the transitive closure.
    pub fn greater(&self, x: &Var, y: &Var) -> bool {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&Var> = self.successors(x).collect();
        while let Some(v) = stack.pop() {
            if v == y {
                return true;
            }
            if seen.insert(v) {
                stack.extend(self.successors(v));
            }
        }
        false
    }

    /// A variable on a cycle of the relation, if there is one.
    pub fn find_cycle(&self) -> Option<Var> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Open,
            Done,
        }
        let mut marks: BTreeMap<&Var, Mark> = BTreeMap::new();
        for root in self.edges.keys() {
            if marks.contains_key(root) {
                continue;
            }
            let mut stack: Vec<(&Var, Vec<&Var>)> = vec![(root, self.successors(root).collect())];
            marks.insert(root, Mark::Open);
            while let Some((v, rest)) = stack.last_mut() {
                match rest.pop() {
                    Some(w) => match marks.get(w) {
                        Some(Mark::Open) => return Some(w.clone()),
                        Some(Mark::Done) => {}
                        None => {
                            marks.insert(w, Mark::Open);
                            let next = self.successors(w).collect();
                            stack.push((w, next));
                        }
                    },
                    None => {
                        marks.insert(*v, Mark::Done);
                        stack.pop();
                    }
                }
            }
        }
        None
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Whether no variable is above `x`.
    pub fn is_maximal(&self, x: &Var) -> bool {
        self.edges.iter().all(|(y, succ)| y == x || !succ.contains(x))
    }
}
