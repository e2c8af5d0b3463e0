//! Line-oriented problem files.
//!
//! ```text
//! # comment
//! arity f 2            declares a function symbol
//! s = t                equation
//! s <= t               match equation (ground right side)
//! a # e                freshness constraint
//! node N = e           shared node of a dag matching problem
//! ```

use std::fmt::Write as _;

use crate::error::{ProblemError, TermError};
use crate::matching::{DagProblem, MatchEquation};
use crate::term::{ArityTable, Atom, Equation, Expr, Parser, Var};
use crate::unify::UnifyProblem;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Problem {
    pub arities: ArityTable,
    pub equations: Vec<Equation>,
    pub matches: Vec<MatchEquation>,
    pub freshness: Vec<(Atom, Expr)>,
    pub nodes: Vec<(Var, Expr)>,
}

fn term_err(line: usize) -> impl Fn(TermError) -> ProblemError {
    move |source| ProblemError::Term { line, source }
}

impl Problem {
    pub fn parse(text: &str) -> Result<Problem, ProblemError> {
        let mut out = Problem::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let err = term_err(line);
            let mut words = body.split_whitespace();
            match words.next() {
                Some("arity") => {
                    let (Some(name), Some(n), None) = (words.next(), words.next(), words.next()) else {
                        return Err(ProblemError::Declaration { line, msg: "expected `arity <name> <n>`".into() });
                    };
                    let n: usize = n
                        .parse()
                        .map_err(|_| ProblemError::Declaration { line, msg: format!("bad arity `{n}`") })?;
                    out.arities.declare(name, n).map_err(&err)?;
                }
                Some("node") => {
                    let mut p = Parser::new(&body["node".len()..], &mut out.arities).map_err(&err)?;
                    let v = p.var().map_err(&err)?;
                    p.expect_sym("=").map_err(&err)?;
                    let e = p.expr().map_err(&err)?;
                    p.expect_end().map_err(&err)?;
                    out.nodes.push((v, e));
                }
                _ => {
                    let mut p = Parser::new(body, &mut out.arities).map_err(&err)?;
                    let lhs = p.expr().map_err(&err)?;
                    if p.expect_sym("=").is_ok() {
                        let rhs = p.expr().map_err(&err)?;
                        p.expect_end().map_err(&err)?;
                        out.equations.push(Equation::new(lhs, rhs));
                    } else if p.expect_sym("<=").is_ok() {
                        let rhs = p.expr().map_err(&err)?;
                        p.expect_end().map_err(&err)?;
                        out.matches.push(MatchEquation::new(lhs, rhs));
                    } else if p.expect_sym("#").is_ok() {
                        let Expr::Atom(a) = lhs else {
                            return Err(ProblemError::Declaration {
                                line,
                                msg: "left of `#` must be an atom".into(),
                            });
                        };
                        let e = p.expr().map_err(&err)?;
                        p.expect_end().map_err(&err)?;
                        out.freshness.push((a, e));
                    } else {
                        return Err(ProblemError::Declaration { line, msg: "expected `=`, `<=` or `#`".into() });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Equations and match equations, all as symmetric equations.
    pub fn unify_problem(&self) -> UnifyProblem {
        let mut equations = self.equations.clone();
        equations.extend(self.matches.iter().map(|m| Equation::new(m.lhs.clone(), m.rhs.clone())));
        UnifyProblem { equations, freshness: self.freshness.clone() }
    }

    /// Match equations, with plain equations read left to right.
    pub fn match_equations(&self) -> Vec<MatchEquation> {
        let mut out = self.matches.clone();
        out.extend(self.equations.iter().map(|e| MatchEquation::new(e.lhs.clone(), e.rhs.clone())));
        out
    }

    pub fn dag_problem(&self) -> DagProblem {
        DagProblem { nodes: self.nodes.clone(), equations: self.match_equations() }
    }

    pub fn from_unify(p: &UnifyProblem) -> Problem {
        Problem { equations: p.equations.clone(), freshness: p.freshness.clone(), ..Problem::default() }
    }

    pub fn from_matches(eqs: &[MatchEquation]) -> Problem {
        Problem { matches: eqs.to_vec(), ..Problem::default() }
    }

    pub fn from_dag(p: &DagProblem) -> Problem {
        Problem { matches: p.equations.clone(), nodes: p.nodes.clone(), ..Problem::default() }
    }

    /// Text that [`Problem::parse`] reads back to the same problem.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (name, n) in self.arities.iter() {
            let _ = writeln!(s, "arity {name} {n}");
        }
        for (v, e) in &self.nodes {
            let _ = writeln!(s, "node {v} = {e}");
        }
        for eq in &self.equations {
            let _ = writeln!(s, "{} = {}", eq.lhs, eq.rhs);
        }
        for eq in &self.matches {
            let _ = writeln!(s, "{} <= {}", eq.lhs, eq.rhs);
        }
        for (a, e) in &self.freshness {
            let _ = writeln!(s, "{a} # {e}");
        }
        s
    }
}
