//! Nominal unification and matching for a lambda calculus with recursive let.

pub mod alpha;
pub mod error;
pub mod gen;
pub mod matching;
pub mod oracle;
pub mod perm;
pub mod problem;
pub mod term;
pub mod unify;

#[cfg(test)]
pub(crate) mod testing;

#[cfg(test)]
mod properties;

pub use alpha::{alpha_eq, check_fresh, simplify_freshness, FreshnessConstraint, FreshnessStore};
pub use error::{EngineError, Failure, GraphError, GroupError, ProblemError, TermError};
pub use perm::{PermGroup, Permutation};
pub use term::{
    apply_subst, atoms_of, flatten, parse_expression, AtomSetReport, ArityTable, Atom, Env, EnvItem, EnvVar,
    Equation, Expr, FunSym, Substitution, Var,
};
pub use matching::{
    letrec_dag_match, letrec_env_match, letrec_match, DagMatcher, DagProblem, MatchConfig, MatchEquation, MatchReport,
    Matcher,
};
pub use unify::{instantiate_fresh, is_instance, unify, Mode, Unifier, UnifyConfig, UnifyProblem, UnifyReport};
