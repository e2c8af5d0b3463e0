use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("function symbol `{name}` has arity {expected}, applied to {found} arguments")]
    Arity { name: String, expected: usize, found: usize },
    #[error("duplicate letrec binder `{0}`")]
    DuplicateBinder(String),
    #[error("atom map is not a bijection")]
    NotABijection,
    #[error("expression is not ground: {0}")]
    NonGround(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("atom `{0}` is outside the group's support")]
    UnsupportedAtom(String),
}

/// Errors that abort a whole run, as opposed to the per-branch failures
/// recorded in reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("step limit of {0} rule applications exceeded")]
    StepLimitExceeded(usize),
    #[error("non-atomic freshness constraint at output: {0}")]
    NonAtomicFreshness(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("line {line}: {source}")]
    Term { line: usize, source: TermError },
    #[error("line {line}: {msg}")]
    Declaration { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph is not regular")]
    NotRegular,
    #[error("graphs have different vertex counts ({0} vs {1})")]
    SizeMismatch(usize, usize),
    #[error("{0}")]
    Invalid(String),
}

/// Why a single branch of a search failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Failure {
    Clash,
    CycleDetected,
    FreshnessFail,
    FreshnessSolutionFail,
    MergeFail,
    FreshnessGuardFail,
}

impl Failure {
    pub fn name(self) -> &'static str {
        match self {
            Failure::Clash => "clash",
            Failure::CycleDetected => "cycle",
            Failure::FreshnessFail => "freshness",
            Failure::FreshnessSolutionFail => "freshness-solution",
            Failure::MergeFail => "merge",
            Failure::FreshnessGuardFail => "freshness-guard",
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
