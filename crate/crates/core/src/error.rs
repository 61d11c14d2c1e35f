use thiserror::Error;

/// Reason a numeric evaluation could not produce a value at a sample point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    LnNonpositive,
    DivisionByZero,
    NegativeBaseRealPower,
    Unbound,
}

impl std::fmt::Display for DomainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DomainKind::LnNonpositive => "ln-nonpositive",
            DomainKind::DivisionByZero => "division-by-zero",
            DomainKind::NegativeBaseRealPower => "negative-base-real-power",
            DomainKind::Unbound => "unbound-variable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inconsistent assumptions: {0}")]
    AssumptionInconsistent(String),
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("center dimension depends on parameters: {0}")]
    ParametricCenter(String),
    #[error("arity mismatch: {left} vs {right} theta variables")]
    ArityMismatch { left: usize, right: usize },
    #[error("undecidable case split: assume `{polynomial} != 0` (or `= 0`) to continue")]
    UndecidableCaseSplit { polynomial: String },
    #[error("domain error: {0}")]
    Domain(DomainKind),
    #[error("matrix is not block triangularizable: strongly connected index set {indices:?} of size {size}")]
    NotBlockTriangularizable { indices: Vec<usize>, size: usize },
    #[error("no solving pattern for theta{theta} in component {component}")]
    PatternNotSolvable { theta: usize, component: String },
    #[error("degenerate sample after {0} reseeds")]
    SampleDegenerate(usize),
    #[error("too many domain failures: {failed} of {attempted} sample attempts")]
    TooManyDomainFailures { failed: usize, attempted: usize },
    #[error("unknown catalog id `{0}`")]
    UnknownId(String),
    #[error("parse error at {line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("semantic error at line {line}: {message}")]
    Semantic { line: usize, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
