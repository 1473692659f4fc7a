use thiserror::Error;

/// Errors raised by the groupoid, law and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("source/target mismatch: |alpha(g) - beta(f)|_inf = {gap:e} exceeds {tol:e}")]
    SourceTargetMismatch { gap: f64, tol: f64 },

    #[error("singular jet: block {block} has smallest/largest singular value ratio {ratio:e}")]
    SingularJet { block: &'static str, ratio: f64 },

    #[error("parse error at {line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("index {index} out of range 1..={max} in `{variable}`")]
    IndexOutOfRange {
        variable: String,
        index: usize,
        max: usize,
    },

    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },

    #[error("law: unknown catalog entry `{0}`")]
    UnknownLaw(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("jet source {found:?} does not match assembly point {expected:?}")]
    SourceMismatch { expected: Vec<f64>, found: Vec<f64> },

    #[error("flow left the grid box at x = {x:?} (t = {t})")]
    FlowLeftGrid { x: Vec<f64>, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
