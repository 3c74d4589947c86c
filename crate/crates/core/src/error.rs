use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: the stage matrix Id - zA is singular at z = {z}")]
    Pole { z: Complex64 },

    #[error("singular matrix (pivot {pivot:e}) {context}")]
    Singular { pivot: f64, context: String },

    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),

    #[error("branch cut: {value} lies on the closed negative real axis")]
    BranchCut { value: Complex64 },

    #[error("resolvent solve failed at nu = {nu}: {reason}")]
    Solver { nu: Complex64, reason: String },

    #[error("degenerate transparent boundary roots at nu = {nu}: |z1| = {z1_abs}, |z2| = {z2_abs}")]
    DegenerateRoots { nu: Complex64, z1_abs: f64, z2_abs: f64 },

    #[error("support error: {0}")]
    Support(String),

    #[error("quadrature did not converge: estimate {estimate:e} exceeds tolerance {tol:e}")]
    Accuracy { estimate: f64, tol: f64 },

    #[error("range error: {0}")]
    Range(String),

    #[error("level {level}, node {node}: {source}")]
    AtNode {
        level: usize,
        node: i64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for errors caused by invalid user input rather than numerical failure.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Support(_) => true,
            Error::AtNode { source, .. } => source.is_config(),
            _ => false,
        }
    }

    pub(crate) fn at_node(self, level: usize, node: i64) -> Self {
        Error::AtNode {
            level,
            node,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
