use thiserror::Error;

use crate::solver::SolveReport;

/// A violated Gårding-cone condition: the first index `i` with `σ_i ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeViolation {
    pub index: usize,
    pub sigma: f64,
}

impl std::fmt::Display for ConeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "sigma_{} = {:e} <= 0", self.index, self.sigma)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("not admissible: {violation}")]
    Cone { violation: ConeViolation },

    #[error("not admissible at node {node}: {violation}")]
    ConeAtNode {
        node: usize,
        violation: ConeViolation,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("newton iteration did not converge: {reason}")]
    NonConvergence {
        reason: String,
        report: Box<SolveReport>,
    },

    #[error("continuation failed at t = {t}: {reason}")]
    Continuation {
        t: f64,
        reason: String,
        report: Box<SolveReport>,
    },

    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error("parse error at {position}: {message}")]
    Parse { position: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Cone violation carried by this error, if any.
    pub fn cone_violation(&self) -> Option<ConeViolation> {
        match self {
            Error::Cone { violation } | Error::ConeAtNode { violation, .. } => Some(*violation),
            _ => None,
        }
    }

    /// The solve report attached to solver failures.
    pub fn report(&self) -> Option<&SolveReport> {
        match self {
            Error::NonConvergence { report, .. } | Error::Continuation { report, .. } => {
                Some(report)
            }
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
