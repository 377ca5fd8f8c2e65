use thiserror::Error;

use crate::qp::QpSolution;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid symbol id {id} (alphabet has {size} symbols)")]
    InvalidSymbol { id: usize, size: usize },

    #[error("invalid bit string: {0}")]
    BitLength(String),

    #[error("invalid frame length {len} for oversampling factor {m_rx}")]
    FrameLength { len: usize, m_rx: usize },

    #[error("channel matrix is rank deficient")]
    RankDeficient,

    #[error("matrix is not positive semidefinite")]
    NonPsd,

    #[error("QP solver hit the iteration limit after {} iterations", .0.iterations)]
    MaxIterations(Box<QpSolution>),

    #[error("QP is infeasible")]
    Infeasible,

    #[error("target SER {target:e} is not reached on the search interval (SER_ub at gamma={gamma_max} is {ser:e})")]
    TargetUnreachable { target: f64, gamma_max: f64, ser: f64 },

    #[error("unsupported oversampling factor {0}")]
    UnsupportedOversampling(usize),

    #[error("malformed range {0:?}; expected start:step:stop")]
    Range(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Plot(String),
}

impl Error {
    /// Process exit code: 2 configuration, 3 numerical failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::RankDeficient
            | Error::NonPsd
            | Error::MaxIterations(_)
            | Error::Infeasible
            | Error::TargetUnreachable { .. } => 3,
            Error::Io { .. } => 4,
            _ => 2,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
