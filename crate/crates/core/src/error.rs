use thiserror::Error;

/// Everything that can go wrong between a model definition and a report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("gap closing: {0}")]
    GapClosing(String),

    #[error("eigenphase {phase:.3e} lies within {tol:.1e} of the log branch cut at pi")]
    BranchAmbiguity { phase: f64, tol: f64 },

    #[error("time stepping did not converge: change {change:.3e} after {steps} steps")]
    NonConvergence { steps: usize, change: f64 },

    #[error("matrix is not unitary: residual {residual:.3e}")]
    NotUnitary { residual: f64 },

    #[error("net flux {flux:.3e} through slices normal to axis {axis}; Hopf invariant undefined")]
    NonzeroFlux { axis: usize, flux: f64 },

    #[error("field not resolved on this grid: {0}")]
    Resolution(String),

    #[error("preimage curve failed to close near cell {cell:?}")]
    OpenCurve { cell: [usize; 3] },

    #[error("curves too close: distance {distance:.3e} below {limit:.3e}")]
    CurvesTooClose { distance: f64, limit: f64 },

    #[error("curve is not null-homologous: winding {winding:?}")]
    NonContractibleCurve { winding: [i64; 3] },

    #[error("no edge mode at k2 = {k2:.4} for t0 = {t0}")]
    NoEdgeMode { t0: f64, k2: f64 },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Tags the error with the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The error with any stage tags removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
