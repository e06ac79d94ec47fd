use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("partition {parts:?} does not fit the {n}x{k} box")]
    BoxViolation { parts: Vec<usize>, n: usize, k: usize },
    #[error("invalid specialization family: {0}")]
    InvalidFamily(String),
    #[error("point z = {re}+{im}i lies on a branch cut")]
    OnBranchCut { re: f64, im: f64 },
    #[error("enumeration too large: {0} partitions")]
    TooLarge(usize),
    #[error("no contour separates the pole sets")]
    ContourInfeasible,
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("no support interval found")]
    NoSupport,
    #[error("root finding failed: {0}")]
    RootFindFailure(String),
    #[error("more than one complex conjugate root pair near t = {0}")]
    AmbiguousRoots(f64),
    #[error("degenerate edge: {0}")]
    DegenerateEdge(String),
    #[error("not a Pearcey point: {0}")]
    NotPearcey(String),
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("calibration failure: {0}")]
    CalibrationFailure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::BoxViolation { .. } => "BoxViolation",
            Error::InvalidFamily(_) => "InvalidFamily",
            Error::OnBranchCut { .. } => "OnBranchCut",
            Error::TooLarge(_) => "TooLarge",
            Error::ContourInfeasible => "ContourInfeasible",
            Error::NoConvergence(_) => "NoConvergence",
            Error::NoSupport => "NoSupport",
            Error::RootFindFailure(_) => "RootFindFailure",
            Error::AmbiguousRoots(_) => "AmbiguousRoots",
            Error::DegenerateEdge(_) => "DegenerateEdge",
            Error::NotPearcey(_) => "NotPearcey",
            Error::DivergentIntegral(_) => "DivergentIntegral",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::CalibrationFailure(_) => "CalibrationFailure",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
