use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{what} is not symmetric (residual {residual:.3e})")]
    NotSymmetric { what: &'static str, residual: f64 },
    #[error("{what} is not skew-symmetric (residual {residual:.3e})")]
    NotSkew { what: &'static str, residual: f64 },
    #[error("matrix is not in so(V) (residual {residual:.3e})")]
    NotInSo { residual: f64 },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("ambiguous at tolerance {tol:.3e}: {detail}")]
    Ambiguous { detail: String, tol: f64 },
    #[error("overflow in {0}")]
    Overflow(&'static str),
    #[error("spec is conformally flat; the conformal algebra is not a plane-wave extension")]
    ConformallyFlat,
    #[error("constraint {name} violated (residual {residual:.3e})")]
    Constraint { name: &'static str, residual: f64 },
    #[error("invalid input: {0}")]
    Schema(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no convergence in {0}")]
    NoConvergence(&'static str),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// True for errors caused by the caller's input rather than by the library.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Internal(_) | Error::NoConvergence(_))
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::NotSkew { .. } => "not_skew",
            Error::NotInSo { .. } => "not_in_so",
            Error::NonFinite(_) => "non_finite",
            Error::Domain(_) => "domain",
            Error::Ambiguous { .. } => "ambiguous",
            Error::Overflow(_) => "overflow",
            Error::ConformallyFlat => "conformally_flat",
            Error::Constraint { .. } => "constraint",
            Error::Schema(_) => "schema",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::NoConvergence(_) => "no_convergence",
            Error::Internal(_) => "internal",
        }
    }

    /// Residual attached to the error, if any.
    pub fn residual(&self) -> Option<f64> {
        match self {
            Error::NotSymmetric { residual, .. }
            | Error::NotSkew { residual, .. }
            | Error::NotInSo { residual }
            | Error::Constraint { residual, .. } => Some(*residual),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
