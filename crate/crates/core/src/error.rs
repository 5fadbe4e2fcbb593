use thiserror::Error;

use crate::numerics::NumericsError;
use crate::schemes::{AdmissibilityReport, SchemeError};
use crate::topology::TopologyError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("not admissible: {0}")]
    NotAdmissible(AdmissibilityReport),
    #[error("integration path leaves the admissible region at s = {at}")]
    PathLeavesAdmissible { at: f64 },
    #[error("energy quadrature did not converge (last change {change:.3e})")]
    QuadratureNoConvergence { change: f64 },
    #[error("curvature Jacobian is not symmetric (relative residual {residual:.3e})")]
    AsymmetricLaplacian { residual: f64 },
    #[error("invalid target curvature: {0}")]
    InvalidTarget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
