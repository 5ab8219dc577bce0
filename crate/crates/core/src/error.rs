//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A matrix or vector had dimensions incompatible with the operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A computation that was required to stay exact hit an irrational step.
    #[error("exact arithmetic requested but {0} is not representable exactly")]
    ExactnessLost(String),

    /// The candidate complex structure does not square to minus the identity.
    #[error("J^2 + I has max-norm {defect}, not a complex structure")]
    NotComplexStructure { defect: f64 },

    /// The (1,0)-parts of the requested frame vectors are linearly dependent.
    #[error("frame vectors have linearly dependent (1,0)-parts")]
    DependentFrame,

    /// The complex structure fails the integrability condition.
    #[error("complex structure is not integrable (defect {defect})")]
    NotIntegrable { defect: f64 },

    /// The metric and complex structure are not compatible.
    #[error("metric and complex structure are not compatible (defect {defect})")]
    NotCompatible { defect: f64 },

    /// An operation that requires a flat metric received a non-flat one.
    #[error("metric is not flat (curvature max-norm {defect})")]
    NotFlat { defect: f64 },

    /// An operation limited to two-step solvable algebras received something else.
    #[error("Lie algebra is not two-step solvable")]
    NotTwoStepSolvable,

    /// The rotation-block splitting of the derived algebra could not be refined.
    #[error("could not split the derived algebra into rotation planes: {0}")]
    DegenerateSplitting(String),

    /// A structural requirement on the input failed (odd dimension, bad basis, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A generator specification violates its shape or rank requirements.
    #[error("invalid generator specification: {0}")]
    SpecInvalid(String),

    /// Input file could not be parsed or failed validation.
    #[error("parse error: {0}")]
    Parse(String),

    /// Underlying I/O failure while reading or writing algebra files.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
