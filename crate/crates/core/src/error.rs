use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("transform determinant {det} is not 1 (|det - 1| = {deviation:.3e})")]
    NonUnitDeterminant { det: Complex64, deviation: f64 },

    #[error("singular parameters: {0}")]
    SingularParameters(String),

    #[error("degenerate transform: {0}")]
    DegenerateTransform(String),

    #[error("non-normalizable state: {reason} (margin {margin})")]
    NonNormalizable { reason: String, margin: f64 },

    #[error("frequency must be {expected}, got {value}")]
    InvalidFrequency { value: f64, expected: &'static str },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("polynomial contains momentum factors; expected a function of x only")]
    NotPositionOnly,

    #[error("complex spectrum: discriminant {discriminant} < 0 (broken phase)")]
    ComplexSpectrum { discriminant: f64 },

    #[error("no critical frequency: {0}")]
    NoCriticalFrequency(String),

    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("QR iteration did not converge: {found} of {total} eigenvalues deflated after {iterations} iterations")]
    NoConvergence {
        found: usize,
        total: usize,
        iterations: usize,
    },

    #[error("inverse iteration failed near {lambda}: residual {residual:.3e}")]
    InverseIteration { lambda: Complex64, residual: f64 },

    #[error("retained eigenvalues {first} and {second} are not separated (gap {gap:.3e})")]
    DegenerateEigenvalues {
        first: Complex64,
        second: Complex64,
        gap: f64,
    },

    #[error("non-finite values in {0}")]
    NonFinite(String),

    #[error("sample is genuinely complex; node counting needs a real (or locally real) function")]
    ComplexSample,
}

impl Error {
    /// Failures of a numerical routine, as opposed to rejected inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::InverseIteration { .. }
                | Error::NonFinite(_)
                | Error::DegenerateEigenvalues { .. }
        )
    }
}
