use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A symplectic basis was required but the symplecticity measure is too large.
    #[error("basis is not symplectic: s_V = {measure:.3e} exceeds {tolerance:.3e}")]
    NotSymplectic { measure: f64, tolerance: f64 },

    #[error("basis is not orthonormal: o_V = {measure:.3e} exceeds {tolerance:.3e}")]
    NotOrthonormal { measure: f64, tolerance: f64 },

    #[error("SVD-like decomposition failed: {reason} (residual {residual:.3e})")]
    DecompositionFailure { reason: String, residual: f64 },

    /// The POD of the rotated snapshots has no singular value gap at the requested size.
    #[error(
        "no singular value gap at basis size {size}: sigma_{size} = {lower:.6e}, sigma_{next} = {upper:.6e}",
        next = size + 1
    )]
    NoSpectralGap { size: usize, lower: f64, upper: f64 },

    #[error("symplectic Gram-Schmidt produced no new direction ({skipped} candidates skipped)")]
    EmptyExtension { skipped: usize },

    #[error("basis size error: {0}")]
    Size(String),

    #[error("parameter ({lambda:.4e}, {mu:.4e}) outside the parameter domain")]
    Parameter { lambda: f64, mu: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("implicit midpoint matrix is singular for dt = {dt:.3e} (pivot ratio {pivot_ratio:.3e})")]
    Integration { dt: f64, pivot_ratio: f64 },

    #[error("projection mode mismatch: {0}")]
    Mode(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
