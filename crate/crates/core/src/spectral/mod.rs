//! Factorizations used by the basis generators.

mod gram_schmidt;
mod svd;
mod svd_like;

pub use gram_schmidt::{symplectic_gram_schmidt, GramSchmidtOutcome, GS_DROP_TOL};
pub(crate) use svd::left_singular;
pub use svd::{singular_values, truncated_svd, TruncatedSvd};
pub use svd_like::{
    svd_like_decompose, symplectic_singular_values, weighted_spectrum, FactorCheck, SvdLikeFactors, WeightedSpectrum,
    ISOTROPY_TOL, RANK_TOL, RECONSTRUCTION_TOL, STAGE_TOL,
};

use crate::Matrix;

/// `count` orthonormal columns orthogonal to the orthonormal columns of
/// `basis` (`m x r`), taken from the full Householder `Q` of `basis`.
pub(crate) fn orthonormal_complement(basis: &Matrix, count: usize) -> Matrix {
    let m = basis.nrows();
    let r = basis.ncols();
    assert!(
        r + count <= m,
        "complement of {r} columns in R^{m} cannot have {count} columns"
    );
    if r == 0 {
        return Matrix::identity(m, count);
    }
    let mut qt = Matrix::identity(m, m);
    basis.clone().qr().q_tr_mul(&mut qt);
    qt.rows(r, count).transpose()
}
