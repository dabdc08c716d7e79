use nalgebra::SVD;

use crate::{Error, Matrix, Result, Vector};

/// Rank-`r` truncation `B ~ U diag(sigma) Vt` with descending singular values.
#[derive(Debug, Clone)]
pub struct TruncatedSvd {
    pub u: Matrix,
    pub sigma: Vector,
    pub vt: Matrix,
}

impl TruncatedSvd {
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * &self.vt
    }
}

pub fn truncated_svd(b: &Matrix, r: usize) -> Result<TruncatedSvd> {
    let full = b.nrows().min(b.ncols());
    if r > full {
        return Err(Error::dim(format!(
            "rank {r} exceeds min({}, {})",
            b.nrows(),
            b.ncols()
        )));
    }
    if full == 0 {
        return Ok(TruncatedSvd {
            u: Matrix::zeros(b.nrows(), 0),
            sigma: Vector::zeros(0),
            vt: Matrix::zeros(0, b.ncols()),
        });
    }
    let svd = SVD::new(b.clone(), true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    Ok(TruncatedSvd {
        u: u.columns(0, r).into_owned(),
        sigma: svd.singular_values.rows(0, r).into_owned(),
        vt: vt.rows(0, r).into_owned(),
    })
}

/// All `min(a, b)` singular values, descending.
pub fn singular_values(b: &Matrix) -> Vector {
    if b.nrows().min(b.ncols()) == 0 {
        return Vector::zeros(0);
    }
    SVD::new(b.clone(), false, false).singular_values
}

/// Square `U` and `nrows` singular values (zero-padded when `b` is tall).
pub(crate) fn left_singular(b: &Matrix) -> (Matrix, Vector) {
    let m = b.nrows();
    if m == 0 {
        return (Matrix::zeros(0, 0), Vector::zeros(0));
    }
    let padded = if b.ncols() < m {
        let mut p = Matrix::zeros(m, m);
        p.columns_mut(0, b.ncols()).copy_from(b);
        p
    } else {
        b.clone()
    };
    let svd = SVD::new(padded, true, false);
    (svd.u.expect("requested U"), svd.singular_values)
}
