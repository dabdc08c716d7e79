//! Canonical symplectic linear algebra on `R^{2n}`.
//!
//! The Poisson matrix `J_{2n} = [[0, I_n], [-I_n, 0]]` is never stored; every
//! product with it is a block swap with a sign flip.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Matrix, Result, Vector};

/// Relative tolerance (scaled by `sqrt(2k)`) used to classify a basis as
/// symplectic or orthonormal.
pub const CLASSIFY_TOL: f64 = 1e-8;

/// Relative tolerance (scaled by `sqrt(2k)`) for operations that require a
/// symplectic basis. Looser than [`CLASSIFY_TOL`] so that non-orthonormal
/// symplectic bases from the SVD-like decomposition are accepted.
pub const SYMPLECTIC_PRECONDITION_TOL: f64 = 1e-6;

fn half(len: usize, what: &str) -> Result<usize> {
    if len % 2 != 0 {
        return Err(Error::dim(format!("{what} has odd dimension {len}")));
    }
    Ok(len / 2)
}

/// The canonical Poisson operator `J_{2n}` for a given half dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoissonOperator {
    n: usize,
}

impl PoissonOperator {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    /// Operator matching a vector or matrix with `dim` rows.
    pub fn for_dim(dim: usize) -> Result<Self> {
        Ok(Self::new(half(dim, "phase space")?))
    }

    pub fn half_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != 2 * self.n {
            return Err(Error::dim(format!("expected length {}, got {len}", 2 * self.n)));
        }
        Ok(())
    }

    /// `J v = (p, -q)` for `v = (q, p)`.
    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        self.check(v.len())?;
        let n = self.n;
        Ok(Vector::from_fn(2 * n, |i, _| if i < n { v[n + i] } else { -v[i - n] }))
    }

    /// `J^T v = (-p, q)`.
    pub fn apply_transpose(&self, v: &Vector) -> Result<Vector> {
        self.check(v.len())?;
        let n = self.n;
        Ok(Vector::from_fn(2 * n, |i, _| if i < n { -v[n + i] } else { v[i - n] }))
    }

    /// `J A` for a matrix with `2n` rows.
    pub fn left_mul(&self, a: &Matrix) -> Result<Matrix> {
        self.check(a.nrows())?;
        let n = self.n;
        Ok(Matrix::from_fn(a.nrows(), a.ncols(), |i, j| {
            if i < n {
                a[(n + i, j)]
            } else {
                -a[(i - n, j)]
            }
        }))
    }

    /// `J^T A` for a matrix with `2n` rows.
    pub fn left_mul_transpose(&self, a: &Matrix) -> Result<Matrix> {
        self.check(a.nrows())?;
        let n = self.n;
        Ok(Matrix::from_fn(a.nrows(), a.ncols(), |i, j| {
            if i < n {
                -a[(n + i, j)]
            } else {
                a[(i - n, j)]
            }
        }))
    }

    /// `A J` for a matrix with `2n` columns.
    pub fn right_mul(&self, a: &Matrix) -> Result<Matrix> {
        self.check(a.ncols())?;
        let n = self.n;
        Ok(Matrix::from_fn(a.nrows(), a.ncols(), |i, j| {
            if j < n {
                -a[(i, n + j)]
            } else {
                a[(i, j - n)]
            }
        }))
    }

    /// Dense `J_{2n}`; only meant for tests and tiny systems.
    pub fn to_dense(&self) -> Matrix {
        let n = self.n;
        let mut j = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, n + i)] = 1.0;
            j[(n + i, i)] = -1.0;
        }
        j
    }
}

/// Symplectic inverse `A^+ = J_{2m}^T A^T J_{2n}` of a `2n x 2m` matrix.
///
/// With `A = [[A11, A12], [A21, A22]]` in `n x m` blocks this is
/// `[[A22^T, -A12^T], [-A21^T, A11^T]]`, so no products are formed.
pub fn symplectic_inverse(a: &Matrix) -> Result<Matrix> {
    let n = half(a.nrows(), "matrix rows")?;
    let m = half(a.ncols(), "matrix columns")?;
    Ok(Matrix::from_fn(2 * m, 2 * n, |i, j| match (i < m, j < n) {
        (true, true) => a[(n + j, m + i)],
        (true, false) => -a[(j - n, m + i)],
        (false, true) => -a[(n + j, i - m)],
        (false, false) => a[(j - n, i - m)],
    }))
}

/// `||J_{2k}^T V^T J_{2n} V - I_{2k}||_F`.
pub fn symplecticity_measure(v: &Matrix) -> Result<f64> {
    let vp = symplectic_inverse(v)?;
    let mut g = vp * v;
    for i in 0..g.nrows() {
        g[(i, i)] -= 1.0;
    }
    Ok(g.norm())
}

/// `||V^T V - I||_F`.
pub fn orthonormality_measure(v: &Matrix) -> Result<f64> {
    half(v.ncols(), "basis columns")?;
    let mut g = v.tr_mul(v);
    for i in 0..g.nrows() {
        g[(i, i)] -= 1.0;
    }
    Ok(g.norm())
}

/// Structural class of a reduced basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    OrthonormalSymplectic,
    SymplecticNonorthonormal,
    OrthonormalNonsymplectic,
}

impl BasisKind {
    pub fn is_symplectic(self) -> bool {
        !matches!(self, BasisKind::OrthonormalNonsymplectic)
    }

    pub fn is_orthonormal(self) -> bool {
        !matches!(self, BasisKind::SymplecticNonorthonormal)
    }

    pub fn code(self) -> u32 {
        match self {
            BasisKind::OrthonormalSymplectic => 0,
            BasisKind::SymplecticNonorthonormal => 1,
            BasisKind::OrthonormalNonsymplectic => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(BasisKind::OrthonormalSymplectic),
            1 => Some(BasisKind::SymplecticNonorthonormal),
            2 => Some(BasisKind::OrthonormalNonsymplectic),
            _ => None,
        }
    }
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::OrthonormalSymplectic => "orthonormal-symplectic",
            BasisKind::SymplecticNonorthonormal => "symplectic-nonorthonormal",
            BasisKind::OrthonormalNonsymplectic => "orthonormal-nonsymplectic",
        })
    }
}

/// A reduced-order basis `V in R^{2n x 2k}` tagged with its structural kind.
///
/// The kind is what the generating method promises; [`ReducedBasis::validate`]
/// checks it against the measures.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedBasis {
    columns: Matrix,
    kind: BasisKind,
}

impl ReducedBasis {
    pub fn new(columns: Matrix, kind: BasisKind) -> Result<Self> {
        half(columns.nrows(), "basis rows")?;
        half(columns.ncols(), "basis columns")?;
        Ok(Self { columns, kind })
    }

    /// Builds `[E, J^T E]` from an `E` block.
    pub fn from_e_block(e: &Matrix) -> Result<Self> {
        let j = PoissonOperator::for_dim(e.nrows())?;
        let jte = j.left_mul_transpose(e)?;
        let mut v = Matrix::zeros(e.nrows(), 2 * e.ncols());
        v.columns_mut(0, e.ncols()).copy_from(e);
        v.columns_mut(e.ncols(), e.ncols()).copy_from(&jte);
        Ok(Self {
            columns: v,
            kind: BasisKind::OrthonormalSymplectic,
        })
    }

    /// Picks the kind from the measures using [`CLASSIFY_TOL`].
    pub fn classify(columns: Matrix) -> Result<Self> {
        let scale = (columns.ncols() as f64).sqrt().max(1.0);
        let s = symplecticity_measure(&columns)?;
        let o = orthonormality_measure(&columns)?;
        let symplectic = s < CLASSIFY_TOL * scale;
        let orthonormal = o < CLASSIFY_TOL * scale;
        let kind = match (symplectic, orthonormal) {
            (true, true) => BasisKind::OrthonormalSymplectic,
            (true, false) => BasisKind::SymplecticNonorthonormal,
            (false, true) => BasisKind::OrthonormalNonsymplectic,
            (false, false) => {
                return Err(Error::NotSymplectic {
                    measure: s,
                    tolerance: CLASSIFY_TOL * scale,
                })
            }
        };
        Ok(Self { columns, kind })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.columns
    }

    pub fn into_matrix(self) -> Matrix {
        self.columns
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn full_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn size(&self) -> usize {
        self.columns.ncols()
    }

    pub fn half_rank(&self) -> usize {
        self.columns.ncols() / 2
    }

    pub fn symplecticity(&self) -> f64 {
        symplecticity_measure(&self.columns).expect("even dimensions checked at construction")
    }

    pub fn orthonormality(&self) -> f64 {
        orthonormality_measure(&self.columns).expect("even dimensions checked at construction")
    }

    /// Errors unless `s_V` is below [`SYMPLECTIC_PRECONDITION_TOL`]` * sqrt(2k)`.
    pub fn require_symplectic(&self) -> Result<()> {
        let tolerance = SYMPLECTIC_PRECONDITION_TOL * (self.size() as f64).sqrt().max(1.0);
        let measure = self.symplecticity();
        if measure < tolerance {
            Ok(())
        } else {
            Err(Error::NotSymplectic { measure, tolerance })
        }
    }

    pub fn require_orthonormal(&self) -> Result<()> {
        let tolerance = SYMPLECTIC_PRECONDITION_TOL * (self.size() as f64).sqrt().max(1.0);
        let measure = self.orthonormality();
        if measure < tolerance {
            Ok(())
        } else {
            Err(Error::NotOrthonormal { measure, tolerance })
        }
    }

    /// Checks the promised kind against the classification tolerance.
    pub fn validate(&self) -> Result<()> {
        let scale = (self.size() as f64).sqrt().max(1.0);
        if self.kind.is_symplectic() {
            let measure = self.symplecticity();
            if measure >= CLASSIFY_TOL * scale {
                return Err(Error::NotSymplectic {
                    measure,
                    tolerance: CLASSIFY_TOL * scale,
                });
            }
        }
        if self.kind.is_orthonormal() {
            let measure = self.orthonormality();
            if measure >= CLASSIFY_TOL * scale {
                return Err(Error::NotOrthonormal {
                    measure,
                    tolerance: CLASSIFY_TOL * scale,
                });
            }
        }
        Ok(())
    }

    /// Symplectic inverse `V^+`.
    pub fn symplectic_inverse(&self) -> Matrix {
        symplectic_inverse(&self.columns).expect("even dimensions checked at construction")
    }

    /// First `2k'` columns in the `[E_k', F_k']` layout, keeping pairs intact.
    pub fn truncate(&self, size: usize) -> Result<Self> {
        if size % 2 != 0 || size > self.size() {
            return Err(Error::Size(format!(
                "cannot truncate a basis of size {} to {size}",
                self.size()
            )));
        }
        let k = self.half_rank();
        let kk = size / 2;
        let mut v = Matrix::zeros(self.full_dim(), size);
        v.columns_mut(0, kk).copy_from(&self.columns.columns(0, kk));
        v.columns_mut(kk, kk).copy_from(&self.columns.columns(k, kk));
        Ok(Self {
            columns: v,
            kind: self.kind,
        })
    }
}

/// Symplectic projection `P X = V V^+ X`.
pub fn symplectic_projection(v: &ReducedBasis, x: &Matrix) -> Result<Matrix> {
    if x.nrows() != v.full_dim() {
        return Err(Error::dim(format!(
            "snapshot rows {} do not match basis rows {}",
            x.nrows(),
            v.full_dim()
        )));
    }
    v.require_symplectic()?;
    let coeffs = v.symplectic_inverse() * x;
    Ok(v.matrix() * coeffs)
}
