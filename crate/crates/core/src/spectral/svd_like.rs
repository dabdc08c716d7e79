//! SVD-like decomposition `B = S D Q` with `S` symplectic and `Q` orthogonal.
//!
//! `B` is first compressed to its numerical row space. Pairs are then
//! extracted in stages: on the current remainder `B (I - P)`, with `P` the
//! projector onto the rows found so far, form `K = (B W)^T J (B W)` and
//! diagonalize the Hermitian `iK`. Each eigenvalue `lambda` within
//! [`STAGE_TOL`] of the stage maximum, with eigenvector `x + iy`, yields the
//! column pair `(B W x, -B W y) / sigma`, `sigma^2 = lambda`, and the rows
//! `W x`, `W y` of `Q`. Smaller eigenvalues are resolved in later stages
//! relative to the smaller remainder, so graded spectra keep their relative
//! accuracy. A remainder whose `K` vanishes relative to its own scale is the
//! isotropic block.

use std::sync::OnceLock;

use nalgebra::{Complex, SymmetricEigen, SVD};

use super::orthonormal_complement;
use crate::symplectic::{symplecticity_measure, PoissonOperator};
use crate::{Error, Matrix, Result, Vector};

/// Singular values of `B` below this fraction of the largest one are treated
/// as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Admissible `||B - S D Q||_F / max(1, ||B||_F)`.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;

/// Eigenvalues of `iK` accepted in one stage, relative to the stage maximum.
pub const STAGE_TOL: f64 = 1e-8;

/// A remainder is isotropic when its largest eigenvalue of `iK` is below this
/// fraction of its squared largest singular value.
pub const ISOTROPY_TOL: f64 = 1e-12;

const EIGEN_MAX_ITER: usize = 10_000;

/// Factors of an SVD-like decomposition. `D` is kept implicitly through
/// `sigma_s`, `p` and `q`, and `Q` through its first `2p + q` rows.
#[derive(Debug, Clone)]
pub struct SvdLikeFactors {
    s: Matrix,
    /// Rows of `Q` with nonzero `D` columns, as columns (`m x (2p + q)`).
    q_rows: Matrix,
    q_full: OnceLock<Matrix>,
    sigma_s: Vec<f64>,
    p: usize,
    q: usize,
    n: usize,
    m: usize,
    residual: f64,
}

impl SvdLikeFactors {
    /// The symplectic factor `S` (`2n x 2n`).
    pub fn s(&self) -> &Matrix {
        &self.s
    }

    /// The orthogonal factor `Q` (`m x m`), completed on first use.
    pub fn q_matrix(&self) -> &Matrix {
        self.q_full.get_or_init(|| {
            let r = self.q_rows.ncols();
            let mut qt = Matrix::zeros(self.m, self.m);
            qt.columns_mut(0, r).copy_from(&self.q_rows);
            qt.columns_mut(r, self.m - r)
                .copy_from(&orthonormal_complement(&self.q_rows, self.m - r));
            qt.transpose()
        })
    }

    /// Symplectic singular values, descending.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma_s
    }

    /// Number of symplectic singular values.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of unit-block columns.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn half_dim(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.m
    }

    pub fn rank(&self) -> usize {
        2 * self.p + self.q
    }

    /// Relative reconstruction residual measured at construction.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Dense `D` in the block layout (column blocks `p, q, p, m - 2p - q`).
    pub fn d_matrix(&self) -> Matrix {
        let mut d = Matrix::zeros(2 * self.n, self.m);
        for (i, s) in self.sigma_s.iter().enumerate() {
            d[(i, i)] = *s;
            d[(self.n + i, self.p + self.q + i)] = *s;
        }
        for j in 0..self.q {
            d[(self.p + j, self.p + j)] = 1.0;
        }
        d
    }

    /// The nonzero columns of `S D`.
    fn sd_thin(&self) -> Matrix {
        let mut sd = Matrix::zeros(2 * self.n, self.rank());
        for (i, s) in self.sigma_s.iter().enumerate() {
            sd.set_column(i, &(self.s.column(i) * *s));
            sd.set_column(self.p + self.q + i, &(self.s.column(self.n + i) * *s));
        }
        for j in 0..self.q {
            sd.set_column(self.p + j, &self.s.column(self.p + j));
        }
        sd
    }

    /// `S D` without forming `D`.
    pub fn sd(&self) -> Matrix {
        let mut sd = Matrix::zeros(2 * self.n, self.m);
        sd.columns_mut(0, self.rank()).copy_from(&self.sd_thin());
        sd
    }

    pub fn reconstruct(&self) -> Matrix {
        self.sd_thin() * self.q_rows.transpose()
    }

    /// Evaluates every structural invariant against `b`.
    pub fn check(&self, b: &Matrix) -> FactorCheck {
        let residual = (self.reconstruct() - b).norm() / b.norm().max(1.0);
        let symplecticity = symplecticity_measure(&self.s).unwrap_or(f64::INFINITY);
        let q = self.q_matrix();
        let mut qtq = q.tr_mul(q);
        for i in 0..self.m {
            qtq[(i, i)] -= 1.0;
        }
        FactorCheck {
            residual,
            symplecticity,
            orthogonality: qtq.norm(),
            rank: numerical_rank(b),
            decomposition_rank: self.rank(),
        }
    }
}

/// Measured invariants of an SVD-like decomposition.
#[derive(Debug, Clone, Copy)]
pub struct FactorCheck {
    /// `||B - S D Q||_F / max(1, ||B||_F)`.
    pub residual: f64,
    /// `s`-measure of `S`.
    pub symplecticity: f64,
    /// `||Q^T Q - I||_F`.
    pub orthogonality: f64,
    /// Numerical rank of `B` from its singular values.
    pub rank: usize,
    /// `2p + q`.
    pub decomposition_rank: usize,
}

/// Weighted symplectic singular values `w_i`, one per index `1..=p+q`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSpectrum {
    pub weights: Vec<f64>,
    /// `(||s_i||, ||s_{n+i}||)` for every index.
    pub column_norm_pairs: Vec<(f64, f64)>,
}

impl WeightedSpectrum {
    pub fn total_energy(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }
}

pub(crate) fn numerical_rank(b: &Matrix) -> usize {
    let sv = super::singular_values(b);
    let top = sv.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_TOL * top).count()
}

struct Pair {
    sigma: f64,
    e: Vector,
    f: Vector,
    /// Rows of `Q` in compressed coordinates.
    row_u: Vector,
    row_w: Vector,
}

/// Staged pairing shared by the decomposition and the singular-value path.
struct Pairing {
    /// Orthonormal basis of the numerical row space of `B` (`m x r`).
    w0: Matrix,
    /// Sorted by `sigma`, descending.
    pairs: Vec<Pair>,
    /// Isotropic columns `B W` and their rows `W` (compressed coordinates).
    iso_g: Matrix,
    iso_rows: Matrix,
}

/// `B W0` and `W0` for an orthonormal basis `W0` of the numerical row space,
/// plus the largest singular value.
fn compress(b: &Matrix) -> (Matrix, Matrix, f64) {
    let (rows, m) = b.shape();
    let (u, sigma, v) = if m > rows {
        // B = R^T Q^T from the QR of B^T keeps the SVD square.
        let qr = b.transpose().qr();
        let q1 = qr.q();
        let svd = SVD::new(qr.r().transpose(), true, true);
        let v = q1 * svd.v_t.expect("requested V^T").transpose();
        (svd.u.expect("requested U"), svd.singular_values, v)
    } else {
        let svd = SVD::new(b.clone(), true, true);
        let v = svd.v_t.expect("requested V^T").transpose();
        (svd.u.expect("requested U"), svd.singular_values, v)
    };
    let top = sigma.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = if top > 0.0 {
        (0..sigma.len()).filter(|&i| sigma[i] > RANK_TOL * top).collect()
    } else {
        Vec::new()
    };
    let mut bw = Matrix::zeros(rows, keep.len());
    let mut w0 = Matrix::zeros(m, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        bw.set_column(c, &(u.column(i) * sigma[i]));
        w0.set_column(c, &v.column(i));
    }
    (bw, w0, top)
}

fn hermitian_eigen(k: &Matrix) -> Result<SymmetricEigen<Complex<f64>, nalgebra::Dyn>> {
    let ik = k.map(|x| Complex::new(0.0, x));
    SymmetricEigen::try_new(ik, f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(|| Error::DecompositionFailure {
        reason: "Hermitian eigensolver did not converge".into(),
        residual: f64::INFINITY,
    })
}

fn pair_range(b: &Matrix) -> Result<Pairing> {
    let poisson = PoissonOperator::for_dim(b.nrows())?;
    if b.ncols() == 0 {
        return Err(Error::dim("SVD-like decomposition needs at least one column"));
    }
    let (bw0, w0, top) = compress(b);
    let r0 = bw0.ncols();
    let floor = RANK_TOL * top;
    let mut pairs: Vec<Pair> = Vec::new();
    // Accepted rows, orthonormal, in compressed coordinates.
    let mut accepted = Matrix::zeros(r0, 0);
    let mut iso_g = Matrix::zeros(b.nrows(), 0);
    let mut iso_rows = Matrix::zeros(r0, 0);

    while accepted.ncols() < r0 {
        let remainder = &bw0 - (&bw0 * &accepted) * accepted.transpose();
        let svd = SVD::new(remainder, false, true);
        let vt = svd.v_t.expect("requested V^T");
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > floor)
            .collect();
        if keep.is_empty() {
            break;
        }
        let mut wc = Matrix::zeros(r0, keep.len());
        for (c, &i) in keep.iter().enumerate() {
            wc.set_column(c, &vt.row(i).transpose());
        }
        // Clean the rows against the accepted ones before forming B W.
        for _ in 0..2 {
            wc -= &accepted * accepted.tr_mul(&wc);
            reorthonormalize(&mut wc);
        }
        let bw = &bw0 * &wc;
        let k_raw = bw.tr_mul(&poisson.left_mul(&bw)?);
        let k = (&k_raw - k_raw.transpose()) * 0.5;
        let eig = hermitian_eigen(&k)?;
        let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        if lambda_max <= ISOTROPY_TOL * smax * smax {
            iso_g = bw;
            iso_rows = wc;
            break;
        }
        let mut order: Vec<usize> = (0..keep.len())
            .filter(|&i| eig.eigenvalues[i] > STAGE_TOL * lambda_max)
            .collect();
        // Stable: equal eigenvalues keep the solver's order.
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let a = order.len();
        let mut frame = Matrix::zeros(keep.len(), 2 * a);
        for (c, &i) in order.iter().enumerate() {
            let z = eig.eigenvectors.column(i);
            let re = Vector::from_iterator(keep.len(), z.iter().map(|c| c.re));
            let im = Vector::from_iterator(keep.len(), z.iter().map(|c| c.im));
            let (nre, nim) = (re.norm(), im.norm());
            if nre == 0.0 || nim == 0.0 {
                return Err(Error::DecompositionFailure {
                    reason: "degenerate eigenvector for a nonzero eigenvalue".into(),
                    residual: f64::INFINITY,
                });
            }
            frame.set_column(c, &(re / nre));
            frame.set_column(a + c, &(-im / nim));
        }
        reorthonormalize(&mut frame);
        let rows = &wc * &frame;
        for (c, &i) in order.iter().enumerate() {
            let sigma = eig.eigenvalues[i].sqrt();
            pairs.push(Pair {
                sigma,
                e: &bw * frame.column(c) / sigma,
                f: &bw * frame.column(a + c) / sigma,
                row_u: rows.column(c).into_owned(),
                row_w: rows.column(a + c).into_owned(),
            });
        }
        let mut grown = Matrix::zeros(r0, accepted.ncols() + 2 * a);
        grown.columns_mut(0, accepted.ncols()).copy_from(&accepted);
        grown.columns_mut(accepted.ncols(), 2 * a).copy_from(&rows);
        accepted = grown;
    }
    pairs.sort_by(|x, y| y.sigma.total_cmp(&x.sigma));
    Ok(Pairing {
        w0,
        pairs,
        iso_g,
        iso_rows,
    })
}

/// Symplectic singular values of `B`, descending.
pub fn symplectic_singular_values(b: &Matrix) -> Result<Vec<f64>> {
    Ok(pair_range(b)?.pairs.iter().map(|p| p.sigma).collect())
}

/// Computes `B = S D Q`.
pub fn svd_like_decompose(b: &Matrix) -> Result<SvdLikeFactors> {
    let poisson = PoissonOperator::for_dim(b.nrows())?;
    let n = poisson.half_dim();
    let m = b.ncols();
    let Pairing {
        w0,
        pairs,
        iso_g,
        iso_rows,
    } = pair_range(b)?;
    let p = pairs.len();
    let q = iso_g.ncols();
    if p + q > n {
        return Err(Error::DecompositionFailure {
            reason: format!(
                "isotropic block of size {q} does not fit beside {p} pairs in R^{}",
                2 * n
            ),
            residual: f64::INFINITY,
        });
    }

    let sigma_s: Vec<f64> = pairs.iter().map(|x| x.sigma).collect();
    let mut e_cols: Vec<Vector> = pairs.iter().map(|x| x.e.clone()).collect();
    let mut f_cols: Vec<Vector> = pairs.iter().map(|x| x.f.clone()).collect();
    let duals = isotropic_duals(&poisson, &iso_g, &e_cols, &f_cols)?;
    for j in 0..q {
        e_cols.push(iso_g.column(j).into_owned());
        f_cols.push(duals.column(j).into_owned());
    }
    complete_pairs(&poisson, &mut e_cols, &mut f_cols);

    let mut s = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        s.set_column(i, &e_cols[i]);
        s.set_column(n + i, &f_cols[i]);
    }

    // Rows of Q: [W u (p), W iso (q), W w (p)].
    let mut rows = Matrix::zeros(w0.ncols(), 2 * p + q);
    for (i, x) in pairs.iter().enumerate() {
        rows.set_column(i, &x.row_u);
        rows.set_column(p + q + i, &x.row_w);
    }
    rows.columns_mut(p, q).copy_from(&iso_rows);
    let mut q_rows = &w0 * rows;
    reorthonormalize(&mut q_rows);

    let mut factors = SvdLikeFactors {
        s,
        q_rows,
        q_full: OnceLock::new(),
        sigma_s,
        p,
        q,
        n,
        m,
        residual: 0.0,
    };
    let residual = (factors.reconstruct() - b).norm() / b.norm().max(1.0);
    factors.residual = residual;
    if !(residual <= RECONSTRUCTION_TOL) {
        return Err(Error::DecompositionFailure {
            reason: "reconstruction tolerance not reached".into(),
            residual,
        });
    }
    Ok(factors)
}

/// One modified Gram-Schmidt sweep over nearly orthonormal columns.
fn reorthonormalize(frame: &mut Matrix) {
    for j in 0..frame.ncols() {
        let mut v = frame.column(j).into_owned();
        for i in 0..j {
            let c = frame.column(i).dot(&v);
            v.axpy(-c, &frame.column(i), 1.0);
        }
        let nv = v.norm();
        frame.set_column(j, &(v / nv));
    }
}

fn omega(poisson: &PoissonOperator, x: &Vector, y: &Vector) -> f64 {
    x.dot(&poisson.apply(y).expect("dimension checked"))
}

/// Symplectic projection onto the span of the pairs `(e_a, f_a)`:
/// `P x = sum_a omega(x, f_a) e_a - omega(x, e_a) f_a`.
fn project_pairs(poisson: &PoissonOperator, x: &Vector, es: &[Vector], fs: &[Vector]) -> Vector {
    let mut out = Vector::zeros(x.len());
    for (e, f) in es.iter().zip(fs) {
        out.axpy(omega(poisson, x, f), e, 1.0);
        out.axpy(-omega(poisson, x, e), f, 1.0);
    }
    out
}

/// Columns `F` with `G^T J F = I`, `F^T J F = 0`, symplectically orthogonal
/// to the existing pairs.
fn isotropic_duals(poisson: &PoissonOperator, g: &Matrix, es: &[Vector], fs: &[Vector]) -> Result<Matrix> {
    let q = g.ncols();
    if q == 0 {
        return Ok(Matrix::zeros(g.nrows(), 0));
    }
    // G = Q_G R_G, F0 = J^T Q_G R_G^{-T} gives G^T J F0 = I.
    let qr = g.clone().qr();
    let qg = qr.q();
    let rg = qr.r();
    let rhs = poisson.left_mul_transpose(&qg)?.transpose();
    let f0t = rg
        .solve_upper_triangular(&rhs)
        .ok_or_else(|| Error::DecompositionFailure {
            reason: "isotropic block is rank deficient".into(),
            residual: f64::INFINITY,
        })?;
    let mut f = f0t.transpose();
    for j in 0..q {
        let col = f.column(j).into_owned();
        let proj = project_pairs(poisson, &col, es, fs);
        f.set_column(j, &(col - proj));
    }
    let c = f.tr_mul(&poisson.left_mul(&f)?);
    Ok(&f + g * c * 0.5)
}

/// Completes the pair lists to `n` symplectic pairs using pivoted canonical
/// vectors.
fn complete_pairs(poisson: &PoissonOperator, es: &mut Vec<Vector>, fs: &mut Vec<Vector>) {
    let n = poisson.half_dim();
    let dim = 2 * n;
    if es.len() >= n {
        return;
    }
    // Residual of every canonical vector after removing the current pairs.
    let mut residual = Matrix::identity(dim, dim);
    for (e, f) in es.iter().zip(fs.iter()) {
        remove_pair(poisson, &mut residual, e, f);
    }
    while es.len() < n {
        let (pivot, _) = residual
            .column_iter()
            .enumerate()
            .map(|(j, c)| (j, c.norm_squared()))
            .fold(
                (0, f64::NEG_INFINITY),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        let mut e = residual.column(pivot).into_owned();
        e -= project_pairs(poisson, &e, es, fs);
        e /= e.norm();
        let mut f = poisson.apply_transpose(&e).expect("dimension checked");
        for _ in 0..2 {
            f -= project_pairs(poisson, &f, es, fs);
        }
        let scale = omega(poisson, &e, &f);
        f /= scale;
        remove_pair(poisson, &mut residual, &e, &f);
        es.push(e);
        fs.push(f);
    }
}

fn remove_pair(poisson: &PoissonOperator, residual: &mut Matrix, e: &Vector, f: &Vector) {
    // x <- x - e omega(x, f) + f omega(x, e), column-wise.
    let jf = poisson.apply(f).expect("dimension checked");
    let je = poisson.apply(e).expect("dimension checked");
    let wf = residual.tr_mul(&jf);
    let we = residual.tr_mul(&je);
    residual.ger(-1.0, e, &wf, 1.0);
    residual.ger(1.0, f, &we, 1.0);
}

/// Weighted symplectic singular values from a decomposition.
pub fn weighted_spectrum(f: &SvdLikeFactors) -> WeightedSpectrum {
    let n = f.n;
    let mut weights = Vec::with_capacity(f.p + f.q);
    let mut column_norm_pairs = Vec::with_capacity(f.p + f.q);
    for i in 0..f.p + f.q {
        let a = f.s.column(i).norm();
        let b = f.s.column(n + i).norm();
        column_norm_pairs.push((a, b));
        weights.push(if i < f.p {
            f.sigma_s[i] * (a * a + b * b).sqrt()
        } else {
            a
        });
    }
    WeightedSpectrum {
        weights,
        column_norm_pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut state = seed;
        Matrix::from_fn(rows, cols, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    /// Imaginary parts of the eigenvalues of the dense `B^T J B`, via the
    /// general real Schur route.
    fn dense_oracle_sigma(b: &Matrix) -> Vec<f64> {
        let j = PoissonOperator::for_dim(b.nrows()).unwrap().to_dense();
        let m = b.transpose() * j * b;
        let top = m.norm();
        let mut v: Vec<f64> = m
            .complex_eigenvalues()
            .iter()
            .filter(|c| c.im > RANK_TOL * top)
            .map(|c| c.im.sqrt())
            .collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    fn assert_valid(b: &Matrix, f: &SvdLikeFactors) {
        let c = f.check(b);
        let n2 = b.nrows() as f64;
        assert!(c.residual < RECONSTRUCTION_TOL, "residual {}", c.residual);
        assert!(c.symplecticity < 1e-6 * n2.sqrt(), "s(S) {}", c.symplecticity);
        assert!(
            c.orthogonality < 1e-10 * (b.ncols() as f64).sqrt(),
            "Q {}",
            c.orthogonality
        );
        assert_eq!(c.rank, c.decomposition_rank);
    }

    #[test]
    fn diag_two_three() {
        let b = dmatrix![2.0, 0.0; 0.0, 3.0];
        let f = svd_like_decompose(&b).unwrap();
        assert_eq!((f.p(), f.q()), (1, 0));
        assert!((f.sigma()[0] - 6f64.sqrt()).abs() < 1e-12);
        assert_valid(&b, &f);
        let w = weighted_spectrum(&f);
        assert!((w.weights[0] - 13f64.sqrt()).abs() < 1e-12);
        assert_eq!(symplectic_singular_values(&b).unwrap().len(), 1);
    }

    #[test]
    fn zero_matrix() {
        let b = Matrix::zeros(4, 3);
        let f = svd_like_decompose(&b).unwrap();
        assert_eq!((f.p(), f.q()), (0, 0));
        assert!((f.s() - Matrix::identity(4, 4)).norm() < 1e-15);
        assert_eq!(f.d_matrix(), Matrix::zeros(4, 3));
        assert!(weighted_spectrum(&f).weights.is_empty());
        assert_valid(&b, &f);
    }

    #[test]
    fn single_canonical_column_is_isotropic() {
        let mut b = Matrix::zeros(4, 1);
        b[(0, 0)] = 1.0;
        let f = svd_like_decompose(&b).unwrap();
        assert_eq!((f.p(), f.q()), (0, 1));
        assert_valid(&b, &f);
        let w = weighted_spectrum(&f);
        assert!((w.weights[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn d_has_block_pattern() {
        let b = lcg_matrix(8, 5, 3);
        let f = svd_like_decompose(&b).unwrap();
        let d = f.d_matrix();
        let (n, p, q) = (4, f.p(), f.q());
        for i in 0..8 {
            for j in 0..5 {
                let expected = if i < p && j == i {
                    f.sigma()[i]
                } else if i >= p && i < p + q && j == i {
                    1.0
                } else if i >= n && i < n + p && j == p + q + (i - n) {
                    f.sigma()[i - n]
                } else {
                    0.0
                };
                assert_eq!(d[(i, j)], expected);
            }
        }
        assert!(((f.s() * d * f.q_matrix()) - &b).norm() < 1e-10);
    }

    #[test]
    fn random_matrices_of_several_shapes() {
        for (seed, (rows, cols)) in [(4, 1), (4, 5), (8, 5), (8, 13), (20, 5), (20, 13)]
            .into_iter()
            .enumerate()
        {
            let b = lcg_matrix(rows, cols, seed as u64 + 100);
            let f = svd_like_decompose(&b).unwrap();
            assert_valid(&b, &f);
            let w = weighted_spectrum(&f);
            let ratio = w.total_energy() / b.norm_squared();
            assert!((ratio - 1.0).abs() < 1e-8, "ratio {ratio}");
            let oracle = dense_oracle_sigma(&b);
            assert_eq!(oracle.len(), f.p());
            for (a, o) in f.sigma().iter().zip(&oracle) {
                assert!((a - o).abs() <= 1e-6 * o, "{a} vs {o}");
            }
        }
    }

    #[test]
    fn rank_deficient_matrix() {
        // Rank 3 in R^10 with 7 columns.
        let b = lcg_matrix(10, 3, 5) * lcg_matrix(3, 7, 6);
        let f = svd_like_decompose(&b).unwrap();
        assert_eq!(f.rank(), 3);
        assert_valid(&b, &f);
    }

    #[test]
    fn orthosymplectic_columns_have_unit_sigma() {
        let e = Matrix::from_fn(6, 1, |i, _| {
            if i == 0 {
                0.6
            } else if i == 1 {
                0.8
            } else {
                0.0
            }
        });
        let v = crate::symplectic::ReducedBasis::from_e_block(&e).unwrap();
        let sig = symplectic_singular_values(v.matrix()).unwrap();
        assert_eq!(sig.len(), 1);
        assert!((sig[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_scales_sigma() {
        let b = lcg_matrix(8, 6, 44);
        let s1 = symplectic_singular_values(&b).unwrap();
        let s2 = symplectic_singular_values(&(&b * -3.0)).unwrap();
        for (a, c) in s1.iter().zip(&s2) {
            assert!((c - 3.0 * a).abs() < 1e-10 * c);
        }
    }

    #[test]
    fn odd_rows_rejected() {
        assert!(matches!(
            svd_like_decompose(&Matrix::zeros(3, 2)),
            Err(Error::Dimension(_))
        ));
    }
}
