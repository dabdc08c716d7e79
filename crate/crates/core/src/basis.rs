//! Snapshot-based reduced bases and their projection errors.
//!
//! Every generator is split into a preparation step (the factorization of the
//! snapshot matrix) and a cheap selection of `2k` columns, so a size sweep
//! factors the snapshots once. Selections are nested: the basis of size `2k`
//! is the truncation of any larger one from the same preparation.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::spectral::{
    left_singular, svd_like_decompose, symplectic_gram_schmidt, weighted_spectrum, SvdLikeFactors, WeightedSpectrum,
    GS_DROP_TOL,
};
use crate::symplectic::{BasisKind, PoissonOperator, ReducedBasis};
use crate::{Error, Matrix, Result, Vector};

/// Relative separation `(sigma_c - sigma_{c+1}) / sigma_c` below which the
/// leading singular subspace is considered not unique.
pub const GAP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisMethod {
    PodFull,
    PodSeparate,
    PsdCotangentLift,
    PsdComplexSvd,
    PodOfYs,
    PsdGreedy,
    PsdSvdLike,
}

impl BasisMethod {
    pub const ALL: [BasisMethod; 7] = [
        BasisMethod::PodFull,
        BasisMethod::PodSeparate,
        BasisMethod::PsdCotangentLift,
        BasisMethod::PsdComplexSvd,
        BasisMethod::PodOfYs,
        BasisMethod::PsdGreedy,
        BasisMethod::PsdSvdLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisMethod::PodFull => "pod_full",
            BasisMethod::PodSeparate => "pod_separate",
            BasisMethod::PsdCotangentLift => "psd_cotangent_lift",
            BasisMethod::PsdComplexSvd => "psd_complex_svd",
            BasisMethod::PodOfYs => "pod_of_ys",
            BasisMethod::PsdGreedy => "psd_greedy",
            BasisMethod::PsdSvdLike => "psd_svd_like",
        }
    }

    /// Kind of basis the method produces.
    pub fn kind(self) -> BasisKind {
        match self {
            BasisMethod::PodFull | BasisMethod::PodSeparate => BasisKind::OrthonormalNonsymplectic,
            BasisMethod::PsdSvdLike => BasisKind::SymplecticNonorthonormal,
            _ => BasisKind::OrthonormalSymplectic,
        }
    }
}

impl fmt::Display for BasisMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BasisMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BasisMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown basis method `{s}`")))
    }
}

/// `||(I - V V^T) X||_F^2`.
pub fn pod_loss(v: &ReducedBasis, x: &Matrix) -> Result<f64> {
    check_rows(v, x)?;
    let vm = v.matrix();
    Ok((x - vm * (vm.transpose() * x)).norm_squared())
}

/// `||(I - V V^+) X||_F^2`.
pub fn psd_loss(v: &ReducedBasis, x: &Matrix) -> Result<f64> {
    check_rows(v, x)?;
    v.require_symplectic()?;
    let vm = v.matrix();
    Ok((x - vm * (v.symplectic_inverse() * x)).norm_squared())
}

fn check_rows(v: &ReducedBasis, x: &Matrix) -> Result<()> {
    if v.full_dim() != x.nrows() {
        return Err(Error::dim(format!(
            "basis has {} rows, snapshots {}",
            v.full_dim(),
            x.nrows()
        )));
    }
    Ok(())
}

fn check_size(x: &Matrix, size: usize) -> Result<usize> {
    let poisson = PoissonOperator::for_dim(x.nrows())?;
    if size == 0 || size % 2 != 0 || size > poisson.dim() {
        return Err(Error::Size(format!(
            "basis size {size} must be even and in [2, {}]",
            poisson.dim()
        )));
    }
    if x.ncols() == 0 {
        return Err(Error::dim("snapshot matrix has no columns"));
    }
    Ok(poisson.half_dim())
}

/// A generated basis and any non-fatal diagnostics.
#[derive(Debug, Clone)]
pub struct BasisOutcome {
    pub basis: ReducedBasis,
    pub warnings: Vec<String>,
}

enum Prepared {
    PodFull {
        u: Matrix,
    },
    PodSeparate {
        uq: Matrix,
        up: Matrix,
    },
    CotangentLift {
        phi: Matrix,
    },
    ComplexSvd {
        u: DMatrix<Complex<f64>>,
        sigma: Vec<f64>,
        dims: (usize, usize),
    },
    OfYs {
        e: Vec<Vector>,
        sigma: Vec<f64>,
        dims: (usize, usize),
        failure: Option<String>,
    },
    Greedy {
        e: Vec<Vector>,
        warnings: Vec<String>,
    },
    SvdLike {
        factors: SvdLikeFactors,
        spectrum: WeightedSpectrum,
        order: Vec<usize>,
    },
}

/// Factorized snapshots ready for basis selection up to `max_size`.
pub struct PreparedBasis {
    method: BasisMethod,
    n: usize,
    max_size: usize,
    inner: Prepared,
}

impl PreparedBasis {
    pub fn new(method: BasisMethod, x: &Matrix, max_size: usize) -> Result<Self> {
        let n = check_size(x, max_size)?;
        let kmax = max_size / 2;
        let inner = match method {
            BasisMethod::PodFull => Prepared::PodFull { u: left_singular(x).0 },
            BasisMethod::PodSeparate => Prepared::PodSeparate {
                uq: left_singular(&x.rows(0, n).into_owned()).0,
                up: left_singular(&x.rows(n, n).into_owned()).0,
            },
            BasisMethod::PsdCotangentLift => {
                let mut lifted = Matrix::zeros(n, 2 * x.ncols());
                lifted.columns_mut(0, x.ncols()).copy_from(&x.rows(0, n));
                lifted.columns_mut(x.ncols(), x.ncols()).copy_from(&x.rows(n, n));
                Prepared::CotangentLift {
                    phi: left_singular(&lifted).0,
                }
            }
            BasisMethod::PsdComplexSvd => {
                let (u, sigma) = complex_left_singular(x, n);
                Prepared::ComplexSvd {
                    u,
                    sigma,
                    dims: (n, x.ncols()),
                }
            }
            BasisMethod::PodOfYs => prepare_ys(x, n, kmax)?,
            BasisMethod::PsdGreedy => {
                let (e, warnings) = greedy(x, kmax)?;
                Prepared::Greedy { e, warnings }
            }
            BasisMethod::PsdSvdLike => {
                let factors = svd_like_decompose(x)?;
                let spectrum = weighted_spectrum(&factors);
                let mut order: Vec<usize> = (0..spectrum.weights.len()).collect();
                // Stable: ties keep the lower index first.
                order.sort_by(|&a, &b| spectrum.weights[b].total_cmp(&spectrum.weights[a]));
                Prepared::SvdLike {
                    factors,
                    spectrum,
                    order,
                }
            }
        };
        Ok(Self {
            method,
            n,
            max_size,
            inner,
        })
    }

    pub fn method(&self) -> BasisMethod {
        self.method
    }

    /// SVD-like factors and weights when prepared for `psd_svd_like`.
    pub fn svd_like(&self) -> Option<(&SvdLikeFactors, &WeightedSpectrum)> {
        match &self.inner {
            Prepared::SvdLike { factors, spectrum, .. } => Some((factors, spectrum)),
            _ => None,
        }
    }

    /// Indices of the selected weighted symplectic singular values, in
    /// selection order.
    pub fn svd_like_selection(&self, size: usize) -> Option<&[usize]> {
        match &self.inner {
            Prepared::SvdLike { order, .. } => order.get(..size / 2),
            _ => None,
        }
    }

    pub fn basis(&self, size: usize) -> Result<BasisOutcome> {
        let n = self.n;
        if size == 0 || size % 2 != 0 || size > self.max_size {
            return Err(Error::Size(format!(
                "basis size {size} must be even and in [2, {}]",
                self.max_size
            )));
        }
        let k = size / 2;
        let mut warnings = Vec::new();
        let basis = match &self.inner {
            Prepared::PodFull { u } => {
                ReducedBasis::new(u.columns(0, size).into_owned(), BasisKind::OrthonormalNonsymplectic)?
            }
            Prepared::PodSeparate { uq, up } => {
                if k > n {
                    return Err(Error::Size(format!("pod_separate needs k <= {n}, got {k}")));
                }
                let mut v = Matrix::zeros(2 * n, size);
                v.view_mut((0, 0), (n, k)).copy_from(&uq.columns(0, k));
                v.view_mut((n, k), (n, k)).copy_from(&up.columns(0, k));
                ReducedBasis::new(v, BasisKind::OrthonormalNonsymplectic)?
            }
            Prepared::CotangentLift { phi } => {
                let mut e = Matrix::zeros(2 * n, k);
                e.view_mut((0, 0), (n, k)).copy_from(&phi.columns(0, k));
                ReducedBasis::from_e_block(&e)?
            }
            Prepared::ComplexSvd { u, sigma, dims } => {
                check_gap(sigma, k, size, *dims)?;
                let mut e = Matrix::zeros(2 * n, k);
                for j in 0..k {
                    let mut col = Vector::from_fn(2 * n, |i, _| if i < n { u[(i, j)].re } else { u[(i - n, j)].im });
                    fix_phase(&mut col, n);
                    e.set_column(j, &col);
                }
                ReducedBasis::from_e_block(&e)?
            }
            Prepared::OfYs {
                e,
                sigma,
                dims,
                failure,
            } => {
                check_gap(sigma, size, size, *dims)?;
                if e.len() < k {
                    let reason = failure
                        .as_ref()
                        .cloned()
                        .unwrap_or_else(|| "too few singular vectors".into());
                    return Err(Error::DecompositionFailure {
                        reason,
                        residual: f64::INFINITY,
                    });
                }
                ReducedBasis::from_e_block(&stack(&e[..k], 2 * n))?
            }
            Prepared::Greedy { e, warnings: w } => {
                let kk = k.min(e.len());
                if kk < k {
                    warnings.extend(w.iter().cloned());
                    warnings.push(format!("greedy basis truncated to size {}", 2 * kk));
                }
                if kk == 0 {
                    return Err(Error::EmptyExtension { skipped: 0 });
                }
                ReducedBasis::from_e_block(&stack(&e[..kk], 2 * n))?
            }
            Prepared::SvdLike { factors, order, .. } => {
                let available = factors.p() + factors.q();
                if k > available {
                    return Err(Error::Size(format!(
                        "psd_svd_like needs k <= p + q = {available}, got {k}"
                    )));
                }
                let s = factors.s();
                let mut v = Matrix::zeros(2 * n, size);
                for (j, &i) in order[..k].iter().enumerate() {
                    v.set_column(j, &s.column(i));
                    v.set_column(k + j, &s.column(n + i));
                }
                ReducedBasis::new(v, BasisKind::SymplecticNonorthonormal)?
            }
        };
        Ok(BasisOutcome { basis, warnings })
    }
}

fn stack(cols: &[Vector], rows: usize) -> Matrix {
    let mut m = Matrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Refuses when the `count` leading singular values are not separated from
/// the rest, or when the last of them is numerically zero (below
/// `max(rows, cols) * eps * sigma_1`).
fn check_gap(sigma: &[f64], count: usize, size: usize, dims: (usize, usize)) -> Result<()> {
    let upper = sigma.get(count - 1).copied().unwrap_or(0.0);
    let lower = sigma.get(count).copied().unwrap_or(0.0);
    let top = sigma.first().copied().unwrap_or(0.0);
    let zero = top * dims.0.max(dims.1) as f64 * f64::EPSILON;
    if upper > zero && upper - lower > GAP_TOL * upper {
        Ok(())
    } else {
        Err(Error::NoSpectralGap { size, lower, upper })
    }
}

/// Rotates `e` within `span{e, J^T e}` (a complex phase of `q + ip`) so the
/// position block carries the largest share of the norm, then fixes the sign
/// by the largest entry. Degenerate pairs leave the phase arbitrary otherwise.
fn fix_phase(e: &mut Vector, n: usize) {
    let (mut re, mut im) = (0.0, 0.0);
    for j in 0..n {
        let (a, b) = (e[j], e[n + j]);
        re += a * a - b * b;
        im += 2.0 * a * b;
    }
    let theta = -0.5 * im.atan2(re);
    let (c, s) = (theta.cos(), theta.sin());
    for j in 0..n {
        let (a, b) = (e[j], e[n + j]);
        e[j] = c * a - s * b;
        e[n + j] = s * a + c * b;
    }
    if e[e.iamax()] < 0.0 {
        e.neg_mut();
    }
}

/// Left singular vectors of `Q + iP` (zero-padded to `n` columns).
fn complex_left_singular(x: &Matrix, n: usize) -> (DMatrix<Complex<f64>>, Vec<f64>) {
    let cols = x.ncols().max(n);
    let c = DMatrix::from_fn(n, cols, |i, j| {
        if j < x.ncols() {
            Complex::new(x[(i, j)], x[(n + i, j)])
        } else {
            Complex::new(0.0, 0.0)
        }
    });
    let svd = SVD::new(c, true, false);
    (
        svd.u.expect("requested U"),
        svd.singular_values.iter().cloned().collect(),
    )
}

/// POD of `[X, J X]`; the leading left singular vectors are rearranged into an
/// `E` block by keeping one representative per `J`-invariant pair.
fn prepare_ys(x: &Matrix, n: usize, kmax: usize) -> Result<Prepared> {
    let poisson = PoissonOperator::new(n);
    let mut ys = Matrix::zeros(2 * n, 2 * x.ncols());
    ys.columns_mut(0, x.ncols()).copy_from(x);
    ys.columns_mut(x.ncols(), x.ncols()).copy_from(&poisson.left_mul(x)?);
    let (u, sigma) = left_singular(&ys);
    let mut es: Vec<Vector> = Vec::with_capacity(kmax);
    let mut fs: Vec<Vector> = Vec::with_capacity(kmax);
    let mut failure = None;
    for c in 0..u.ncols() {
        if es.len() == kmax {
            break;
        }
        let mut w = u.column(c).into_owned();
        for _ in 0..2 {
            for (e, f) in es.iter().zip(&fs) {
                let (ce, cf) = (e.dot(&w), f.dot(&w));
                w.axpy(-ce, e, 1.0);
                w.axpy(-cf, f, 1.0);
            }
        }
        // Partners of kept vectors leave nothing behind; new directions keep
        // almost all of their norm.
        let r = w.norm();
        if r > 0.5 {
            w /= r;
            fix_phase(&mut w, n);
            fs.push(poisson.apply_transpose(&w)?);
            es.push(w);
        }
    }
    if es.len() < kmax {
        failure = Some(format!(
            "only {} symplectic pairs found among the singular vectors",
            es.len()
        ));
    }
    Ok(Prepared::OfYs {
        e: es,
        sigma: sigma.iter().cloned().collect(),
        dims: ys.shape(),
        failure,
    })
}

/// Greedy selection of the snapshot with the largest symplectic projection
/// residual, orthonormalized by symplectic Gram-Schmidt.
fn greedy(x: &Matrix, kmax: usize) -> Result<(Vec<Vector>, Vec<String>)> {
    let n = x.nrows() / 2;
    let poisson = PoissonOperator::new(n);
    let scale = x.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut residual = x.clone();
    let mut basis: Option<ReducedBasis> = None;
    let mut es: Vec<Vector> = Vec::with_capacity(kmax);
    let mut warnings = Vec::new();
    while es.len() < kmax {
        let (pick, best) = residual
            .column_iter()
            .map(|c| c.norm())
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if !(best > GS_DROP_TOL * scale) {
            warnings.push(format!(
                "all snapshots within tolerance of the span after {} iterations",
                es.len()
            ));
            break;
        }
        let candidate = x.column(pick).into_owned();
        let out = match symplectic_gram_schmidt(&[candidate], basis.as_ref()) {
            Ok(out) => out,
            Err(Error::EmptyExtension { .. }) => {
                warnings.push(format!("snapshot {pick} rejected after {} iterations", es.len()));
                break;
            }
            Err(e) => return Err(e),
        };
        let k = out.basis.half_rank();
        let e = out.basis.matrix().column(k - 1).into_owned();
        let f = poisson.apply_transpose(&e)?;
        let ce = e.transpose() * &residual;
        residual -= &e * ce;
        let cf = f.transpose() * &residual;
        residual -= &f * cf;
        es.push(e);
        basis = Some(out.basis);
    }
    Ok((es, warnings))
}

pub fn generate_basis(method: BasisMethod, x: &Matrix, size: usize) -> Result<BasisOutcome> {
    PreparedBasis::new(method, x, size)?.basis(size)
}

pub fn pod_full(x: &Matrix, size: usize) -> Result<ReducedBasis> {
    Ok(generate_basis(BasisMethod::PodFull, x, size)?.basis)
}

pub fn pod_separate(x: &Matrix, size: usize) -> Result<ReducedBasis> {
    Ok(generate_basis(BasisMethod::PodSeparate, x, size)?.basis)
}

pub fn psd_cotangent_lift(x: &Matrix, size: usize) -> Result<ReducedBasis> {
    Ok(generate_basis(BasisMethod::PsdCotangentLift, x, size)?.basis)
}

pub fn psd_complex_svd(x: &Matrix, size: usize) -> Result<ReducedBasis> {
    Ok(generate_basis(BasisMethod::PsdComplexSvd, x, size)?.basis)
}

pub fn pod_of_ys(x: &Matrix, size: usize) -> Result<ReducedBasis> {
    Ok(generate_basis(BasisMethod::PodOfYs, x, size)?.basis)
}

pub fn psd_greedy(x: &Matrix, size: usize) -> Result<ReducedBasis> {
    Ok(generate_basis(BasisMethod::PsdGreedy, x, size)?.basis)
}

pub fn psd_svd_like(x: &Matrix, size: usize) -> Result<ReducedBasis> {
    Ok(generate_basis(BasisMethod::PsdSvdLike, x, size)?.basis)
}
