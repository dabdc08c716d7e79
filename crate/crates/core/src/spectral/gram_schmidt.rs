use crate::symplectic::{PoissonOperator, ReducedBasis};
use crate::{Error, Matrix, Result, Vector};

/// A candidate whose norm after projection falls below this fraction of its
/// original norm is skipped.
pub const GS_DROP_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct GramSchmidtOutcome {
    /// `[E, J^T E]` with the seed `E` block first.
    pub basis: ReducedBasis,
    /// Indices of skipped candidates.
    pub skipped: Vec<usize>,
}

/// Extends the `E` block of an orthosymplectic seed (or an empty one) by the
/// candidates, orthogonalizing each against `E` and `J^T E` with one
/// mandatory reorthogonalization pass.
pub fn symplectic_gram_schmidt(vectors: &[Vector], seed: Option<&ReducedBasis>) -> Result<GramSchmidtOutcome> {
    let dim = match (seed, vectors.first()) {
        (Some(s), _) => s.full_dim(),
        (None, Some(v)) => v.len(),
        (None, None) => return Err(Error::EmptyExtension { skipped: 0 }),
    };
    let poisson = PoissonOperator::for_dim(dim)?;
    let mut es: Vec<Vector> = Vec::new();
    let mut fs: Vec<Vector> = Vec::new();
    if let Some(s) = seed {
        let k = s.half_rank();
        for i in 0..k {
            es.push(s.matrix().column(i).into_owned());
            fs.push(s.matrix().column(k + i).into_owned());
        }
    }

    let mut skipped = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        if v.len() != dim {
            return Err(Error::dim(format!(
                "candidate {idx} has length {}, expected {dim}",
                v.len()
            )));
        }
        let norm0 = v.norm();
        let mut w = v.clone();
        for _ in 0..2 {
            for (e, f) in es.iter().zip(&fs) {
                let ce = e.dot(&w);
                let cf = f.dot(&w);
                w.axpy(-ce, e, 1.0);
                w.axpy(-cf, f, 1.0);
            }
        }
        let nw = w.norm();
        if norm0 == 0.0 || nw < GS_DROP_TOL * norm0 {
            skipped.push(idx);
            continue;
        }
        w /= nw;
        fs.push(poisson.apply_transpose(&w)?);
        es.push(w);
    }
    if skipped.len() == vectors.len() {
        return Err(Error::EmptyExtension { skipped: skipped.len() });
    }

    let k = es.len();
    let mut columns = Matrix::zeros(dim, 2 * k);
    for i in 0..k {
        columns.set_column(i, &es[i]);
        columns.set_column(k + i, &fs[i]);
    }
    Ok(GramSchmidtOutcome {
        basis: ReducedBasis::from_e_block(&columns.columns(0, k).into_owned())?,
        skipped,
    })
}
