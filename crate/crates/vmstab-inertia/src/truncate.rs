use nalgebra::DMatrix;

use crate::blocks::BlockMatrix;
use crate::count::sorted_eigen;
use crate::InertiaError;

/// Orthonormal eigenvector columns for the lowest n_phi eigenvalues of A1
/// (`p`) and the lowest n_psi eigenvalues of A2 (`q`), ascending.
#[derive(Clone, Debug)]
pub struct TruncationPair {
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub n_phi: usize,
    pub n_psi: usize,
    pub a1_eigenvalues: Vec<f64>,
    pub a2_eigenvalues: Vec<f64>,
}

fn gap_at(eigs: &[f64], n: usize) -> f64 {
    if n == 0 || n >= eigs.len() {
        f64::INFINITY
    } else {
        eigs[n] - eigs[n - 1]
    }
}

/// Smallest n' >= n whose cut does not split an eigenvalue cluster.
pub fn spectral_cut(eigs: &[f64], n: usize, gap_tol: f64) -> usize {
    let mut m = n.min(eigs.len());
    while gap_at(eigs, m) <= gap_tol {
        m += 1;
    }
    m
}

fn leading(
    vectors: &DMatrix<f64>,
    eigs: &[f64],
    n: usize,
    gap_tol: f64,
) -> Result<DMatrix<f64>, InertiaError> {
    if n > eigs.len() {
        return Err(InertiaError::DimensionMismatch(format!(
            "rank {n} exceeds dimension {}",
            eigs.len()
        )));
    }
    let gap = gap_at(eigs, n);
    if gap <= gap_tol {
        return Err(InertiaError::DegenerateCut { n, gap, gap_tol });
    }
    Ok(vectors.columns(0, n).clone_owned())
}

pub fn truncation_projectors(
    a1: &DMatrix<f64>,
    a2: &DMatrix<f64>,
    n_phi: usize,
    n_psi: usize,
    gap_tol: f64,
) -> Result<TruncationPair, InertiaError> {
    let (e1, v1) = sorted_eigen(a1)?;
    let (e2, v2) = sorted_eigen(a2)?;
    Ok(TruncationPair {
        p: leading(&v1, &e1, n_phi, gap_tol)?,
        q: leading(&v2, &e2, n_psi, gap_tol)?,
        n_phi,
        n_psi,
        a1_eigenvalues: e1,
        a2_eigenvalues: e2,
    })
}

/// T^T M T with T = diag(P_n, Q_n, I).
pub fn truncate_m(m: &BlockMatrix, pair: &TruncationPair) -> Result<DMatrix<f64>, InertiaError> {
    let [d1, d2, d3] = m.dims;
    if pair.p.nrows() != d1 || pair.q.nrows() != d2 {
        return Err(InertiaError::DimensionMismatch(format!(
            "projectors act on ({}, {}), blocks are ({d1}, {d2})",
            pair.p.nrows(),
            pair.q.nrows()
        )));
    }
    let (n1, n2) = (pair.n_phi, pair.n_psi);
    let mut t = DMatrix::zeros(d1 + d2 + d3, n1 + n2 + d3);
    t.view_mut((0, 0), (d1, n1)).copy_from(&pair.p);
    t.view_mut((d1, n1), (d2, n2)).copy_from(&pair.q);
    for k in 0..d3 {
        t[(d1 + d2 + k, n1 + n2 + k)] = 1.0;
    }
    let out = t.transpose() * &m.matrix * &t;
    Ok(0.5 * (&out + out.transpose()))
}
