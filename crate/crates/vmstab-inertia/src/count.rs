use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::InertiaError;

/// Threshold below which an eigenvalue counts as zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ZeroTol {
    Absolute(f64),
    /// Multiple of the spectral norm.
    Relative(f64),
}

impl Default for ZeroTol {
    fn default() -> Self {
        ZeroTol::Relative(1e-8)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InertiaReport {
    pub neg: usize,
    pub zero: usize,
    pub pos: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Absolute threshold actually used.
    pub zero_tol: f64,
    /// Smallest |eigenvalue| outside [-zero_tol, zero_tol]; None if every
    /// eigenvalue is counted as zero.
    pub margin: Option<f64>,
}

impl InertiaReport {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Distance from the threshold to the nearest eigenvalue on either side.
    /// Counts are unchanged by moving zero_tol by less than this.
    pub fn tol_slack(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|e| (e.abs() - self.zero_tol).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Ascending eigenvalues and matching orthonormal eigenvector columns.
pub fn sorted_eigen(s: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>), InertiaError> {
    if !s.is_square() {
        return Err(InertiaError::DimensionMismatch(format!(
            "{}x{} is not square",
            s.nrows(),
            s.ncols()
        )));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(InertiaError::EigFailure("non-finite entry".into()));
    }
    let n = s.nrows();
    if n == 0 {
        return Ok((vec![], DMatrix::zeros(0, 0)));
    }
    let eig = SymmetricEigen::try_new(s.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| InertiaError::EigFailure("no convergence".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &k) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(k).clone_owned();
        // deterministic sign: largest-magnitude entry positive
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(c, &col);
    }
    Ok((values, vectors))
}

pub fn inertia_count(s: &DMatrix<f64>, tol: ZeroTol) -> Result<InertiaReport, InertiaError> {
    let (eigenvalues, _) = sorted_eigen(s)?;
    Ok(report_from(eigenvalues, tol))
}

pub(crate) fn report_from(eigenvalues: Vec<f64>, tol: ZeroTol) -> InertiaReport {
    let norm = eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let zero_tol = match tol {
        ZeroTol::Absolute(t) => t,
        ZeroTol::Relative(r) => r * norm,
    };
    let (mut neg, mut zero, mut pos) = (0, 0, 0);
    let mut margin: Option<f64> = None;
    for &e in &eigenvalues {
        if e.abs() <= zero_tol {
            zero += 1;
            continue;
        }
        if e < 0.0 {
            neg += 1;
        } else {
            pos += 1;
        }
        margin = Some(margin.map_or(e.abs(), |m| m.min(e.abs())));
    }
    InertiaReport {
        neg,
        zero,
        pos,
        eigenvalues,
        zero_tol,
        margin,
    }
}
