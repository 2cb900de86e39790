//! Inertia (neg, zero, pos) of real symmetric matrices, spectral truncation
//! of the 3x3 block operators and their block-congruence diagonalization.

mod blocks;
mod count;
mod truncate;

pub use blocks::{block_diagonalize, k1_operator, BlockDiagonalization, BlockMatrix};
pub use count::{inertia_count, sorted_eigen, InertiaReport, ZeroTol};
pub use truncate::{spectral_cut, truncate_m, truncation_projectors, TruncationPair};

pub use nalgebra::{DMatrix, DVector};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InertiaError {
    #[error("symmetric eigen-decomposition failed ({0})")]
    EigFailure(String),
    #[error(
        "truncation cut at {n} falls inside an eigenvalue cluster (gap {gap:.3e} <= {gap_tol:.3e})"
    )]
    DegenerateCut { n: usize, gap: f64, gap_tol: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pivot block {which} is singular or ill-conditioned (condition {cond:.3e})")]
    SingularPivot { which: &'static str, cond: f64 },
    #[error(
        "A1 is numerically singular on the mean-zero space (smallest |eigenvalue| {min_abs:.3e})"
    )]
    HypothesisFailure { min_abs: f64 },
}
