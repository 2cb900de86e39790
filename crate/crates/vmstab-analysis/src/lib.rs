//! Instability criterion from the lambda = 0 operators, continuation of the
//! inertia of the truncated block matrix in lambda, the kernel crossing and
//! the growing mode rebuilt from it.

mod criterion;
mod crossing;
mod dispersion;
mod mode;
mod scan;

pub use criterion::{
    check_hypotheses, evaluate_criterion, stable_from, truncated_counts, CriterionOptions,
    CriterionVerdict, Hypothesis, HypothesisFlags, TruncatedCount, Verdict,
};
pub use crossing::{
    find_kernel_crossing, lift_vector, refine_n, truncation_for, Crossing, CrossingOptions,
    LiftedVector, NEntry, Refinement, RefineOptions,
};
pub use dispersion::{dispersion_oracle, dispersion_roots, dominant_dispersion_root, DispersionRoot};
pub use mode::{mode_residual, reconstruct_mode, GrowingMode, ModeResidual};
pub use scan::{
    find_lambda_max, lambda_grid, scan_lambda, MatrixFamily, RateOperators, ScanOptions, ScanRow,
    ScanTable, TruncatedFamily,
};

use thiserror::Error;
use vmstab_inertia::InertiaError;
use vmstab_kinetic::KineticError;
use vmstab_operators::OperatorError;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no change of the negative count between lambda = {lo:.6e} and {hi:.6e}")]
    BracketLost { lo: f64, hi: f64 },
    #[error("kernel vector is parallel to the trivial solution (overlap {overlap:.3e})")]
    TrivialKernel { overlap: f64 },
    #[error("no kernel crossing at rank {n}")]
    NoConvergence { n: usize },
    #[error("large-lambda plateau of {plateau} negative eigenvalues not reached below lambda = {last:.3e}")]
    PlateauNotReached { plateau: usize, last: f64 },
    #[error("invalid rate interval: {0}")]
    InvalidInterval(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Inertia(#[from] InertiaError),
    #[error(transparent)]
    Kinetic(#[from] KineticError),
}
