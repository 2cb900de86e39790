//! Dense real-Fourier representations of A1, A2, B, C, D and l at a rate
//! lambda > 0 (through Q^lambda) or at lambda = 0 (through the orbit
//! projection), and the symmetric block matrices built from them.

mod assemble;
mod basis;
mod block;
mod context;
mod dump;

pub use assemble::{assemble_operator_set, AssemblyOptions, Asymmetry, OperatorSet, RawOperators};
pub use basis::SpectralBasis;
pub use block::{assemble_m, assemble_m0, assemble_m_raw, trivial_vector};
pub use context::{ContextOptions, OperatorContext};
pub use dump::write_matrix_csv;

use thiserror::Error;
use vmstab_equilibrium::EquilibriumError;
use vmstab_inertia::InertiaError;
use vmstab_kinetic::KineticError;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("{block} asymmetry {value:.3e} exceeds {tol:.3e}")]
    AsymmetryTooLarge { block: &'static str, value: f64, tol: f64 },
    #[error("basis with {modes} modes is not resolved by {nx} x nodes (need nx >= 4 modes)")]
    Unresolved { modes: usize, nx: usize },
    #[error("invalid rate {0}")]
    InvalidRate(f64),
    #[error(transparent)]
    Kinetic(#[from] KineticError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error(transparent)]
    Inertia(#[from] InertiaError),
}
