//! Phase-space side of the linearized problem: the weighted spaces, the
//! transport derivative along equilibrium characteristics, the resolvent
//! orbit averages Q^lambda and the projection onto the transport kernel.

mod grid;
mod interp;
mod orbits;
mod transport;

use thiserror::Error;
use vmstab_characteristics::CharacteristicsError;
use vmstab_equilibrium::EquilibriumError;

pub use grid::{weighted_inner, weighted_norm, PhaseFunction, PhaseGrid};
pub use interp::{BarycentricRule, PhaseInterpolant};
pub use orbits::{
    apply_projection, apply_q_lambda, orbit_weights, resolvent_weights, CacheStats, OrbitCache,
    OrbitFunction, ProjectionOptions, ProjectionReport, XFunction,
};
pub use transport::apply_d;

#[derive(Debug, Error)]
pub enum KineticError {
    #[error("phase functions live on different grids or species")]
    GridMismatch,
    #[error("invalid rate lambda = {0}")]
    InvalidRate(f64),
    #[error(
        "orbit average and Abel limit at lambda = {lambda:.1e} disagree by {disagreement:.3e} (relative), above {tol:.1e}"
    )]
    ProjectionDisagreement {
        lambda: f64,
        disagreement: f64,
        tol: f64,
    },
    #[error(transparent)]
    Characteristics(#[from] CharacteristicsError),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}
