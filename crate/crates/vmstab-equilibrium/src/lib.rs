//! Equilibrium side of the analyzer: distribution profiles mu(e, p) for the
//! two species, the periodic self-consistent potentials and the velocity
//! moments that feed operator assembly.

mod families;
mod fields;
mod profile;
mod quadrature;
mod solve;
mod table;
pub mod trig;

pub use families::{
    Constants as FamilyConstants, FamilyProfile, HomogeneousMaxwellian, NonmonotoneRing, PurelyMagneticSymmetric, TwoStream,
};
pub use fields::EquilibriumFields;
pub use profile::{Density, DistributionModel, EnergyShape, EquilibriumProfile, MomentumShape, ProfileTerm};
pub use quadrature::{gauss_legendre, lorentz, VelocityGrid};
pub use solve::{
    eval_coefficient_fields, equilibrium_residual, moments, solve_equilibrium, CoefficientFields,
    ResidualReport, SolveOptions, SolveReport,
};
pub use table::TabulatedProfile;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Particle species. `Plus` carries charge +1, `Minus` charge -1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Species {
    Plus,
    Minus,
}

impl Species {
    pub const BOTH: [Species; 2] = [Species::Plus, Species::Minus];

    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Species::Plus => 1.0,
            Species::Minus => -1.0,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Species::Plus => 0,
            Species::Minus => 1,
        }
    }
}

#[derive(Debug, Error)]
pub enum EquilibriumError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("weight bound violated at e={e:.6}, p={p:.6}: |mu_e|+|mu_p| = {value:.3e} > c(1+|e|)^-alpha = {bound:.3e}")]
    WeightBound { e: f64, p: f64, value: f64, bound: f64 },
    #[error("equilibrium iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("neutrality defect too large: charge {charge:.3e}, current {current:.3e} (tolerance {tol:.1e})")]
    NeutralityViolation { charge: f64, current: f64, tol: f64 },
    #[error("velocity tail too large: shell fraction {fraction:.3e} exceeds {tol:.1e}")]
    TailTooLarge { fraction: f64, tol: f64 },
    #[error("profile table: {0}")]
    Table(String),
}
