//! From a config to an operator context at one resolution.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vmstab_characteristics::{OrbitOptions, StepOptions};
use vmstab_equilibrium::trig::uniform_nodes;
use vmstab_equilibrium::{
    solve_equilibrium, DistributionModel, EquilibriumFields, EquilibriumProfile, FamilyConstants, SolveOptions,
    SolveReport, TabulatedProfile, VelocityGrid,
};
use vmstab_kinetic::ProjectionOptions;
use vmstab_operators::{AssemblyOptions, ContextOptions, OperatorContext};

use crate::config::{LoadedConfig, ProfileSpec};

/// Sizes of one run; the convergence sweep scales them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub modes: usize,
    pub nx: usize,
    pub nv: usize,
}

impl Resolution {
    pub fn scaled(self, f: usize) -> Self {
        Self { modes: self.modes * f, nx: self.nx * f, nv: self.nv * f }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub period: f64,
    pub modes: usize,
    pub nx: usize,
    pub nv: usize,
    pub v_max: f64,
    /// SHA-256 of the x nodes, velocity nodes and weights as little-endian
    /// f64 bytes, preceded by the sizes.
    pub sha256: String,
}

impl GridSummary {
    fn new(period: f64, modes: usize, x: &[f64], vgrid: &VelocityGrid, v_max: f64) -> Self {
        let mut h = Sha256::new();
        for n in [modes, x.len(), vgrid.len()] {
            h.update((n as u64).to_le_bytes());
        }
        h.update(period.to_le_bytes());
        for v in x {
            h.update(v.to_le_bytes());
        }
        for j in 0..vgrid.len() {
            let (a, b) = vgrid.velocity(j);
            for v in [a, b, vgrid.weight(j)] {
                h.update(v.to_le_bytes());
            }
        }
        Self { period, modes, nx: x.len(), nv: vgrid.n(), v_max, sha256: hex::encode(h.finalize()) }
    }
}

/// Profile plus optional magnetic seed, built on the given velocity grid
/// (family amplitudes are normalized on it).
pub fn build_profile(
    cfg: &LoadedConfig,
    nx: usize,
    vgrid: &VelocityGrid,
) -> Result<(EquilibriumProfile, Option<Vec<f64>>)> {
    let c = &cfg.config;
    let consts = FamilyConstants {
        period: c.grid.period,
        alpha: c.weight.alpha,
        c_weight: c.weight.c_weight,
        v_max: c.grid.v_max,
    };
    let fam = match &c.profile {
        ProfileSpec::HomogeneousMaxwellian(p) => p.build(consts, vgrid),
        ProfileSpec::TwoStream(p) => p.build(consts, vgrid),
        ProfileSpec::PurelyMagneticSymmetric(p) => p.build(consts, nx, vgrid),
        ProfileSpec::NonmonotoneRing(p) => p.build(consts, vgrid),
        ProfileSpec::Table { n0, .. } => {
            let path = cfg.table_path().expect("table profile has a path");
            let table = TabulatedProfile::from_path(&path)
                .with_context(|| format!("loading profile table {}", path.display()))?;
            let profile = EquilibriumProfile::new(
                DistributionModel::Table(table),
                consts.period,
                consts.alpha,
                consts.c_weight,
                consts.v_max,
                *n0,
            )?;
            return Ok((profile, None));
        }
    }
    .with_context(|| format!("building the {} profile", c.profile.name()))?;
    Ok((fam.profile, fam.psi_seed))
}

pub fn assembly_options(cfg: &LoadedConfig) -> AssemblyOptions {
    let t = &cfg.config.tolerances;
    AssemblyOptions {
        asym_tol: t.asym_tol,
        projection: ProjectionOptions { lambda_proj: t.lambda_proj, proj_tol: t.proj_tol },
    }
}

pub fn context_options(cfg: &LoadedConfig) -> ContextOptions {
    let c = &cfg.config;
    let orbit = OrbitOptions {
        samples: c.orbit.samples,
        horizon: c.orbit.horizon,
        step: StepOptions { rtol: c.orbit.rtol, atol: c.orbit.atol, ..StepOptions::default() },
        ..OrbitOptions::default()
    };
    ContextOptions { orbit, mask_tol: c.tolerances.mask_tol, tail_tol: c.tolerances.tail_tol }
}

/// A self-consistent equilibrium at one resolution.
pub struct Equilibrium {
    pub res: Resolution,
    pub profile: EquilibriumProfile,
    pub vgrid: VelocityGrid,
    pub fields: EquilibriumFields,
    pub solve: SolveReport,
    pub grid: GridSummary,
}

pub fn solve(cfg: &LoadedConfig, res: Resolution) -> Result<Equilibrium> {
    let c = &cfg.config;
    let vgrid = VelocityGrid::new(res.nv, c.grid.v_max)?;
    let (profile, psi_guess) = build_profile(cfg, res.nx, &vgrid)?;
    let opts = SolveOptions {
        tol: c.tolerances.solve_tol,
        neutrality_tol: c.tolerances.neutrality_tol,
        psi_guess,
        ..SolveOptions::default()
    };
    let (fields, solve) = solve_equilibrium(&profile, res.nx, &vgrid, &opts).context("solving the equilibrium")?;
    let grid = GridSummary::new(c.grid.period, res.modes, &uniform_nodes(res.nx, c.grid.period), &vgrid, c.grid.v_max);
    Ok(Equilibrium { res, profile, vgrid, fields, solve, grid })
}

impl Equilibrium {
    pub fn context(&self, cfg: &LoadedConfig) -> Result<OperatorContext> {
        OperatorContext::new(&self.profile, &self.fields, self.vgrid.clone(), &context_options(cfg))
            .context("building the phase grid and orbits")
    }
}
