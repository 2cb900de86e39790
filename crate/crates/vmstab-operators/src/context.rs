use rayon::prelude::*;
use vmstab_characteristics::OrbitOptions;
use vmstab_equilibrium::{
    eval_coefficient_fields, lorentz, CoefficientFields, Density, EquilibriumFields, EquilibriumProfile, Species,
    VelocityGrid,
};
use vmstab_kinetic::{CacheStats, OrbitCache, PhaseGrid};

use crate::OperatorError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContextOptions {
    pub orbit: OrbitOptions,
    /// Nodes with |mu_e| below this fraction of its maximum carry no kinetic
    /// term and get no orbit.
    pub mask_tol: f64,
    /// Largest accepted share of the profile mass on the outer velocity shell.
    pub tail_tol: f64,
}

impl Default for ContextOptions {
    fn default() -> Self {
        Self { orbit: OrbitOptions::default(), mask_tol: 1e-13, tail_tol: 1e-4 }
    }
}

/// Everything that does not depend on lambda: the phase grid, mu and its
/// derivatives at every node, the local coefficients, and one orbit per
/// relevant node and species.
pub struct OperatorContext {
    pub profile: EquilibriumProfile,
    pub fields: EquilibriumFields,
    pub grid: PhaseGrid,
    pub coefficients: CoefficientFields,
    pub caches: [OrbitCache; 2],
    density: [Vec<Density>; 2],
}

impl OperatorContext {
    pub fn new(
        profile: &EquilibriumProfile,
        fields: &EquilibriumFields,
        vgrid: VelocityGrid,
        opts: &ContextOptions,
    ) -> Result<Self, OperatorError> {
        let coefficients = eval_coefficient_fields(profile, fields, &vgrid, opts.tail_tol)?;
        let grid = PhaseGrid::new(profile, fields, vgrid);
        let density = Species::BOTH.map(|s| {
            (0..grid.len())
                .into_par_iter()
                .map(|n| {
                    let (i, _) = grid.split(n);
                    let (_, v1, v2) = grid.point(n);
                    let sg = s.sign();
                    profile.eval(s, lorentz(v1, v2) + sg * fields.phi0[i], v2 + sg * fields.psi0[i])
                })
                .collect::<Vec<_>>()
        });
        let peak = density.iter().flatten().fold(0.0f64, |m, d| m.max(d.mu_e.abs()));
        let mut caches = Vec::with_capacity(2);
        for s in Species::BOTH {
            let mask: Vec<bool> = density[s.index()].iter().map(|d| d.mu_e.abs() > opts.mask_tol * peak).collect();
            caches.push(OrbitCache::build(&grid, fields, s, Some(mask), &opts.orbit)?);
        }
        let minus = caches.pop().expect("two caches");
        let plus = caches.pop().expect("two caches");
        Ok(Self { profile: profile.clone(), fields: fields.clone(), grid, coefficients, caches: [plus, minus], density })
    }

    #[inline]
    pub fn density(&self, species: Species, n: usize) -> Density {
        self.density[species.index()][n]
    }

    pub fn period(&self) -> f64 {
        self.grid.period
    }

    pub fn orbit_stats(&self) -> [CacheStats; 2] {
        [self.caches[0].stats, self.caches[1].stats]
    }
}
