use vmstab_equilibrium::trig::uniform_nodes;
use vmstab_equilibrium::{lorentz, EquilibriumFields, EquilibriumProfile, Species, VelocityGrid};

use crate::KineticError;

/// Tensor grid: N_x uniform x nodes times the N_v x N_v Gauss-Legendre
/// velocity grid. Node n = i * N_v^2 + j with j the flat velocity index.
#[derive(Clone, Debug)]
pub struct PhaseGrid {
    pub period: f64,
    pub x: Vec<f64>,
    pub vgrid: VelocityGrid,
    /// Species weight w(e) at every node, indexed by `Species::index`.
    weight: [Vec<f64>; 2],
}

impl PhaseGrid {
    pub fn new(
        profile: &EquilibriumProfile,
        fields: &EquilibriumFields,
        vgrid: VelocityGrid,
    ) -> Self {
        let x = uniform_nodes(fields.nx(), fields.period);
        let nv2 = vgrid.len();
        let mut weight = [vec![0.0; x.len() * nv2], vec![0.0; x.len() * nv2]];
        for s in Species::BOTH {
            let w = &mut weight[s.index()];
            for i in 0..x.len() {
                let phi = fields.phi0[i];
                for j in 0..nv2 {
                    let (v1, v2) = vgrid.velocity(j);
                    w[i * nv2 + j] = profile.weight(lorentz(v1, v2) + s.sign() * phi);
                }
            }
        }
        Self {
            period: fields.period,
            x,
            vgrid,
            weight,
        }
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.vgrid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// (x index, velocity index) of node n.
    #[inline]
    pub fn split(&self, n: usize) -> (usize, usize) {
        (n / self.vgrid.len(), n % self.vgrid.len())
    }

    /// (x, v1, v2) of node n.
    #[inline]
    pub fn point(&self, n: usize) -> (f64, f64, f64) {
        let (i, j) = self.split(n);
        let (v1, v2) = self.vgrid.velocity(j);
        (self.x[i], v1, v2)
    }

    /// dx dv quadrature weight of node n.
    #[inline]
    pub fn measure(&self, n: usize) -> f64 {
        self.period / self.nx() as f64 * self.vgrid.weight(n % self.vgrid.len())
    }

    #[inline]
    pub fn species_weight(&self, species: Species, n: usize) -> f64 {
        self.weight[species.index()][n]
    }

    fn key(&self) -> (usize, usize, u64, u64) {
        (
            self.nx(),
            self.vgrid.n(),
            self.period.to_bits(),
            self.vgrid.v_max.to_bits(),
        )
    }
}

/// Values of a function of (x, v) at the nodes of a `PhaseGrid`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseFunction {
    pub values: Vec<f64>,
    pub species: Species,
    key: (usize, usize, u64, u64),
}

impl PhaseFunction {
    pub fn from_values(
        grid: &PhaseGrid,
        species: Species,
        values: Vec<f64>,
    ) -> Result<Self, KineticError> {
        if values.len() != grid.len() || values.iter().any(|v| !v.is_finite()) {
            return Err(KineticError::GridMismatch);
        }
        Ok(Self {
            values,
            species,
            key: grid.key(),
        })
    }

    pub fn from_fn(grid: &PhaseGrid, species: Species, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|n| {
                let (x, v1, v2) = grid.point(n);
                f(x, v1, v2)
            })
            .collect();
        Self {
            values,
            species,
            key: grid.key(),
        }
    }

    pub fn belongs_to(&self, grid: &PhaseGrid) -> bool {
        self.key == grid.key() && self.values.len() == grid.len()
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            values,
            species: self.species,
            key: self.key,
        }
    }
}

/// Quadrature of int_0^P int f g w dv dx.
pub fn weighted_inner(
    grid: &PhaseGrid,
    f: &PhaseFunction,
    g: &PhaseFunction,
) -> Result<f64, KineticError> {
    if f.species != g.species || !f.belongs_to(grid) || !g.belongs_to(grid) {
        return Err(KineticError::GridMismatch);
    }
    let s = f.species;
    Ok((0..grid.len())
        .map(|n| grid.measure(n) * grid.species_weight(s, n) * f.values[n] * g.values[n])
        .sum())
}

pub fn weighted_norm(grid: &PhaseGrid, f: &PhaseFunction) -> Result<f64, KineticError> {
    Ok(weighted_inner(grid, f, f)?.sqrt())
}
