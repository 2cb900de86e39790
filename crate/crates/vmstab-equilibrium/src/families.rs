//! Built-in profile families. Amplitudes are fixed so that each term carries
//! the requested density on the run's own velocity grid at zero fields; this
//! makes the homogeneous families exactly neutral on that grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::profile::{DistributionModel, EnergyShape, EquilibriumProfile, MomentumShape, ProfileTerm};
use crate::quadrature::{lorentz, VelocityGrid};
use crate::trig::uniform_nodes;
use crate::EquilibriumError;

/// Profile plus an optional seed for the magnetic potential.
#[derive(Clone, Debug)]
pub struct FamilyProfile {
    pub profile: EquilibriumProfile,
    pub psi_seed: Option<Vec<f64>>,
}

/// Common constants every family needs.
#[derive(Clone, Copy, Debug)]
pub struct Constants {
    pub period: f64,
    pub alpha: f64,
    pub c_weight: f64,
    pub v_max: f64,
}

fn term(energy: EnergyShape, momentum: MomentumShape, density: f64, vgrid: &VelocityGrid) -> Result<ProfileTerm, EquilibriumError> {
    if !(density.is_finite() && density >= 0.0) {
        return Err(EquilibriumError::InvalidProfile(format!("density must be nonnegative, got {density}")));
    }
    let unit = ProfileTerm { amplitude: 1.0, energy, momentum };
    let mass: f64 = (0..vgrid.len())
        .map(|k| {
            let (v1, v2) = vgrid.velocity(k);
            vgrid.weight(k) * unit.eval(lorentz(v1, v2), v2).mu
        })
        .sum();
    if !(mass > 0.0) {
        return Err(EquilibriumError::InvalidProfile("profile term has no mass on the velocity grid".into()));
    }
    Ok(ProfileTerm { amplitude: density / mass, ..unit })
}

fn build(
    c: Constants,
    plus: Vec<ProfileTerm>,
    minus: Vec<ProfileTerm>,
    n0: f64,
) -> Result<EquilibriumProfile, EquilibriumError> {
    EquilibriumProfile::new(DistributionModel::Analytic { plus, minus }, c.period, c.alpha, c.c_weight, c.v_max, n0)
}

/// Both species exp(-(e-1)/T) with equal densities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomogeneousMaxwellian {
    pub temperature: f64,
    pub density: f64,
}

impl HomogeneousMaxwellian {
    pub fn build(&self, c: Constants, vgrid: &VelocityGrid) -> Result<FamilyProfile, EquilibriumError> {
        let t = term(EnergyShape::Exp { theta: self.temperature }, MomentumShape::Flat, self.density, vgrid)?;
        Ok(FamilyProfile { profile: build(c, vec![t], vec![t], 0.0)?, psi_seed: None })
    }
}

/// Species minus: counter-streaming beams along v1 (energy ring around
/// sqrt(1 + drift^2), narrow in p). Species plus: a population thermal along
/// v1 only, with two bumps at p = +-transverse_drift. Homogeneous; n0
/// neutralizes the density difference.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoStream {
    pub beam_drift: f64,
    pub beam_energy_width: f64,
    pub beam_momentum_width: f64,
    pub beam_density: f64,
    pub transverse_temperature: f64,
    pub transverse_drift: f64,
    pub transverse_width: f64,
    pub transverse_density: f64,
}

impl TwoStream {
    pub fn build(&self, c: Constants, vgrid: &VelocityGrid) -> Result<FamilyProfile, EquilibriumError> {
        let beams = term(
            EnergyShape::Ring { center: lorentz(self.beam_drift, 0.0), width: self.beam_energy_width },
            MomentumShape::Gauss { sigma: self.beam_momentum_width },
            self.beam_density,
            vgrid,
        )?;
        let minus = vec![beams];
        let mut plus = vec![];
        if self.transverse_density > 0.0 {
            plus.push(term(
                EnergyShape::AnisoExp { theta: self.transverse_temperature },
                MomentumShape::DoubleGauss { center: self.transverse_drift, sigma: self.transverse_width },
                self.transverse_density,
                vgrid,
            )?);
        }
        let n0 = self.beam_density - self.transverse_density;
        Ok(FamilyProfile { profile: build(c, plus, minus, n0)?, psi_seed: None })
    }
}

/// mu_plus(e, p) = mu_minus(e, -p), even in p, with no background charge.
/// The magnetic potential is seeded with `seed_amplitude * cos(2 pi x / P)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PurelyMagneticSymmetric {
    pub temperature: f64,
    pub drift: f64,
    pub width: f64,
    pub density: f64,
    pub seed_amplitude: f64,
}

impl PurelyMagneticSymmetric {
    pub fn build(&self, c: Constants, nx: usize, vgrid: &VelocityGrid) -> Result<FamilyProfile, EquilibriumError> {
        let t = term(
            EnergyShape::AnisoExp { theta: self.temperature },
            MomentumShape::DoubleGauss { center: self.drift, sigma: self.width },
            self.density,
            vgrid,
        )?;
        let seed = uniform_nodes(nx, c.period)
            .into_iter()
            .map(|x| self.seed_amplitude * (2.0 * PI * x / c.period).cos())
            .collect();
        Ok(FamilyProfile { profile: build(c, vec![t], vec![t], 0.0)?, psi_seed: Some(seed) })
    }
}

/// Isotropic energy ring for both species.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonmonotoneRing {
    pub ring_energy: f64,
    pub width: f64,
    pub density: f64,
}

impl NonmonotoneRing {
    pub fn build(&self, c: Constants, vgrid: &VelocityGrid) -> Result<FamilyProfile, EquilibriumError> {
        let t = term(
            EnergyShape::Ring { center: self.ring_energy, width: self.width },
            MomentumShape::Flat,
            self.density,
            vgrid,
        )?;
        Ok(FamilyProfile { profile: build(c, vec![t], vec![t], 0.0)?, psi_seed: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Species;
    use approx::assert_relative_eq;

    fn consts() -> Constants {
        Constants { period: 6.0, alpha: 3.0, c_weight: 1e4, v_max: 4.0 }
    }

    fn density(p: &EquilibriumProfile, s: Species, g: &VelocityGrid) -> f64 {
        (0..g.len())
            .map(|k| {
                let (a, b) = g.velocity(k);
                g.weight(k) * p.eval(s, lorentz(a, b), b).mu
            })
            .sum()
    }

    #[test]
    fn densities_are_normalized_on_the_grid() {
        let g = VelocityGrid::new(32, 4.0).unwrap();
        let ts = TwoStream {
            beam_drift: 0.8,
            beam_energy_width: 0.1,
            beam_momentum_width: 0.3,
            beam_density: 1.0,
            transverse_temperature: 0.05,
            transverse_drift: 1.0,
            transverse_width: 0.3,
            transverse_density: 0.3,
        }
        .build(consts(), &g)
        .unwrap();
        assert_relative_eq!(density(&ts.profile, Species::Minus, &g), 1.0, max_relative = 1e-13);
        assert_relative_eq!(density(&ts.profile, Species::Plus, &g), 0.3, max_relative = 1e-13);
        assert_relative_eq!(ts.profile.n0, 0.7);
        let hm = HomogeneousMaxwellian { temperature: 0.5, density: 2.0 }.build(consts(), &g).unwrap();
        assert_relative_eq!(density(&hm.profile, Species::Plus, &g), 2.0, max_relative = 1e-13);
    }

    #[test]
    fn magnetic_family_is_species_symmetric() {
        let g = VelocityGrid::new(16, 4.0).unwrap();
        let f = PurelyMagneticSymmetric { temperature: 0.2, drift: 1.0, width: 0.4, density: 0.25, seed_amplitude: 0.05 }
            .build(consts(), 16, &g)
            .unwrap();
        for (e, p) in [(1.3, 0.4), (2.0, -1.1)] {
            let a = f.profile.eval(Species::Plus, e, p);
            let b = f.profile.eval(Species::Minus, e, -p);
            assert_relative_eq!(a.mu, b.mu, max_relative = 1e-14);
            assert_relative_eq!(a.mu_p, -b.mu_p, max_relative = 1e-14);
        }
        assert_eq!(f.psi_seed.unwrap().len(), 16);
    }
}
