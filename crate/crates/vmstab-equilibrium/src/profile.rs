use serde::{Deserialize, Serialize};

use crate::table::TabulatedProfile;
use crate::{EquilibriumError, Species};

/// mu and its partial derivatives at one (e, p).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Density {
    pub mu: f64,
    pub mu_e: f64,
    pub mu_p: f64,
}

impl std::ops::AddAssign for Density {
    fn add_assign(&mut self, o: Self) {
        self.mu += o.mu;
        self.mu_e += o.mu_e;
        self.mu_p += o.mu_p;
    }
}

/// Energy factor of a product term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EnergyShape {
    /// exp(-(e - 1) / theta)
    Exp { theta: f64 },
    /// exp(-(e - center)^2 / (2 width^2)), nonmonotone in e
    Ring { center: f64, width: f64 },
    /// exp(-(e - sqrt(1 + p^2)) / theta): thermal along v1 only
    AnisoExp { theta: f64 },
}

/// Canonical-momentum factor of a product term.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MomentumShape {
    Flat,
    Gauss { sigma: f64 },
    DoubleGauss { center: f64, sigma: f64 },
}

/// (value, d/de, d/dp)
fn energy_factor(shape: &EnergyShape, e: f64, p: f64) -> (f64, f64, f64) {
    match *shape {
        EnergyShape::Exp { theta } => {
            let f = (-(e - 1.0) / theta).exp();
            (f, -f / theta, 0.0)
        }
        EnergyShape::Ring { center, width } => {
            let d = e - center;
            let f = (-d * d / (2.0 * width * width)).exp();
            (f, -d / (width * width) * f, 0.0)
        }
        EnergyShape::AnisoExp { theta } => {
            let gp = (1.0 + p * p).sqrt();
            let f = (-(e - gp) / theta).exp();
            (f, -f / theta, f * p / (theta * gp))
        }
    }
}

fn momentum_factor(shape: &MomentumShape, p: f64) -> (f64, f64) {
    match *shape {
        MomentumShape::Flat => (1.0, 0.0),
        MomentumShape::Gauss { sigma } => {
            let s2 = sigma * sigma;
            let f = (-p * p / (2.0 * s2)).exp();
            (f, -p / s2 * f)
        }
        MomentumShape::DoubleGauss { center, sigma } => {
            let s2 = sigma * sigma;
            let a = (-(p - center).powi(2) / (2.0 * s2)).exp();
            let b = (-(p + center).powi(2) / (2.0 * s2)).exp();
            (a + b, -(p - center) / s2 * a - (p + center) / s2 * b)
        }
    }
}

/// amplitude * E(e, p) * S(p)
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileTerm {
    pub amplitude: f64,
    pub energy: EnergyShape,
    pub momentum: MomentumShape,
}

impl ProfileTerm {
    #[inline]
    pub fn eval(&self, e: f64, p: f64) -> Density {
        let (g, ge, gp) = energy_factor(&self.energy, e, p);
        let (h, hp) = momentum_factor(&self.momentum, p);
        Density {
            mu: self.amplitude * g * h,
            mu_e: self.amplitude * ge * h,
            mu_p: self.amplitude * (gp * h + g * hp),
        }
    }

    fn validate(&self) -> Result<(), EquilibriumError> {
        let bad = |what: &str| Err(EquilibriumError::InvalidProfile(what.to_string()));
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return bad("term amplitude must be finite and nonnegative");
        }
        match self.energy {
            EnergyShape::Exp { theta } | EnergyShape::AnisoExp { theta } if !(theta > 0.0) => {
                return bad("temperature must be positive")
            }
            EnergyShape::Ring { width, .. } if !(width > 0.0) => return bad("ring width must be positive"),
            _ => {}
        }
        match self.momentum {
            MomentumShape::Gauss { sigma } | MomentumShape::DoubleGauss { sigma, .. } if !(sigma > 0.0) => {
                bad("momentum width must be positive")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DistributionModel {
    Analytic { plus: Vec<ProfileTerm>, minus: Vec<ProfileTerm> },
    Table(TabulatedProfile),
}

/// mu_plus, mu_minus and the problem constants.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumProfile {
    pub model: DistributionModel,
    pub period: f64,
    pub alpha: f64,
    pub c_weight: f64,
    pub v_max: f64,
    /// Constant background density in -phi'' = n0 + rho (signed).
    pub n0: f64,
}

impl EquilibriumProfile {
    pub fn new(
        model: DistributionModel,
        period: f64,
        alpha: f64,
        c_weight: f64,
        v_max: f64,
        n0: f64,
    ) -> Result<Self, EquilibriumError> {
        let bad = |what: String| Err(EquilibriumError::InvalidProfile(what));
        if !(period.is_finite() && period > 0.0) {
            return bad(format!("period must be positive, got {period}"));
        }
        if !(alpha > 2.0) {
            return bad(format!("weight exponent alpha must exceed 2, got {alpha}"));
        }
        if !(c_weight > 0.0) {
            return bad(format!("weight scale must be positive, got {c_weight}"));
        }
        if !(v_max.is_finite() && v_max > 0.0) {
            return bad(format!("v_max must be positive, got {v_max}"));
        }
        if !n0.is_finite() {
            return bad("n0 must be finite".into());
        }
        if let DistributionModel::Analytic { plus, minus } = &model {
            for t in plus.iter().chain(minus) {
                t.validate()?;
            }
        }
        Ok(Self { model, period, alpha, c_weight, v_max, n0 })
    }

    #[inline]
    pub fn eval(&self, species: Species, e: f64, p: f64) -> Density {
        match &self.model {
            DistributionModel::Analytic { plus, minus } => {
                let terms = match species {
                    Species::Plus => plus,
                    Species::Minus => minus,
                };
                let mut d = Density::default();
                for t in terms {
                    d += t.eval(e, p);
                }
                d
            }
            DistributionModel::Table(t) => t.eval(species, e, p),
        }
    }

    /// Weight c (1 + |e|)^(-alpha) of the L^2 spaces.
    #[inline]
    pub fn weight(&self, e: f64) -> f64 {
        self.c_weight * (1.0 + e.abs()).powf(-self.alpha)
    }

    /// Checks mu >= 0 and |mu_e| + |mu_p| <= weight(e) at one point.
    pub fn check_point(&self, species: Species, e: f64, p: f64) -> Result<(), EquilibriumError> {
        let d = self.eval(species, e, p);
        if d.mu < -1e-14 {
            return Err(EquilibriumError::InvalidProfile(format!(
                "negative density {:.3e} at e={e:.4}, p={p:.4}",
                d.mu
            )));
        }
        let value = d.mu_e.abs() + d.mu_p.abs();
        let bound = self.weight(e);
        if value > bound {
            return Err(EquilibriumError::WeightBound { e, p, value, bound });
        }
        Ok(())
    }

    pub fn is_analytic(&self) -> bool {
        matches!(self.model, DistributionModel::Analytic { .. })
    }
}
