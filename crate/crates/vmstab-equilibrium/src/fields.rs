use crate::trig::{spectral_derivative, uniform_nodes, TrigSeries};
use crate::EquilibriumError;

/// Equilibrium potentials and fields on the uniform periodic grid, with
/// trigonometric interpolants for evaluation off the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumFields {
    pub period: f64,
    pub grid_x: Vec<f64>,
    pub phi0: Vec<f64>,
    pub psi0: Vec<f64>,
    pub e1_0: Vec<f64>,
    pub b0: Vec<f64>,
    phi_series: TrigSeries,
    psi_series: TrigSeries,
    e1_series: TrigSeries,
    b0_series: TrigSeries,
}

impl EquilibriumFields {
    /// Builds fields from potentials sampled on `n` uniform nodes;
    /// E1 = -phi', B = psi' by spectral differentiation.
    pub fn from_potentials(period: f64, phi0: Vec<f64>, psi0: Vec<f64>) -> Result<Self, EquilibriumError> {
        let n = phi0.len();
        if n < 4 || psi0.len() != n {
            return Err(EquilibriumError::InvalidGrid(format!(
                "potentials need equal lengths >= 4 (got {} and {})",
                n,
                psi0.len()
            )));
        }
        let e1_0: Vec<f64> = spectral_derivative(&phi0, period, 1).into_iter().map(|v| -v).collect();
        let b0 = spectral_derivative(&psi0, period, 1);
        Ok(Self {
            period,
            grid_x: uniform_nodes(n, period),
            phi_series: TrigSeries::from_samples(&phi0, period),
            psi_series: TrigSeries::from_samples(&psi0, period),
            e1_series: TrigSeries::from_samples(&e1_0, period),
            b0_series: TrigSeries::from_samples(&b0, period),
            phi0,
            psi0,
            e1_0,
            b0,
        })
    }

    pub fn zero(period: f64, nx: usize) -> Result<Self, EquilibriumError> {
        Self::from_potentials(period, vec![0.0; nx], vec![0.0; nx])
    }

    pub fn nx(&self) -> usize {
        self.grid_x.len()
    }

    /// True when both potentials vanish identically (free streaming).
    pub fn is_zero(&self) -> bool {
        self.phi0.iter().chain(&self.psi0).all(|v| *v == 0.0)
    }

    #[inline]
    pub fn phi(&self, x: f64) -> f64 {
        self.phi_series.eval(x)
    }

    #[inline]
    pub fn psi(&self, x: f64) -> f64 {
        self.psi_series.eval(x)
    }

    /// (E1, B) at x.
    #[inline]
    pub fn e1_b(&self, x: f64) -> (f64, f64) {
        (self.e1_series.eval(x), self.b0_series.eval(x))
    }

    pub fn phi_series(&self) -> &TrigSeries {
        &self.phi_series
    }

    pub fn psi_series(&self) -> &TrigSeries {
        &self.psi_series
    }

    /// Max over the grid of |E1 + phi'| and |B - psi'| computed from the
    /// interpolants, plus |mean E1| and |mean B|.
    pub fn consistency_defect(&self) -> f64 {
        let mut worst = self.e1_series.mean().abs().max(self.b0_series.mean().abs());
        for &x in &self.grid_x {
            let (_, dphi) = self.phi_series.eval_with_derivative(x);
            let (_, dpsi) = self.psi_series.eval_with_derivative(x);
            let (e, b) = self.e1_b(x);
            worst = worst.max((e + dphi).abs()).max((b - dpsi).abs());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn fields_from_potentials() {
        let p = 4.0;
        let n = 32;
        let w = 2.0 * PI / p;
        let xs = uniform_nodes(n, p);
        let phi: Vec<f64> = xs.iter().map(|x| 0.2 * (w * x).cos()).collect();
        let psi: Vec<f64> = xs.iter().map(|x| 0.5 * (2.0 * w * x).sin()).collect();
        let f = EquilibriumFields::from_potentials(p, phi, psi).unwrap();
        for x in [0.1, 1.3, 3.9, 7.7] {
            let (e, b) = f.e1_b(x);
            assert_relative_eq!(e, 0.2 * w * (w * x).sin(), epsilon = 1e-12);
            assert_relative_eq!(b, w * (2.0 * w * x).cos(), epsilon = 1e-12);
        }
        assert!(f.consistency_defect() < 1e-12);
        assert!(!f.is_zero());
        assert!(EquilibriumFields::zero(p, 8).unwrap().is_zero());
    }
}
