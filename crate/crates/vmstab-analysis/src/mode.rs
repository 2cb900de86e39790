use serde::{Deserialize, Serialize};
use vmstab_equilibrium::trig::TrigSeries;
use vmstab_equilibrium::{lorentz, Species};
use vmstab_kinetic::{apply_d, apply_q_lambda, weighted_norm, PhaseFunction};
use vmstab_operators::{OperatorContext, SpectralBasis};

use crate::AnalysisError;

/// A purely growing solution e^{lambda t} (f, E, B) rebuilt from a kernel
/// vector (phi, psi, b) on full-basis coefficients.
#[derive(Clone, Debug, Serialize)]
pub struct GrowingMode {
    pub lambda0: f64,
    pub period: f64,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub b: f64,
    pub x: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
    pub b_field: Vec<f64>,
    #[serde(skip)]
    pub f: [PhaseFunction; 2],
}

impl GrowingMode {
    pub fn basis(&self) -> SpectralBasis {
        SpectralBasis::new(self.period, (self.phi.len() - 1) / 2, false)
    }

    pub fn f_plus(&self) -> &PhaseFunction {
        &self.f[Species::Plus.index()]
    }

    pub fn f_minus(&self) -> &PhaseFunction {
        &self.f[Species::Minus.index()]
    }
}

/// f = s (mu_e phi + mu_p psi + mu_e Q^lambda(-phi + v2hat psi + b v1hat)),
/// E1 = -phi' - lambda b, E2 = -lambda psi, B = psi'.
pub fn reconstruct_mode(
    lambda0: f64,
    phi: &[f64],
    psi: &[f64],
    b: f64,
    ctx: &OperatorContext,
) -> Result<GrowingMode, AnalysisError> {
    if !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(AnalysisError::InvalidInterval(format!("rate {lambda0}")));
    }
    let grid = &ctx.grid;
    let period = ctx.period();
    let basis = SpectralBasis::new(period, (phi.len() - 1) / 2, false);
    let x = grid.x.clone();
    let phi_x: Vec<f64> = x.iter().map(|&xi| basis.synthesize(phi, xi)).collect();
    let psi_x: Vec<f64> = x.iter().map(|&xi| basis.synthesize(psi, xi)).collect();
    let phi_s = TrigSeries::from_samples(&phi_x, period);
    let psi_s = TrigSeries::from_samples(&psi_x, period);
    let source = |xx: f64, v1h: f64, v2h: f64| -phi_s.eval(xx) + v2h * psi_s.eval(xx) + b * v1h;

    let nv2 = grid.vgrid.len();
    let f = Species::BOTH.map(|s| -> Result<PhaseFunction, AnalysisError> {
        let q = apply_q_lambda(grid, &ctx.caches[s.index()], lambda0, &source)?;
        let values = (0..grid.len())
            .map(|n| {
                let i = n / nv2;
                let d = ctx.density(s, n);
                s.sign() * (d.mu_e * phi_x[i] + d.mu_p * psi_x[i] + d.mu_e * q.values[n])
            })
            .collect();
        Ok(PhaseFunction::from_values(grid, s, values)?)
    });
    let [f0, f1] = f;
    let f = [f0?, f1?];

    let e1 = x.iter().map(|&xi| -basis.synthesize_derivative(phi, xi) - lambda0 * b).collect();
    let e2 = psi_x.iter().map(|p| -lambda0 * p).collect();
    let b_field = x.iter().map(|&xi| basis.synthesize_derivative(psi, xi)).collect();
    Ok(GrowingMode { lambda0, period, phi: phi.to_vec(), psi: psi.to_vec(), b, x, e1, e2, b_field, f })
}

/// Residuals of the field equations in discrete L^2 over the x nodes, each
/// divided by the largest |lhs| + |rhs| among the three (an equation whose
/// two sides both vanish, e.g. the transverse one for an electrostatic mode,
/// has no scale of its own). The linearized Vlasov residual is relative per
/// species in the weighted L^2 norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeResidual {
    /// lambda E1 = -j1.
    pub ampere_longitudinal: f64,
    /// -lambda^2 psi + psi'' = -j2.
    pub ampere_transverse: f64,
    /// -phi'' = rho.
    pub gauss: f64,
    /// The common denominator.
    pub field_scale: f64,
    pub vlasov: [f64; 2],
}

impl ModeResidual {
    pub fn max_field(&self) -> f64 {
        self.ampere_longitudinal.max(self.ampere_transverse).max(self.gauss)
    }
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// (|lhs - rhs|, |lhs| + |rhs|).
fn defect(lhs: &[f64], rhs: &[f64]) -> (f64, f64) {
    let diff: Vec<f64> = lhs.iter().zip(rhs).map(|(a, b)| a - b).collect();
    (l2(&diff), l2(lhs) + l2(rhs))
}

pub fn mode_residual(mode: &GrowingMode, ctx: &OperatorContext) -> Result<ModeResidual, AnalysisError> {
    let grid = &ctx.grid;
    let vg = &grid.vgrid;
    let nv2 = vg.len();
    let nx = grid.nx();
    let lambda = mode.lambda0;
    let basis = mode.basis();

    let (mut rho, mut j1, mut j2) = (vec![0.0; nx], vec![0.0; nx], vec![0.0; nx]);
    for s in Species::BOTH {
        let f = &mode.f[s.index()];
        for i in 0..nx {
            for j in 0..nv2 {
                let (v1, v2) = vg.velocity(j);
                let g = lorentz(v1, v2);
                let w = s.sign() * vg.weight(j) * f.values[i * nv2 + j];
                rho[i] += w;
                j1[i] += w * v1 / g;
                j2[i] += w * v2 / g;
            }
        }
    }

    let curvature = |c: &[f64]| -> Vec<f64> {
        let scaled: Vec<f64> = c.iter().enumerate().map(|(k, v)| -basis.laplacian_eigenvalue(k) * v).collect();
        mode.x.iter().map(|&x| basis.synthesize(&scaled, x)).collect()
    };
    let phi_xx = curvature(&mode.phi);
    let psi_xx = curvature(&mode.psi);
    let psi_x: Vec<f64> = mode.x.iter().map(|&x| basis.synthesize(&mode.psi, x)).collect();

    let lam_e1: Vec<f64> = mode.e1.iter().map(|e| lambda * e).collect();
    let minus_j1: Vec<f64> = j1.iter().map(|v| -v).collect();
    let wave: Vec<f64> = psi_x.iter().zip(&psi_xx).map(|(p, pxx)| -lambda * lambda * p + pxx).collect();
    let minus_j2: Vec<f64> = j2.iter().map(|v| -v).collect();
    let minus_phi_xx: Vec<f64> = phi_xx.iter().map(|v| -v).collect();

    let phi_d: Vec<f64> = mode.x.iter().map(|&x| basis.synthesize_derivative(&mode.phi, x)).collect();
    let mut vlasov = [0.0; 2];
    for s in Species::BOTH {
        let f = &mode.f[s.index()];
        let df = apply_d(grid, &ctx.fields, f);
        let lhs_v: Vec<f64> = f.values.iter().zip(&df.values).map(|(a, d)| lambda * a + d).collect();
        let rhs_v: Vec<f64> = (0..grid.len())
            .map(|n| {
                let i = n / nv2;
                let (v1, v2) = vg.velocity(n % nv2);
                let g = lorentz(v1, v2);
                let (v1h, v2h) = (v1 / g, v2 / g);
                let d = ctx.density(s, n);
                s.sign()
                    * (d.mu_e * v1h * (phi_d[i] + lambda * mode.b)
                        + d.mu_p * v1h * mode.b_field[i]
                        + lambda * (d.mu_e * v2h + d.mu_p) * psi_x[i])
            })
            .collect();
        let to_fn = |v: Vec<f64>| PhaseFunction::from_values(grid, s, v);
        let diff: Vec<f64> = lhs_v.iter().zip(&rhs_v).map(|(a, b)| a - b).collect();
        let num = weighted_norm(grid, &to_fn(diff)?)?;
        let den = weighted_norm(grid, &to_fn(lhs_v)?)? + weighted_norm(grid, &to_fn(rhs_v)?)?;
        vlasov[s.index()] = if den == 0.0 { 0.0 } else { num / den };
    }

    let eqs = [defect(&lam_e1, &minus_j1), defect(&wave, &minus_j2), defect(&minus_phi_xx, &rho)];
    let scale = eqs.iter().fold(0.0f64, |m, e| m.max(e.1));
    let rel = |k: usize| if scale == 0.0 { 0.0 } else { eqs[k].0 / scale };
    Ok(ModeResidual {
        ampere_longitudinal: rel(0),
        ampere_transverse: rel(1),
        gauss: rel(2),
        field_scale: scale,
        vlasov,
    })
}
