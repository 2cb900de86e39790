//! Damped Picard solve of the periodic field equations
//! -phi'' = n0 + rho(phi, psi), psi'' = -j2(phi, psi).

use serde::{Deserialize, Serialize};

use crate::fields::EquilibriumFields;
use crate::profile::EquilibriumProfile;
use crate::quadrature::{lorentz, VelocityGrid};
use crate::trig::{periodic_poisson, screened_poisson, spectral_derivative};
use crate::{EquilibriumError, Species};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub damping: f64,
    pub max_iter: usize,
    pub neutrality_tol: f64,
    pub phi_guess: Option<Vec<f64>>,
    pub psi_guess: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-10, damping: 0.5, max_iter: 2000, neutrality_tol: 1e-8, phi_guess: None, psi_guess: None }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// sup |-phi'' - n0 - rho|
    pub poisson: f64,
    /// sup |psi'' + j2|
    pub ampere: f64,
    /// mean(n0 + rho)
    pub charge_defect: f64,
    /// mean(j2)
    pub current_defect: f64,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.poisson.max(self.ampere)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: ResidualReport,
}

/// Charge density rho = int (f+ - f-) dv and current j2 = int v2hat (f+ - f-) dv
/// at each grid node for the given potentials.
pub fn moments(profile: &EquilibriumProfile, vgrid: &VelocityGrid, phi: &[f64], psi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut rho = vec![0.0; phi.len()];
    let mut j2 = vec![0.0; phi.len()];
    for i in 0..phi.len() {
        let (mut r, mut j) = (0.0, 0.0);
        for s in Species::BOTH {
            let sg = s.sign();
            let (mut rs, mut js) = (0.0, 0.0);
            for k in 0..vgrid.len() {
                let (v1, v2) = vgrid.velocity(k);
                let g = lorentz(v1, v2);
                let mu = profile.eval(s, g + sg * phi[i], v2 + sg * psi[i]).mu;
                let w = vgrid.weight(k) * mu;
                rs += w;
                js += w * v2 / g;
            }
            r += sg * rs;
            j += sg * js;
        }
        rho[i] = r;
        j2[i] = j;
    }
    (rho, j2)
}

fn residual_from(
    profile: &EquilibriumProfile,
    period: f64,
    phi: &[f64],
    psi: &[f64],
    rho: &[f64],
    j2: &[f64],
) -> ResidualReport {
    let d2phi = spectral_derivative(phi, period, 2);
    let d2psi = spectral_derivative(psi, period, 2);
    let n = phi.len() as f64;
    let mut rep = ResidualReport::default();
    for i in 0..phi.len() {
        rep.poisson = rep.poisson.max((-d2phi[i] - profile.n0 - rho[i]).abs());
        rep.ampere = rep.ampere.max((d2psi[i] + j2[i]).abs());
        rep.charge_defect += (profile.n0 + rho[i]) / n;
        rep.current_defect += j2[i] / n;
    }
    rep
}

pub fn equilibrium_residual(
    fields: &EquilibriumFields,
    profile: &EquilibriumProfile,
    vgrid: &VelocityGrid,
) -> ResidualReport {
    let (rho, j2) = moments(profile, vgrid, &fields.phi0, &fields.psi0);
    residual_from(profile, fields.period, &fields.phi0, &fields.psi0, &rho, &j2)
}

/// Largest local values of -d rho / d phi and -d j2 / d psi over the grid,
/// clamped at zero.
fn screening(profile: &EquilibriumProfile, vgrid: &VelocityGrid, phi: &[f64], psi: &[f64]) -> (f64, f64) {
    let (mut ka, mut kb) = (0.0f64, 0.0f64);
    for i in 0..phi.len() {
        let (mut a, mut b) = (0.0, 0.0);
        for s in Species::BOTH {
            let sg = s.sign();
            for k in 0..vgrid.len() {
                let (v1, v2) = vgrid.velocity(k);
                let g = lorentz(v1, v2);
                let dn = profile.eval(s, g + sg * phi[i], v2 + sg * psi[i]);
                a += vgrid.weight(k) * dn.mu_e;
                b += vgrid.weight(k) * dn.mu_p * v2 / g;
            }
        }
        ka = ka.max(-a);
        kb = kb.max(-b);
    }
    (ka, kb)
}

/// Mean-free solution of -u'' + kappa u = rhs + kappa u_old.
fn shifted_poisson(rhs: &[f64], old: &[f64], kappa: f64, period: f64) -> Vec<f64> {
    if kappa == 0.0 {
        return periodic_poisson(rhs, period).0;
    }
    let n = rhs.len();
    let combined: Vec<f64> = rhs.iter().zip(old).map(|(r, u)| r + kappa * u).collect();
    let m = combined.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = combined.iter().map(|v| v - m).collect();
    screened_poisson(&centered, kappa, period)
}

fn mean_free(mut v: Vec<f64>) -> Vec<f64> {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
    v
}

pub fn solve_equilibrium(
    profile: &EquilibriumProfile,
    nx: usize,
    vgrid: &VelocityGrid,
    opts: &SolveOptions,
) -> Result<(EquilibriumFields, SolveReport), EquilibriumError> {
    if nx < 4 {
        return Err(EquilibriumError::InvalidGrid(format!("need at least 4 x nodes, got {nx}")));
    }
    let guess = |g: &Option<Vec<f64>>| -> Result<Vec<f64>, EquilibriumError> {
        match g {
            Some(v) if v.len() != nx => Err(EquilibriumError::InvalidGrid(format!(
                "initial guess has {} nodes, grid has {nx}",
                v.len()
            ))),
            Some(v) => Ok(mean_free(v.clone())),
            None => Ok(vec![0.0; nx]),
        }
    };
    let mut phi = guess(&opts.phi_guess)?;
    let mut psi = guess(&opts.psi_guess)?;
    let period = profile.period;
    let d = opts.damping;
    // -u'' + kappa u = rhs(u) + kappa u has the same fixed point; taking
    // kappa above the local shielding keeps the iteration contractive
    let mut residual = ResidualReport::default();
    for it in 0..=opts.max_iter {
        let (rho, j2) = moments(profile, vgrid, &phi, &psi);
        residual = residual_from(profile, period, &phi, &psi, &rho, &j2);
        let defect = residual.charge_defect.abs().max(residual.current_defect.abs());
        // the mean part of the residual cannot be removed by iterating
        let reducible = (residual.max() - defect).max(0.0);
        if reducible <= opts.tol {
            if defect > opts.neutrality_tol {
                return Err(EquilibriumError::NeutralityViolation {
                    charge: residual.charge_defect,
                    current: residual.current_defect,
                    tol: opts.neutrality_tol,
                });
            }
            let fields = EquilibriumFields::from_potentials(period, phi, psi)?;
            return Ok((fields, SolveReport { iterations: it, residual }));
        }
        let (kappa_phi, kappa_psi) = screening(profile, vgrid, &phi, &psi);
        let rhs: Vec<f64> = rho.iter().map(|r| profile.n0 + r).collect();
        let phi_new = shifted_poisson(&rhs, &phi, kappa_phi, period);
        let psi_new = shifted_poisson(&j2, &psi, kappa_psi, period);
        for i in 0..nx {
            phi[i] = (1.0 - d) * phi[i] + d * phi_new[i];
            psi[i] = (1.0 - d) * psi[i] + d * psi_new[i];
        }
    }
    Err(EquilibriumError::NonConvergence { iterations: opts.max_iter, residual: residual.max() })
}

/// Local coefficients of the operators: sums over species of the velocity
/// integrals of mu_e, mu_p and v2hat mu_p at each grid node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFields {
    pub mu_e: Vec<f64>,
    pub mu_p: Vec<f64>,
    pub v2_mu_p: Vec<f64>,
    /// Share of |mu| + |mu_e| + |mu_p| mass on the outer velocity shell.
    pub tail_fraction: f64,
}

pub fn eval_coefficient_fields(
    profile: &EquilibriumProfile,
    fields: &EquilibriumFields,
    vgrid: &VelocityGrid,
    tail_tol: f64,
) -> Result<CoefficientFields, EquilibriumError> {
    let nx = fields.nx();
    let mut out = CoefficientFields { mu_e: vec![0.0; nx], mu_p: vec![0.0; nx], v2_mu_p: vec![0.0; nx], tail_fraction: 0.0 };
    let (mut shell, mut total) = (0.0, 0.0);
    for i in 0..nx {
        for s in Species::BOTH {
            let sg = s.sign();
            for k in 0..vgrid.len() {
                let (v1, v2) = vgrid.velocity(k);
                let g = lorentz(v1, v2);
                let d = profile.eval(s, g + sg * fields.phi0[i], v2 + sg * fields.psi0[i]);
                let w = vgrid.weight(k);
                out.mu_e[i] += w * d.mu_e;
                out.mu_p[i] += w * d.mu_p;
                out.v2_mu_p[i] += w * d.mu_p * v2 / g;
                let mass = w * (d.mu.abs() + d.mu_e.abs() + d.mu_p.abs());
                total += mass;
                if vgrid.is_shell(k) {
                    shell += mass;
                }
            }
        }
    }
    out.tail_fraction = if total > 0.0 { shell / total } else { 0.0 };
    if out.tail_fraction > tail_tol {
        return Err(EquilibriumError::TailTooLarge { fraction: out.tail_fraction, tol: tail_tol });
    }
    Ok(out)
}
