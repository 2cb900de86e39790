use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use vmstab_equilibrium::{lorentz, EquilibriumProfile, Species, VelocityGrid};

/// Electrostatic dispersion function of a homogeneous profile in zero fields,
///
///   k^2 - sum_s int mu_e k^2 v1hat^2 / (lambda^2 + k^2 v1hat^2) dv,
///
/// the real part of k^2 - sum_s int mu_e (1 - lambda / (lambda + i k v1hat)).
/// At lambda = 0 nodes with v1hat = 0 drop out.
pub fn dispersion_oracle(
    profile: &EquilibriumProfile,
    vgrid: &VelocityGrid,
    period: f64,
    mode: usize,
    lambda: f64,
) -> f64 {
    let k = 2.0 * PI * mode as f64 / period;
    let mut sum = 0.0;
    for s in Species::BOTH {
        for j in 0..vgrid.len() {
            let (v1, v2) = vgrid.velocity(j);
            let g = lorentz(v1, v2);
            let kv = k * v1 / g;
            let den = lambda * lambda + kv * kv;
            if den == 0.0 {
                continue;
            }
            sum += vgrid.weight(j) * profile.eval(s, g, v2).mu_e * kv * kv / den;
        }
    }
    k * k - sum
}

/// Sign changes of the dispersion function on `samples` geometric points in
/// [lo, hi], each refined by bisection.
pub fn dispersion_roots(
    profile: &EquilibriumProfile,
    vgrid: &VelocityGrid,
    period: f64,
    mode: usize,
    (lo, hi): (f64, f64),
    samples: usize,
) -> Vec<f64> {
    let f = |l: f64| dispersion_oracle(profile, vgrid, period, mode, l);
    let r = (hi / lo).ln() / (samples - 1) as f64;
    let pts: Vec<f64> = (0..samples).map(|i| lo * (r * i as f64).exp()).collect();
    let vals: Vec<f64> = pts.iter().map(|&l| f(l)).collect();
    let mut roots = vec![];
    for i in 0..samples - 1 {
        if vals[i].signum() == vals[i + 1].signum() {
            continue;
        }
        let (mut a, mut b, fa) = (pts[i], pts[i + 1], vals[i]);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if f(m).signum() == fa.signum() {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionRoot {
    pub mode: usize,
    pub lambda: f64,
}

/// Largest root over modes 1..=max_mode.
pub fn dominant_dispersion_root(
    profile: &EquilibriumProfile,
    vgrid: &VelocityGrid,
    period: f64,
    max_mode: usize,
    range: (f64, f64),
) -> Option<DispersionRoot> {
    (1..=max_mode)
        .flat_map(|m| {
            dispersion_roots(profile, vgrid, period, m, range, 400)
                .into_iter()
                .map(move |lambda| DispersionRoot { mode: m, lambda })
        })
        .max_by(|a, b| a.lambda.total_cmp(&b.lambda))
}
