use vmstab_equilibrium::trig::spectral_derivative;
use vmstab_equilibrium::{lorentz, EquilibriumFields};

use crate::grid::{PhaseFunction, PhaseGrid};
use crate::interp::BarycentricRule;

/// D k = v1hat dk/dx + s (E1 + v2hat B) dk/dv1 - s v1hat B dk/dv2, with s the
/// species sign: spectral in x, Gauss-Legendre collocation in v.
pub fn apply_d(grid: &PhaseGrid, fields: &EquilibriumFields, k: &PhaseFunction) -> PhaseFunction {
    let vg = &grid.vgrid;
    let (nx, nv, nv2) = (grid.nx(), vg.n(), vg.len());
    let sign = k.species.sign();
    let dv = BarycentricRule::gauss_legendre(&vg.nodes, &vg.weights, vg.v_max).derivative_matrix();

    let mut dx = vec![0.0; grid.len()];
    for j in 0..nv2 {
        let col: Vec<f64> = (0..nx).map(|i| k.values[i * nv2 + j]).collect();
        for (i, d) in spectral_derivative(&col, grid.period, 1)
            .into_iter()
            .enumerate()
        {
            dx[i * nv2 + j] = d;
        }
    }

    let mut out = vec![0.0; grid.len()];
    for i in 0..nx {
        let (e1, b) = (fields.e1_0[i], fields.b0[i]);
        let base = i * nv2;
        for j1 in 0..nv {
            for j2 in 0..nv {
                let j = j1 * nv + j2;
                let (v1, v2) = vg.velocity(j);
                let g = lorentz(v1, v2);
                let (mut d1, mut d2) = (0.0, 0.0);
                for m in 0..nv {
                    d1 += dv[j1 * nv + m] * k.values[base + m * nv + j2];
                    d2 += dv[j2 * nv + m] * k.values[base + j1 * nv + m];
                }
                out[base + j] =
                    v1 / g * dx[base + j] + sign * (e1 + v2 / g * b) * d1 - sign * v1 / g * b * d2;
            }
        }
    }
    k.with_values(out)
}
