//! Polynomial interpolation and differentiation on Gauss-Legendre nodes,
//! and the tensor (trigonometric in x, polynomial in v) interpolant of
//! phase functions.

use std::f64::consts::PI;

use vmstab_equilibrium::trig::TrigSeries;

use crate::grid::{PhaseFunction, PhaseGrid};

/// Barycentric form of the interpolating polynomial through fixed nodes.
#[derive(Clone, Debug)]
pub struct BarycentricRule {
    pub nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl BarycentricRule {
    /// For Gauss-Legendre nodes on [-L, L] with weights q_k the barycentric
    /// weights are (-1)^k sqrt((1 - t_k^2) q_k), t_k = x_k / L.
    pub fn gauss_legendre(nodes: &[f64], weights: &[f64], half_width: f64) -> Self {
        let bary = nodes
            .iter()
            .zip(weights)
            .enumerate()
            .map(|(k, (&x, &w))| {
                let t = x / half_width;
                let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                s * ((1.0 - t * t) * w / half_width).sqrt()
            })
            .collect();
        Self {
            nodes: nodes.to_vec(),
            bary,
        }
    }

    /// Lagrange basis values l_k(x).
    pub fn basis(&self, x: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let mut out = vec![0.0; n];
        for k in 0..n {
            if x == self.nodes[k] {
                out[k] = 1.0;
                return out;
            }
        }
        let mut total = 0.0;
        for k in 0..n {
            out[k] = self.bary[k] / (x - self.nodes[k]);
            total += out[k];
        }
        out.iter_mut().for_each(|v| *v /= total);
        out
    }

    /// Differentiation matrix D[j][k] = l_k'(x_j), row-major.
    pub fn derivative_matrix(&self) -> Vec<f64> {
        let n = self.nodes.len();
        let mut d = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = 0.0;
            for k in 0..n {
                if k != j {
                    let v = self.bary[k] / self.bary[j] / (self.nodes[j] - self.nodes[k]);
                    d[j * n + k] = v;
                    diag -= v;
                }
            }
            d[j * n + j] = diag;
        }
        d
    }
}

/// Evaluates a phase function off the grid. Cost per evaluation is
/// O(N_x N_v^2); meant for checks on small grids.
pub struct PhaseInterpolant {
    period: f64,
    rule: BarycentricRule,
    nv: usize,
    /// x-series coefficients per velocity node.
    series: Vec<TrigSeries>,
}

impl PhaseInterpolant {
    pub fn new(grid: &PhaseGrid, f: &PhaseFunction) -> Self {
        let vg = &grid.vgrid;
        let (nx, nv2) = (grid.nx(), vg.len());
        let series = (0..nv2)
            .map(|j| {
                let col: Vec<f64> = (0..nx).map(|i| f.values[i * nv2 + j]).collect();
                TrigSeries::from_samples(&col, grid.period)
            })
            .collect();
        Self {
            period: grid.period,
            rule: BarycentricRule::gauss_legendre(&vg.nodes, &vg.weights, vg.v_max),
            nv: vg.n(),
            series,
        }
    }

    pub fn eval(&self, x: f64, v1: f64, v2: f64) -> f64 {
        let l1 = self.rule.basis(v1);
        let l2 = self.rule.basis(v2);
        let kmax = self.series.iter().map(|s| s.a.len()).max().unwrap_or(1);
        let w = 2.0 * PI / self.period;
        let trig: Vec<(f64, f64)> = (0..kmax).map(|k| (k as f64 * w * x).sin_cos()).collect();
        let mut total = 0.0;
        for j1 in 0..self.nv {
            if l1[j1] == 0.0 {
                continue;
            }
            let mut row = 0.0;
            for j2 in 0..self.nv {
                if l2[j2] == 0.0 {
                    continue;
                }
                let s = &self.series[j1 * self.nv + j2];
                let mut v = s.a[0];
                for k in 1..s.a.len() {
                    v += s.a[k] * trig[k].1 + s.b[k] * trig[k].0;
                }
                row += l2[j2] * v;
            }
            total += l1[j1] * row;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use vmstab_equilibrium::gauss_legendre;

    fn rule(n: usize, l: f64) -> BarycentricRule {
        let (t, w) = gauss_legendre(n);
        let x: Vec<f64> = t.iter().map(|v| v * l).collect();
        let w: Vec<f64> = w.iter().map(|v| v * l).collect();
        BarycentricRule::gauss_legendre(&x, &w, l)
    }

    #[test]
    fn reproduces_polynomials() {
        let r = rule(9, 2.5);
        let p = |x: f64| 1.0 - 2.0 * x + 0.5 * x.powi(3) - 0.01 * x.powi(8);
        let dp = |x: f64| -2.0 + 1.5 * x * x - 0.08 * x.powi(7);
        for x in [-2.4, -0.3, 0.0, 1.7, 3.0] {
            let l = r.basis(x);
            let v: f64 = l.iter().zip(&r.nodes).map(|(a, &xk)| a * p(xk)).sum();
            assert_relative_eq!(v, p(x), epsilon = 1e-10);
        }
        let d = r.derivative_matrix();
        for j in 0..9 {
            let v: f64 = (0..9).map(|k| d[j * 9 + k] * p(r.nodes[k])).sum();
            assert_relative_eq!(v, dp(r.nodes[j]), epsilon = 1e-9);
        }
    }
}
