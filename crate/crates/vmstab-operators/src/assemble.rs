use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vmstab_equilibrium::{lorentz, Species};
use vmstab_inertia::{DMatrix, DVector};
use vmstab_kinetic::{orbit_weights, KineticError, ProjectionOptions, ProjectionReport};

use crate::basis::SpectralBasis;
use crate::context::OperatorContext;
use crate::OperatorError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssemblyOptions {
    /// Largest accepted Frobenius asymmetry of A1, A2 and of B against the
    /// adjoint formula, before symmetrization, relative to the largest of
    /// the block norms.
    pub asym_tol: f64,
    /// Cross-check of the lambda = 0 projection.
    pub projection: ProjectionOptions,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { asym_tol: 5e-2, projection: ProjectionOptions::default() }
    }
}

/// Blocks as assembled, full basis in both slots, before symmetrization.
/// `b` comes from the B formula (rows: phi slot), `b_adjoint` from the
/// formula for B* (rows: psi slot).
#[derive(Clone, Debug)]
pub struct RawOperators {
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub b_adjoint: DMatrix<f64>,
    pub c: DVector<f64>,
    pub d: DVector<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Asymmetry {
    pub a1: f64,
    pub a2: f64,
    pub b: f64,
}

/// Operators at one rate. `a1`, `b` (rows) and `c` live on the mean-zero
/// basis, `a2`, `b` (columns) and `d` on the full basis.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub lambda: f64,
    pub period: f64,
    pub modes: usize,
    pub a1: DMatrix<f64>,
    pub a2: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DVector<f64>,
    pub d: DVector<f64>,
    pub l: f64,
    pub raw: RawOperators,
    pub asymmetry: Asymmetry,
    /// Present at lambda = 0: worst relative disagreement between the orbit
    /// average and Q^lambda_proj over all basis inputs.
    pub projection: Option<ProjectionReport>,
}

impl OperatorSet {
    pub fn phi_basis(&self) -> SpectralBasis {
        SpectralBasis::new(self.period, self.modes, true)
    }

    pub fn psi_basis(&self) -> SpectralBasis {
        SpectralBasis::new(self.period, self.modes, false)
    }
}

/// Velocity moments at one x node of the orbit averages of every basis
/// input: Q h_k, Q (v2hat h_k), Q v1hat.
struct Moments {
    a1: Vec<f64>,
    b_adj: Vec<f64>,
    b: Vec<f64>,
    a2: Vec<f64>,
    c: f64,
    d: f64,
    l: f64,
    /// Per species: squared weighted differences and squared norms of the
    /// inputs, for h_k, v2hat h_k (2F entries) and v1hat (last entry).
    check: [(Vec<f64>, Vec<f64>); 2],
}

fn node_moments(ctx: &OperatorContext, basis: &SpectralBasis, i: usize, lambda: f64, lambda_proj: Option<f64>) -> Moments {
    let f = basis.dim();
    let grid = &ctx.grid;
    let nv2 = grid.vgrid.len();
    let mut m = Moments {
        a1: vec![0.0; f],
        b_adj: vec![0.0; f],
        b: vec![0.0; f],
        a2: vec![0.0; f],
        c: 0.0,
        d: 0.0,
        l: 0.0,
        check: Default::default(),
    };
    let mut row = vec![0.0; f];
    let mut qh = vec![0.0; f];
    let mut qv2h = vec![0.0; f];
    let mut ph = vec![0.0; f];
    let mut pv2h = vec![0.0; f];
    for s in Species::BOTH {
        let cache = &ctx.caches[s.index()];
        let (dsq, scale) = &mut m.check[s.index()];
        if lambda_proj.is_some() {
            *dsq = vec![0.0; 2 * f + 1];
            *scale = vec![0.0; 2 * f + 1];
        }
        for j in 0..nv2 {
            let n = i * nv2 + j;
            let Some(orbit) = cache.orbit(n) else { continue };
            let (v1, v2) = grid.vgrid.velocity(j);
            let g = lorentz(v1, v2);
            let (v1h, v2h) = (v1 / g, v2 / g);
            let mu_e = ctx.density(s, n).mu_e;
            let wv = grid.vgrid.weight(j) * mu_e;

            let w = orbit_weights(&orbit, lambda);
            let wp = lambda_proj.map(|lp| orbit_weights(&orbit, lp));
            qh.fill(0.0);
            qv2h.fill(0.0);
            ph.fill(0.0);
            pv2h.fill(0.0);
            let (mut qv1, mut pv1) = (0.0, 0.0);
            for q in 0..orbit.len() {
                basis.eval_full(orbit.x[q], &mut row);
                let (a, b) = (w[q], w[q] * orbit.v2hat[q]);
                for k in 0..f {
                    qh[k] += a * row[k];
                    qv2h[k] += b * row[k];
                }
                qv1 += w[q] * orbit.v1hat[q];
                if let Some(wp) = &wp {
                    let (a, b) = (wp[q], wp[q] * orbit.v2hat[q]);
                    for k in 0..f {
                        ph[k] += a * row[k];
                        pv2h[k] += b * row[k];
                    }
                    pv1 += wp[q] * orbit.v1hat[q];
                }
            }
            for k in 0..f {
                m.a1[k] += wv * qh[k];
                m.b_adj[k] += wv * v2h * qh[k];
                m.b[k] += wv * qv2h[k];
                m.a2[k] += wv * v2h * qv2h[k];
            }
            m.c += wv * qv1;
            m.d += wv * v2h * qv1;
            m.l += wv * v1h * qv1;

            if wp.is_some() {
                let ws = grid.measure(n) * grid.species_weight(s, n);
                basis.eval_full(grid.x[i], &mut row);
                for k in 0..f {
                    dsq[k] += ws * (qh[k] - ph[k]).powi(2);
                    scale[k] += ws * row[k].powi(2);
                    dsq[f + k] += ws * (qv2h[k] - pv2h[k]).powi(2);
                    scale[f + k] += ws * (v2h * row[k]).powi(2);
                }
                dsq[2 * f] += ws * (qv1 - pv1).powi(2);
                scale[2 * f] += ws * v1h * v1h;
            }
        }
    }
    m
}

fn relative_asymmetry(a: &DMatrix<f64>, b_t: &DMatrix<f64>, scale: f64) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        (a - b_t).norm() / scale
    }
}

fn drop_first_row(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.rows(1, m.nrows() - 1).clone_owned()
}

fn drop_first(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.view((1, 1), (m.nrows() - 1, m.ncols() - 1)).clone_owned()
}

/// Assembles all operators at rate `lambda` (>= 0) with `modes` Fourier modes.
pub fn assemble_operator_set(
    lambda: f64,
    ctx: &OperatorContext,
    modes: usize,
    opts: &AssemblyOptions,
) -> Result<OperatorSet, OperatorError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(OperatorError::InvalidRate(lambda));
    }
    let nx = ctx.grid.nx();
    if nx < 4 * modes {
        return Err(OperatorError::Unresolved { modes, nx });
    }
    let period = ctx.period();
    let full = SpectralBasis::new(period, modes, false);
    let f = full.dim();
    let lambda_proj = (lambda == 0.0).then_some(opts.projection.lambda_proj);
    let per_x: Vec<Moments> =
        (0..nx).into_par_iter().map(|i| node_moments(ctx, &full, i, lambda, lambda_proj)).collect();

    // basis values at the x nodes
    let h = period / nx as f64;
    let mut hx = vec![vec![0.0; f]; nx];
    for (i, r) in hx.iter_mut().enumerate() {
        full.eval_full(ctx.grid.x[i], r);
    }
    // <g, h_j> for g sampled on the x grid
    let inner = |g: &dyn Fn(usize) -> f64, j: usize| -> f64 { (0..nx).map(|i| h * g(i) * hx[i][j]).sum() };
    let co = &ctx.coefficients;

    let mut a1 = DMatrix::zeros(f, f);
    let mut a2 = DMatrix::zeros(f, f);
    let mut b = DMatrix::zeros(f, f);
    let mut b_adj = DMatrix::zeros(f, f);
    for k in 0..f {
        let lap = full.laplacian_eigenvalue(k);
        a1[(k, k)] += lap;
        a2[(k, k)] += lap + lambda * lambda;
        for j in 0..f {
            a1[(j, k)] += inner(&|i| -co.mu_e[i] * hx[i][k] + per_x[i].a1[k], j);
            a2[(j, k)] += inner(&|i| -co.v2_mu_p[i] * hx[i][k] - per_x[i].a2[k], j);
            b[(j, k)] = inner(&|i| co.mu_p[i] * hx[i][k] + per_x[i].b[k], j);
            b_adj[(j, k)] = inner(&|i| co.mu_p[i] * hx[i][k] + per_x[i].b_adj[k], j);
        }
    }
    let c = DVector::from_fn(f, |j, _| inner(&|i| per_x[i].c, j));
    let d = DVector::from_fn(f, |j, _| inner(&|i| per_x[i].d, j));
    let l = per_x.iter().map(|m| h * m.l).sum::<f64>() / period;

    let projection = lambda_proj.map(|lp| {
        let mut worst = 0.0f64;
        for s in 0..2 {
            let mut dsq = vec![0.0; 2 * f + 1];
            let mut scale = vec![0.0; 2 * f + 1];
            for m in &per_x {
                for k in 0..=2 * f {
                    dsq[k] += m.check[s].0[k];
                    scale[k] += m.check[s].1[k];
                }
            }
            for k in 0..=2 * f {
                if scale[k] > 0.0 {
                    worst = worst.max((dsq[k] / scale[k]).sqrt());
                }
            }
        }
        ProjectionReport { lambda: lp, disagreement: worst }
    });
    if let Some(rep) = projection {
        if rep.disagreement > opts.projection.proj_tol {
            return Err(KineticError::ProjectionDisagreement {
                lambda: rep.lambda,
                disagreement: rep.disagreement,
                tol: opts.projection.proj_tol,
            }
            .into());
        }
    }

    let a1_mz = drop_first(&a1);
    let b_mz = drop_first_row(&b);
    let b_adj_t_mz = drop_first_row(&b_adj.transpose());
    // one scale for all blocks: B vanishes identically for symmetric profiles
    let scale = [a1_mz.norm(), a2.norm(), b_mz.norm(), b_adj_t_mz.norm()].into_iter().fold(0.0, f64::max);
    let asymmetry = Asymmetry {
        a1: relative_asymmetry(&a1_mz, &a1_mz.transpose(), scale),
        a2: relative_asymmetry(&a2, &a2.transpose(), scale),
        b: relative_asymmetry(&b_mz, &b_adj_t_mz, scale),
    };
    for (block, value) in [("A1", asymmetry.a1), ("A2", asymmetry.a2), ("B", asymmetry.b)] {
        if value > opts.asym_tol {
            return Err(OperatorError::AsymmetryTooLarge { block, value, tol: opts.asym_tol });
        }
    }
    let sym = |m: &DMatrix<f64>| 0.5 * (m + m.transpose());
    Ok(OperatorSet {
        lambda,
        period,
        modes,
        a1: sym(&a1_mz),
        a2: sym(&a2),
        b: 0.5 * (b_mz + b_adj_t_mz),
        c: c.rows(1, f - 1).clone_owned(),
        d: d.clone(),
        l,
        raw: RawOperators { a1, a2, b, b_adjoint: b_adj, c, d },
        asymmetry,
        projection,
    })
}
