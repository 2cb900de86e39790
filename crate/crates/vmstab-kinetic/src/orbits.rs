//! Orbit-integral operators. Each orbit is periodic with period T, so
//!
//!   Q^lambda k = int_{-inf}^0 lambda e^{lambda s} k(orbit(s)) ds
//!
//! acts on the Fourier coefficients of s -> k(orbit(s)) by the multiplier
//! a / (a + i n), a = lambda T / (2 pi). On N equispaced samples this gives
//! fixed real weights, exact for band-limited data; lambda = 0 gives the
//! plain period average, i.e. the projection onto the transport kernel.

use std::borrow::Cow;
use std::f64::consts::PI;

use rayon::prelude::*;
use vmstab_characteristics::{trace_orbit, OrbitKind, OrbitOptions, OrbitSamples, PhasePoint};
use vmstab_equilibrium::trig::TrigSeries;
use vmstab_equilibrium::{EquilibriumFields, Species, VelocityGrid};

use crate::grid::{weighted_norm, PhaseFunction, PhaseGrid};
use crate::interp::PhaseInterpolant;
use crate::KineticError;

/// Something that can be evaluated along an orbit from (x, v1hat, v2hat).
pub trait OrbitFunction: Sync {
    fn eval(&self, x: f64, v1hat: f64, v2hat: f64) -> f64;
}

impl<F: Fn(f64, f64, f64) -> f64 + Sync> OrbitFunction for F {
    fn eval(&self, x: f64, v1hat: f64, v2hat: f64) -> f64 {
        self(x, v1hat, v2hat)
    }
}

/// A function of x only, evaluated by trigonometric interpolation.
pub struct XFunction(pub TrigSeries);

impl OrbitFunction for XFunction {
    fn eval(&self, x: f64, _: f64, _: f64) -> f64 {
        self.0.eval(x)
    }
}

impl OrbitFunction for PhaseInterpolant {
    fn eval(&self, x: f64, v1hat: f64, v2hat: f64) -> f64 {
        let g = 1.0 / (1.0 - v1hat * v1hat - v2hat * v2hat).sqrt();
        PhaseInterpolant::eval(self, x, g * v1hat, g * v2hat)
    }
}

/// Real weights w_q with sum_q w_q g(-q T / N) = (Q g) for trigonometric
/// polynomials g of degree < N / 2 (the Nyquist term uses the real part of
/// its multiplier).
pub fn resolvent_weights(a: f64, n: usize) -> Vec<f64> {
    if n == 1 || a.is_infinite() {
        let mut w = vec![0.0; n];
        w[0] = 1.0;
        return w;
    }
    let table: Vec<(f64, f64)> = (0..n)
        .map(|r| (2.0 * PI * r as f64 / n as f64).sin_cos())
        .collect();
    let kmax = (n - 1) / 2;
    let coef: Vec<(f64, f64)> = (1..=kmax)
        .map(|k| {
            let k = k as f64;
            let d = a * a + k * k;
            (2.0 * a * a / d, 2.0 * a * k / d)
        })
        .collect();
    let nyq = if n % 2 == 0 {
        let h = (n / 2) as f64;
        a * a / (a * a + h * h)
    } else {
        0.0
    };
    (0..n)
        .map(|q| {
            let mut s = 1.0;
            for (k, &(c, d)) in coef.iter().enumerate() {
                let (sn, cs) = table[((k + 1) * q) % n];
                s += c * cs + d * sn;
            }
            if n % 2 == 0 {
                s += if q % 2 == 0 { nyq } else { -nyq };
            }
            s / n as f64
        })
        .collect()
}

/// Weights for Q^lambda on one orbit; lambda = 0 gives the period average.
pub fn orbit_weights(orbit: &OrbitSamples, lambda: f64) -> Vec<f64> {
    let n = orbit.len();
    if n == 1 {
        return vec![1.0];
    }
    if lambda == 0.0 {
        return vec![1.0 / n as f64; n];
    }
    resolvent_weights(lambda * orbit.period / (2.0 * PI), n)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CacheStats {
    pub nodes: usize,
    pub passing: usize,
    pub trapped: usize,
    pub stationary: usize,
    pub unclosed: usize,
    pub max_period: f64,
}

/// One backward orbit per grid node (restricted to `mask`), shared by every
/// application of Q^lambda and of the projection. With vanishing fields the
/// straight-line orbits are regenerated on demand instead of stored.
#[derive(Clone, Debug)]
pub struct OrbitCache {
    pub species: Species,
    pub opts: OrbitOptions,
    pub stats: CacheStats,
    mask: Vec<bool>,
    free: Option<(Vec<f64>, VelocityGrid, EquilibriumFields)>,
    orbits: Vec<Option<OrbitSamples>>,
}

impl OrbitCache {
    pub fn build(
        grid: &PhaseGrid,
        fields: &EquilibriumFields,
        species: Species,
        mask: Option<Vec<bool>>,
        opts: &OrbitOptions,
    ) -> Result<Self, KineticError> {
        let mask = mask.unwrap_or_else(|| vec![true; grid.len()]);
        if mask.len() != grid.len() {
            return Err(KineticError::GridMismatch);
        }
        let start = |n: usize| {
            let (x, v1, v2) = grid.point(n);
            PhasePoint::new(x, v1, v2, species, grid.period)
        };
        let free = fields.is_zero() && !opts.force_integration;
        let orbits: Vec<Option<OrbitSamples>> = if free {
            Vec::new()
        } else {
            (0..grid.len())
                .into_par_iter()
                .map(|n| {
                    if mask[n] {
                        trace_orbit(fields, start(n), opts).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect::<Result<_, _>>()?
        };
        let mut cache = Self {
            species,
            opts: *opts,
            stats: CacheStats::default(),
            mask,
            free: free.then(|| (grid.x.clone(), grid.vgrid.clone(), fields.clone())),
            orbits,
        };
        let mut stats = CacheStats::default();
        for n in 0..grid.len() {
            if let Some(o) = cache.orbit(n) {
                stats.nodes += 1;
                match o.kind {
                    OrbitKind::Passing => stats.passing += 1,
                    OrbitKind::Trapped => stats.trapped += 1,
                    OrbitKind::Stationary => stats.stationary += 1,
                    OrbitKind::Unclosed => stats.unclosed += 1,
                }
                if o.period.is_finite() {
                    stats.max_period = stats.max_period.max(o.period);
                }
            }
        }
        cache.stats = stats;
        Ok(cache)
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn is_traced(&self, n: usize) -> bool {
        self.mask[n]
    }

    /// Orbit through node n, or None outside the mask.
    pub fn orbit(&self, n: usize) -> Option<Cow<'_, OrbitSamples>> {
        if !self.mask[n] {
            return None;
        }
        match &self.free {
            Some((x, vg, fields)) => {
                let nv2 = vg.len();
                let (v1, v2) = vg.velocity(n % nv2);
                let p = PhasePoint::new(x[n / nv2], v1, v2, self.species, fields.period);
                Some(Cow::Owned(
                    trace_orbit(fields, p, &self.opts).expect("straight-line orbits cannot fail"),
                ))
            }
            None => self.orbits[n].as_ref().map(Cow::Borrowed),
        }
    }
}

fn contract(orbit: &OrbitSamples, weights: &[f64], k: &dyn OrbitFunction) -> f64 {
    weights
        .iter()
        .enumerate()
        .map(|(q, w)| w * k.eval(orbit.x[q], orbit.v1hat[q], orbit.v2hat[q]))
        .sum()
}

fn apply_rate(
    grid: &PhaseGrid,
    cache: &OrbitCache,
    lambda: f64,
    k: &dyn OrbitFunction,
) -> Vec<f64> {
    (0..grid.len())
        .into_par_iter()
        .map(|n| match cache.orbit(n) {
            Some(o) => contract(&o, &orbit_weights(&o, lambda), k),
            None => 0.0,
        })
        .collect()
}

/// Q^lambda k at every traced node (zero outside the cache mask).
pub fn apply_q_lambda(
    grid: &PhaseGrid,
    cache: &OrbitCache,
    lambda: f64,
    k: &dyn OrbitFunction,
) -> Result<PhaseFunction, KineticError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(KineticError::InvalidRate(lambda));
    }
    if cache.len() != grid.len() {
        return Err(KineticError::GridMismatch);
    }
    PhaseFunction::from_values(grid, cache.species, apply_rate(grid, cache, lambda, k))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionOptions {
    /// Rate of the Abel-limit cross-check.
    pub lambda_proj: f64,
    /// Largest accepted relative disagreement ||P k - Q k|| / ||k||.
    pub proj_tol: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            lambda_proj: 1e-2,
            proj_tol: 0.25,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionReport {
    pub lambda: f64,
    pub disagreement: f64,
}

/// Orbit average of k, checked against Q^lambda_proj k.
pub fn apply_projection(
    grid: &PhaseGrid,
    cache: &OrbitCache,
    k: &dyn OrbitFunction,
    opts: &ProjectionOptions,
) -> Result<(PhaseFunction, ProjectionReport), KineticError> {
    if cache.len() != grid.len() {
        return Err(KineticError::GridMismatch);
    }
    let avg = PhaseFunction::from_values(grid, cache.species, apply_rate(grid, cache, 0.0, k))?;
    let abel = apply_q_lambda(grid, cache, opts.lambda_proj, k)?;
    let diff = avg.with_values(
        avg.values
            .iter()
            .zip(&abel.values)
            .map(|(a, b)| a - b)
            .collect(),
    );
    let direct = avg.with_values(
        (0..grid.len())
            .map(|n| match cache.orbit(n) {
                Some(o) => k.eval(o.x[0], o.v1hat[0], o.v2hat[0]),
                None => 0.0,
            })
            .collect(),
    );
    let scale = weighted_norm(grid, &direct)?;
    let d = weighted_norm(grid, &diff)?;
    let disagreement = if scale > 0.0 { d / scale } else { d };
    if disagreement > opts.proj_tol {
        return Err(KineticError::ProjectionDisagreement {
            lambda: opts.lambda_proj,
            disagreement,
            tol: opts.proj_tol,
        });
    }
    Ok((
        avg,
        ProjectionReport {
            lambda: opts.lambda_proj,
            disagreement,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_reproduce_the_multiplier() {
        let n = 16;
        let a = 0.37;
        let w = resolvent_weights(a, n);
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        for m in 1..8 {
            // g(s_q) = cos(2 pi m q / N) corresponds to g(s) = cos(2 pi m s / T)
            let re: f64 = (0..n)
                .map(|q| w[q] * (2.0 * PI * (m * q) as f64 / n as f64).cos())
                .sum();
            let mf = m as f64;
            assert_relative_eq!(re, a * a / (a * a + mf * mf), epsilon = 1e-13);
        }
    }

    #[test]
    fn limits_of_the_weights() {
        let w = resolvent_weights(1e12, 8);
        assert_relative_eq!(w[0], 1.0, epsilon = 1e-10);
        let w = resolvent_weights(1e-12, 8);
        for v in w {
            assert_relative_eq!(v, 1.0 / 8.0, epsilon = 1e-10);
        }
    }
}
