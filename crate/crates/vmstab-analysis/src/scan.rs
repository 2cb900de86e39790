use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vmstab_inertia::{truncate_m, DMatrix, TruncationPair, ZeroTol};
use vmstab_inertia::{inertia_count, InertiaReport};
use vmstab_operators::{assemble_m, assemble_operator_set, AssemblyOptions, OperatorContext, OperatorSet};

use crate::AnalysisError;

/// A symmetric matrix depending on a rate lambda > 0.
pub trait MatrixFamily: Sync {
    fn matrix(&self, lambda: f64) -> Result<DMatrix<f64>, AnalysisError>;
}

impl<F> MatrixFamily for F
where
    F: Fn(f64) -> Result<DMatrix<f64>, AnalysisError> + Sync,
{
    fn matrix(&self, lambda: f64) -> Result<DMatrix<f64>, AnalysisError> {
        self(lambda)
    }
}

/// Operator sets of one context, assembled on demand and kept per lambda.
pub struct RateOperators<'a> {
    pub ctx: &'a OperatorContext,
    pub modes: usize,
    pub opts: AssemblyOptions,
    cache: Mutex<HashMap<u64, Arc<OperatorSet>>>,
}

impl<'a> RateOperators<'a> {
    pub fn new(ctx: &'a OperatorContext, modes: usize, opts: AssemblyOptions) -> Self {
        Self { ctx, modes, opts, cache: Mutex::new(HashMap::new()) }
    }

    pub fn at(&self, lambda: f64) -> Result<Arc<OperatorSet>, AnalysisError> {
        if let Some(ops) = self.cache.lock().unwrap().get(&lambda.to_bits()) {
            return Ok(ops.clone());
        }
        let ops = Arc::new(assemble_operator_set(lambda, self.ctx, self.modes, &self.opts)?);
        self.cache.lock().unwrap().insert(lambda.to_bits(), ops.clone());
        Ok(ops)
    }

    /// Number of distinct rates assembled so far.
    pub fn assembled(&self) -> usize {
        self.cache.lock().unwrap().len()
    }
}

/// M_n^lambda: the block matrix compressed by a fixed truncation pair.
pub struct TruncatedFamily<'r, 'a> {
    pub ops: &'r RateOperators<'a>,
    pub pair: TruncationPair,
}

impl MatrixFamily for TruncatedFamily<'_, '_> {
    fn matrix(&self, lambda: f64) -> Result<DMatrix<f64>, AnalysisError> {
        let ops = self.ops.at(lambda)?;
        let m = assemble_m(&ops)?;
        Ok(truncate_m(&m, &self.pair)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub points: usize,
    pub lambda_min: f64,
    /// First trial value of the doubling search for lambda_max.
    pub lambda_start: f64,
    pub max_doublings: usize,
    pub zero_tol: ZeroTol,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            points: 40,
            lambda_min: 1e-2,
            lambda_start: 0.5,
            max_doublings: 30,
            zero_tol: ZeroTol::Relative(1e-8),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub lambda: f64,
    pub neg: usize,
    pub zero: usize,
    pub pos: usize,
    pub margin: Option<f64>,
    pub eigenvalues: Vec<f64>,
}

impl ScanRow {
    fn new(lambda: f64, r: InertiaReport) -> Self {
        Self { lambda, neg: r.neg, zero: r.zero, pos: r.pos, margin: r.margin, eigenvalues: r.eigenvalues }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    /// Expected negative count at large lambda.
    pub plateau: usize,
    pub lambda_max: f64,
    pub rows: Vec<ScanRow>,
    /// Indices i where rows i and i + 1 differ in their negative count.
    pub changes: Vec<usize>,
}

impl ScanTable {
    pub fn brackets(&self) -> Vec<(f64, f64)> {
        self.changes.iter().map(|&i| (self.rows[i].lambda, self.rows[i + 1].lambda)).collect()
    }
}

/// Geometric grid of `points` rates from lo to hi inclusive.
pub fn lambda_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, AnalysisError> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
        return Err(AnalysisError::InvalidInterval(format!("[{lo}, {hi}] with {points} points")));
    }
    let r = (hi / lo).ln() / (points - 1) as f64;
    let mut g: Vec<f64> = (0..points).map(|i| lo * (r * i as f64).exp()).collect();
    g[points - 1] = hi;
    Ok(g)
}

fn count_at(family: &dyn MatrixFamily, lambda: f64, tol: ZeroTol) -> Result<InertiaReport, AnalysisError> {
    Ok(inertia_count(&family.matrix(lambda)?, tol)?)
}

/// Doubles lambda until two consecutive values show `plateau` negative
/// eigenvalues and returns the larger one.
pub fn find_lambda_max(
    family: &dyn MatrixFamily,
    plateau: usize,
    opts: &ScanOptions,
) -> Result<f64, AnalysisError> {
    let mut lambda = opts.lambda_start;
    let mut held = 0;
    for _ in 0..opts.max_doublings {
        let r = count_at(family, lambda, opts.zero_tol)?;
        held = if r.neg == plateau && r.zero == 0 { held + 1 } else { 0 };
        if held == 2 {
            return Ok(lambda);
        }
        lambda *= 2.0;
    }
    Err(AnalysisError::PlateauNotReached { plateau, last: lambda / 2.0 })
}

pub fn scan_lambda(
    family: &dyn MatrixFamily,
    plateau: usize,
    grid: &[f64],
    lambda_max: f64,
    zero_tol: ZeroTol,
) -> Result<ScanTable, AnalysisError> {
    let rows = grid
        .par_iter()
        .map(|&l| Ok(ScanRow::new(l, count_at(family, l, zero_tol)?)))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let changes = (0..rows.len().saturating_sub(1))
        .filter(|&i| rows[i].neg != rows[i + 1].neg)
        .collect();
    Ok(ScanTable { plateau, lambda_max, rows, changes })
}
