//! Report types written as JSON, and the CSV plot data. The layout is
//! documented in docs/report-schema.md; bump SCHEMA_VERSION on any change.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use vmstab_analysis::{
    Crossing, CriterionVerdict, DispersionRoot, GrowingMode, ModeResidual, NEntry, ScanTable, TruncatedCount, Verdict,
};
use vmstab_equilibrium::{EquilibriumFields, ResidualReport};
use vmstab_operators::{Asymmetry, OperatorSet};

use crate::config::RunConfig;
use crate::setup::GridSummary;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub schema_version: u32,
    pub command: String,
    pub tool_version: String,
    pub config_sha256: String,
    pub seed: u64,
    pub config: RunConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSummary {
    pub iterations: usize,
    pub residual: ResidualReport,
    pub tol: f64,
    /// Largest mismatch between the stored fields and the derivatives of
    /// the stored potentials.
    pub consistency_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub header: Header,
    pub grid: GridSummary,
    pub equilibrium: EquilibriumSummary,
}

/// Checks made while assembling the lambda = 0 operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyDiagnostics {
    pub asymmetry: Asymmetry,
    pub asym_tol: f64,
    /// Orbit average against Q^lambda at the small check rate.
    pub projection_disagreement: Option<f64>,
    pub proj_tol: f64,
}

impl AssemblyDiagnostics {
    pub fn new(ops0: &OperatorSet, asym_tol: f64, proj_tol: f64) -> Self {
        Self {
            asymmetry: ops0.asymmetry,
            asym_tol,
            projection_disagreement: ops0.projection.map(|p| p.disagreement),
            proj_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub header: Header,
    pub grid: GridSummary,
    pub equilibrium: EquilibriumSummary,
    pub assembly: AssemblyDiagnostics,
    pub criterion: CriterionVerdict,
    /// Counts of the rank-n truncations, n = 1 .. 2M.
    pub truncation: Vec<TruncatedCount>,
    /// Smallest rank from which the truncated counts stay constant.
    pub stable_from: Option<usize>,
}

/// Coefficients of the kernel vector on the full Fourier basis (the constant
/// entry of phi is zero), ordered [1, cos 1, sin 1, cos 2, ...].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficients {
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub b: f64,
}

/// Electrostatic dispersion roots of a field-free profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    /// Velocity nodes of the independent grid.
    pub nv: usize,
    pub independent: Option<DispersionRoot>,
    /// Same quadrature as the pipeline.
    pub same_grid: Option<DispersionRoot>,
    /// |lambda0 - independent| / independent.
    pub relative_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeReport {
    pub header: Header,
    pub grid: GridSummary,
    pub equilibrium: EquilibriumSummary,
    pub assembly: AssemblyDiagnostics,
    pub criterion: CriterionVerdict,
    pub lambda0: f64,
    pub crossing: Crossing,
    /// One entry per truncation rank.
    pub history: Vec<NEntry>,
    /// Successive differences of lambda_n never grow.
    pub contracting: bool,
    /// Scan at the largest rank.
    pub scan: ScanTable,
    pub mode: ModeCoefficients,
    pub residual: ModeResidual,
    /// Residual of a seeded random (phi, psi, b) at the same rate, for scale.
    pub control_residual: ModeResidual,
    pub oracle: Option<OracleCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceLevel {
    pub factor: usize,
    pub grid: GridSummary,
    pub verdict: Verdict,
    pub lhs: Option<usize>,
    pub rhs: usize,
    pub l0: f64,
    pub neg_a1: usize,
    pub lambda0: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub header: Header,
    pub levels: Vec<ConvergenceLevel>,
    /// All levels agree on (lhs, rhs).
    pub consistent: bool,
    /// The finest level's verdict, or ambiguous when the levels disagree.
    pub verdict: Verdict,
    /// Largest relative change of lambda0 between successive levels.
    pub lambda0_change: Option<f64>,
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct ScanCsvRow {
    lambda: f64,
    neg: usize,
    zero: usize,
    pos: usize,
    tracked_eigenvalue: f64,
    margin: Option<f64>,
}

/// lambda against the count and the eigenvalue tracked by the crossing
/// search, one row per grid point.
pub fn write_scan_csv(path: &Path, scan: &ScanTable, tracked: usize) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for r in &scan.rows {
        w.serialize(ScanCsvRow {
            lambda: r.lambda,
            neg: r.neg,
            zero: r.zero,
            pos: r.pos,
            tracked_eigenvalue: r.eigenvalues[tracked],
            margin: r.margin,
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ModeCsvRow {
    x: f64,
    phi: f64,
    psi: f64,
    e1: f64,
    e2: f64,
    b: f64,
}

pub fn write_mode_csv(path: &Path, mode: &GrowingMode) -> Result<()> {
    let basis = mode.basis();
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for (i, &x) in mode.x.iter().enumerate() {
        w.serialize(ModeCsvRow {
            x,
            phi: basis.synthesize(&mode.phi, x),
            psi: basis.synthesize(&mode.psi, x),
            e1: mode.e1[i],
            e2: mode.e2[i],
            b: mode.b_field[i],
        })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct FieldCsvRow {
    x: f64,
    phi0: f64,
    psi0: f64,
    e1: f64,
    b: f64,
}

pub fn write_fields_csv(path: &Path, fields: &EquilibriumFields) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for (i, &x) in fields.grid_x.iter().enumerate() {
        w.serialize(FieldCsvRow { x, phi0: fields.phi0[i], psi0: fields.psi0[i], e1: fields.e1_0[i], b: fields.b0[i] })?;
    }
    w.flush()?;
    Ok(())
}
