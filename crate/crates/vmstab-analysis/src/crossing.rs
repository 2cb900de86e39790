use serde::{Deserialize, Serialize};
use vmstab_inertia::{
    inertia_count, sorted_eigen, spectral_cut, truncation_projectors, DVector, TruncationPair, ZeroTol,
};
use vmstab_operators::OperatorSet;

use crate::scan::{find_lambda_max, lambda_grid, scan_lambda, MatrixFamily, RateOperators, ScanOptions, ScanTable, TruncatedFamily};
use crate::AnalysisError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingOptions {
    /// Stop once |nu| <= eig_tol * max |eigenvalue|.
    pub eig_tol: f64,
    /// Or once the bracket is narrower than lambda_tol * lambda.
    pub lambda_tol: f64,
    pub max_iter: usize,
    pub zero_tol: ZeroTol,
}

impl Default for CrossingOptions {
    fn default() -> Self {
        Self { eig_tol: 1e-10, lambda_tol: 1e-10, max_iter: 60, zero_tol: ZeroTol::Relative(1e-8) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub lambda: f64,
    /// The tracked eigenvalue at `lambda`.
    pub eigenvalue: f64,
    /// Its position in the ascending spectrum.
    pub index: usize,
    /// Distance to the neighbouring eigenvalues (none for a 1 x 1 matrix).
    pub gap: Option<f64>,
    pub bracket: (f64, f64),
    pub neg_lo: usize,
    pub neg_hi: usize,
    pub iterations: usize,
    /// |<u, u_prev>| between the last two iterates.
    pub overlap: f64,
    pub vector: Vec<f64>,
}

/// Root of the sorted eigenvalue nu_k(lambda), k = min(neg_lo, neg_hi), on a
/// bracket where the negative count changes. Illinois steps, bisection as
/// fallback.
pub fn find_kernel_crossing(
    family: &dyn MatrixFamily,
    bracket: (f64, f64),
    opts: &CrossingOptions,
) -> Result<Crossing, AnalysisError> {
    let (mut a, mut b) = bracket;
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(AnalysisError::InvalidInterval(format!("({a}, {b})")));
    }
    let lost = AnalysisError::BracketLost { lo: a, hi: b };
    let lo = inertia_count(&family.matrix(a)?, opts.zero_tol)?;
    let hi = inertia_count(&family.matrix(b)?, opts.zero_tol)?;
    if lo.neg == hi.neg {
        return Err(lost);
    }
    let k = lo.neg.min(hi.neg);
    let (mut fa, mut fb) = (lo.eigenvalues[k], hi.eigenvalues[k]);
    if fa.signum() == fb.signum() {
        return Err(lost);
    }

    let mut side = 0i8;
    let mut prev: Option<DVector<f64>> = None;
    let mut overlap = 0.0;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let (eigs, vecs) = sorted_eigen(&family.matrix(c)?)?;
        let fc = eigs[k];
        let u = vecs.column(k).clone_owned();
        if let Some(p) = &prev {
            overlap = p.dot(&u).abs();
        }
        prev = Some(u.clone());
        let scale = eigs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let done = fc.abs() <= opts.eig_tol * scale || (b - a) <= opts.lambda_tol * b || iterations >= opts.max_iter;
        if done {
            let below = if k > 0 { fc - eigs[k - 1] } else { f64::INFINITY };
            let above = if k + 1 < eigs.len() { eigs[k + 1] - fc } else { f64::INFINITY };
            return Ok(Crossing {
                lambda: c,
                eigenvalue: fc,
                index: k,
                gap: Some(below.min(above)).filter(|g| g.is_finite()),
                bracket: (a, b),
                neg_lo: lo.neg,
                neg_hi: hi.neg,
                iterations,
                overlap,
                vector: u.iter().copied().collect(),
            });
        }
        if fc.signum() == fb.signum() {
            (b, fb) = (c, fc);
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            (a, fa) = (c, fc);
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
}

/// Spectral truncation of rank n, with both ranks moved up past clusters.
pub fn truncation_for(ops0: &OperatorSet, n: usize, gap_tol: f64) -> Result<TruncationPair, AnalysisError> {
    let (e1, _) = sorted_eigen(&ops0.a1)?;
    let (e2, _) = sorted_eigen(&ops0.a2)?;
    let n_phi = spectral_cut(&e1, n.min(e1.len()), gap_tol);
    let n_psi = spectral_cut(&e2, n.min(e2.len()), gap_tol);
    Ok(truncation_projectors(&ops0.a1, &ops0.a2, n_phi, n_psi, gap_tol)?)
}

/// A truncated kernel vector in full-basis coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedVector {
    /// Coefficients on the full basis (the constant entry is zero).
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub b: f64,
    /// |<u, u_triv>| / |u_triv|.
    pub trivial_overlap: f64,
}

/// phi = P u_phi, psi = Q u_psi; unit norm, largest entry positive.
pub fn lift_vector(pair: &TruncationPair, u: &[f64]) -> LiftedVector {
    let (np, nq) = (pair.n_phi, pair.n_psi);
    let phi = &pair.p * DVector::from_column_slice(&u[..np]);
    let psi = &pair.q * DVector::from_column_slice(&u[np..np + nq]);
    let mut all: Vec<f64> = phi.iter().chain(psi.iter()).copied().collect();
    all.push(u[np + nq]);
    let norm = all.iter().map(|v| v * v).sum::<f64>().sqrt();
    let big = all.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
    let s = if big < 0.0 { -1.0 } else { 1.0 } / norm;
    let mut phi_full = vec![0.0];
    phi_full.extend(all[..phi.len()].iter().map(|v| v * s));
    let psi_full = all[phi.len()..phi.len() + psi.len()].iter().map(|v| v * s).collect();
    LiftedVector {
        trivial_overlap: phi_full[0].abs(),
        phi: phi_full,
        psi: psi_full,
        b: all[all.len() - 1] * s,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineOptions {
    pub ranks: Vec<usize>,
    /// Absolute eigenvalue gap below which a cut is moved up.
    pub gap_tol: f64,
    pub scan: ScanOptions,
    pub crossing: CrossingOptions,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self { ranks: vec![8, 16, 32], gap_tol: 1e-8, scan: ScanOptions::default(), crossing: CrossingOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NEntry {
    pub n: usize,
    pub n_phi: usize,
    pub n_psi: usize,
    pub lambda_max: f64,
    pub bracket: (f64, f64),
    pub lambda_n: f64,
    pub eigenvalue: f64,
    /// |lambda_n - lambda_{n_prev}|.
    pub cauchy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub lambda0: f64,
    pub mode: LiftedVector,
    pub crossing: Crossing,
    pub history: Vec<NEntry>,
    /// Cauchy differences never grow along the rank list.
    pub contracting: bool,
    /// Scan at the largest rank.
    pub scan: ScanTable,
}

/// Scan and crossing at each rank of `opts.ranks`, taking the largest-lambda
/// bracket each time.
pub fn refine_n(rates: &RateOperators, ops0: &OperatorSet, opts: &RefineOptions) -> Result<Refinement, AnalysisError> {
    let mut history: Vec<NEntry> = vec![];
    let mut last = None;
    for &n in &opts.ranks {
        let pair = truncation_for(ops0, n, opts.gap_tol)?;
        let family = TruncatedFamily { ops: rates, pair };
        let plateau = family.pair.n_phi + 1;
        let lambda_max = find_lambda_max(&family, plateau, &opts.scan)?;
        let grid = lambda_grid(opts.scan.lambda_min, lambda_max, opts.scan.points)?;
        let scan = scan_lambda(&family, plateau, &grid, lambda_max, opts.scan.zero_tol)?;
        let &bracket = scan.brackets().last().ok_or(AnalysisError::NoConvergence { n })?;
        let crossing = find_kernel_crossing(&family, bracket, &opts.crossing)?;
        let mode = lift_vector(&family.pair, &crossing.vector);
        if mode.trivial_overlap > 1e-6 {
            return Err(AnalysisError::TrivialKernel { overlap: mode.trivial_overlap });
        }
        history.push(NEntry {
            n,
            n_phi: family.pair.n_phi,
            n_psi: family.pair.n_psi,
            lambda_max,
            bracket,
            lambda_n: crossing.lambda,
            eigenvalue: crossing.eigenvalue,
            cauchy: history.last().map(|p| (crossing.lambda - p.lambda_n).abs()),
        });
        last = Some((crossing, mode, scan));
    }
    let (crossing, mode, scan) = last.ok_or(AnalysisError::InvalidInterval("empty rank list".into()))?;
    let diffs: Vec<f64> = history.iter().filter_map(|e| e.cauchy).collect();
    let contracting = diffs.windows(2).all(|w| w[1] <= w[0]);
    Ok(Refinement { lambda0: crossing.lambda, mode, crossing, history, contracting, scan })
}
