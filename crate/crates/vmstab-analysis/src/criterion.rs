use serde::{Deserialize, Serialize};
use vmstab_inertia::{
    inertia_count, k1_operator, spectral_cut, truncation_projectors, DMatrix, InertiaError, InertiaReport,
    ZeroTol,
};
use vmstab_operators::OperatorSet;

use crate::AnalysisError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOptions {
    /// Eigenvalues within this band count as zero.
    pub zero_tol: ZeroTol,
    /// |l^0| at or below this is treated as l^0 = 0.
    pub l_tol: f64,
}

impl Default for CriterionOptions {
    fn default() -> Self {
        Self {
            zero_tol: ZeroTol::Relative(1e-8),
            l_tol: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub holds: bool,
    /// The quantity compared against `tol`.
    pub value: f64,
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisFlags {
    /// Smallest |eigenvalue| of A1^0 on the mean-zero space.
    pub a1_kernel_constants: Hypothesis,
    pub l0_nonzero: Hypothesis,
    /// Smallest |eigenvalue| of A2^0.
    pub a2_kernel_trivial: Hypothesis,
}

fn min_abs(eigs: &[f64]) -> f64 {
    eigs.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()))
}

pub fn check_hypotheses(ops: &OperatorSet, opts: &CriterionOptions) -> Result<HypothesisFlags, AnalysisError> {
    let a1 = inertia_count(&ops.a1, opts.zero_tol)?;
    let a2 = inertia_count(&ops.a2, opts.zero_tol)?;
    Ok(flags(&a1, &a2, ops.l, opts.l_tol))
}

fn flags(a1: &InertiaReport, a2: &InertiaReport, l: f64, l_tol: f64) -> HypothesisFlags {
    let check = |value: f64, tol: f64| Hypothesis { holds: value > tol, value, tol };
    HypothesisFlags {
        a1_kernel_constants: check(min_abs(&a1.eigenvalues), a1.zero_tol),
        l0_nonzero: check(l.abs(), l_tol),
        a2_kernel_trivial: check(min_abs(&a2.eigenvalues), a2.zero_tol),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// neg(K1^0) > neg(A1^0) + neg(-l^0).
    UnstableExcess,
    /// neg(K1^0) < neg(A1^0) + neg(-l^0), A2^0 nonsingular.
    UnstableMismatch,
    Inconclusive,
    /// Some count or hypothesis sits inside its tolerance band.
    Ambiguous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub verdict: Verdict,
    /// neg(K1^0); absent when A1^0 is singular on the mean-zero space.
    pub lhs: Option<usize>,
    /// neg(A1^0) + neg(-l^0).
    pub rhs: usize,
    pub l0: f64,
    pub hypotheses: HypothesisFlags,
    pub a1: InertiaReport,
    pub a2: InertiaReport,
    pub k1: Option<InertiaReport>,
    pub reasons: Vec<String>,
}

pub fn evaluate_criterion(ops: &OperatorSet, opts: &CriterionOptions) -> Result<CriterionVerdict, AnalysisError> {
    let a1 = inertia_count(&ops.a1, opts.zero_tol)?;
    let a2 = inertia_count(&ops.a2, opts.zero_tol)?;
    let hypotheses = flags(&a1, &a2, ops.l, opts.l_tol);
    let neg_minus_l = usize::from(ops.l > opts.l_tol);
    let rhs = a1.neg + neg_minus_l;
    let mut reasons = vec![];

    let k1 = if hypotheses.a1_kernel_constants.holds {
        let singular_tol = a1.zero_tol / a1.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        match k1_operator(&ops.a1, &ops.a2, &ops.b, singular_tol) {
            Ok(k) => Some(inertia_count(&k, opts.zero_tol)?),
            Err(InertiaError::HypothesisFailure { min_abs }) => {
                reasons.push(format!("A1^0 numerically singular (min |eig| {min_abs:.3e})"));
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        reasons.push("A1^0 has a kernel beyond the constants".into());
        None
    };

    if !hypotheses.l0_nonzero.holds {
        reasons.push(format!("|l0| = {:.3e} within {:.1e}", ops.l.abs(), opts.l_tol));
    }
    if !hypotheses.a2_kernel_trivial.holds {
        reasons.push("A2^0 has a near-zero eigenvalue".into());
    }
    if let Some(k) = &k1 {
        if k.zero > 0 {
            reasons.push(format!("K1^0 has {} eigenvalue(s) within {:.3e}", k.zero, k.zero_tol));
        }
    }

    let lhs = k1.as_ref().map(|k| k.neg);
    let verdict = match lhs {
        _ if !reasons.is_empty() => Verdict::Ambiguous,
        Some(l) if l > rhs => Verdict::UnstableExcess,
        Some(l) if l < rhs => Verdict::UnstableMismatch,
        _ => Verdict::Inconclusive,
    };
    Ok(CriterionVerdict { verdict, lhs, rhs, l0: ops.l, hypotheses, a1, a2, k1, reasons })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncatedCount {
    pub n_phi: usize,
    pub n_psi: usize,
    pub neg_a1: usize,
    pub neg_k1: usize,
}

/// neg(A1_n^0) and neg(K1_n^0) for each requested rank, compressing with the
/// spectral projectors of A1^0 and A2^0.
pub fn truncated_counts(
    ops: &OperatorSet,
    ranks: &[usize],
    gap_tol: f64,
    zero_tol: ZeroTol,
) -> Result<Vec<TruncatedCount>, AnalysisError> {
    let a1 = inertia_count(&ops.a1, ZeroTol::Absolute(0.0))?;
    let a2 = inertia_count(&ops.a2, ZeroTol::Absolute(0.0))?;
    let mut out: Vec<TruncatedCount> = vec![];
    for &n in ranks {
        let n_phi = spectral_cut(&a1.eigenvalues, n, gap_tol);
        let n_psi = spectral_cut(&a2.eigenvalues, n, gap_tol);
        if out.last().is_some_and(|c| c.n_phi == n_phi && c.n_psi == n_psi) {
            continue;
        }
        let pair = truncation_projectors(&ops.a1, &ops.a2, n_phi, n_psi, gap_tol)?;
        let a1n = pair.p.transpose() * &ops.a1 * &pair.p;
        let a2n = pair.q.transpose() * &ops.a2 * &pair.q;
        let bn = pair.p.transpose() * &ops.b * &pair.q;
        let k1n = k1_operator(&sym(&a1n), &sym(&a2n), &bn, 1e-12)?;
        out.push(TruncatedCount {
            n_phi,
            n_psi,
            neg_a1: inertia_count(&sym(&a1n), zero_tol)?.neg,
            neg_k1: inertia_count(&k1n, zero_tol)?.neg,
        });
    }
    Ok(out)
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// First index from which both counts stay constant.
pub fn stable_from(counts: &[TruncatedCount]) -> Option<usize> {
    let last = counts.last()?;
    let mut i = counts.len() - 1;
    while i > 0 && counts[i - 1].neg_a1 == last.neg_a1 && counts[i - 1].neg_k1 == last.neg_k1 {
        i -= 1;
    }
    Some(i)
}
