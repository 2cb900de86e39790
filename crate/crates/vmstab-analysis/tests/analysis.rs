use std::f64::consts::PI;
use std::sync::OnceLock;

use vmstab_analysis::*;
use vmstab_equilibrium::*;
use vmstab_inertia::{DMatrix, DVector};
use vmstab_operators::*;

const PERIOD: f64 = 12.0;
const TWO_STREAM_VMAX: f64 = 2.7;

fn consts(period: f64, v_max: f64) -> FamilyConstants {
    FamilyConstants { period, alpha: 3.0, c_weight: 1e4, v_max }
}

struct Case {
    profile: EquilibriumProfile,
    vgrid: VelocityGrid,
    ctx: OperatorContext,
    ops0: OperatorSet,
}

const MODES: usize = 4;

fn case(profile: EquilibriumProfile, vgrid: VelocityGrid, period: f64, nx: usize) -> Case {
    let fields = EquilibriumFields::zero(period, nx).unwrap();
    let ctx = OperatorContext::new(&profile, &fields, vgrid.clone(), &ContextOptions::default()).unwrap();
    let ops0 = assemble_operator_set(0.0, &ctx, MODES, &AssemblyOptions::default()).unwrap();
    Case { profile, vgrid, ctx, ops0 }
}

fn two_stream_profile(vgrid: &VelocityGrid) -> EquilibriumProfile {
    TwoStream {
        beam_drift: 0.5,
        beam_energy_width: 0.05,
        beam_momentum_width: 0.15,
        beam_density: 1.0,
        transverse_temperature: 0.05,
        transverse_drift: 1.5,
        transverse_width: 0.2,
        transverse_density: 0.2,
    }
    .build(consts(PERIOD, TWO_STREAM_VMAX), vgrid)
    .unwrap()
    .profile
}

fn two_stream_with(nx: usize, nv: usize) -> Case {
    let g = VelocityGrid::new(nv, TWO_STREAM_VMAX).unwrap();
    case(two_stream_profile(&g), g, PERIOD, nx)
}

fn two_stream() -> &'static Case {
    static CELL: OnceLock<Case> = OnceLock::new();
    CELL.get_or_init(|| two_stream_with(16, 48))
}

/// Dominant root of the two-stream profile rebuilt on a fine velocity grid,
/// independent of the grid under test.
fn converged_root() -> DispersionRoot {
    let g = VelocityGrid::new(192, TWO_STREAM_VMAX).unwrap();
    dominant_dispersion_root(&two_stream_profile(&g), &g, PERIOD, MODES, (1e-3, 10.0)).unwrap()
}

fn maxwellian(nv: usize) -> Case {
    let g = VelocityGrid::new(nv, 5.0).unwrap();
    let p = HomogeneousMaxwellian { temperature: 0.3, density: 1.0 }.build(consts(6.0, 5.0), &g).unwrap().profile;
    case(p, g, 6.0, 16)
}

fn vacuum() -> &'static Case {
    static CELL: OnceLock<Case> = OnceLock::new();
    CELL.get_or_init(|| {
        let g = VelocityGrid::new(8, 4.0).unwrap();
        let p = HomogeneousMaxwellian { temperature: 0.3, density: 0.0 }.build(consts(5.0, 4.0), &g).unwrap().profile;
        case(p, g, 5.0, 16)
    })
}

#[test]
fn vacuum_hypotheses_and_verdict() {
    let v = vacuum();
    let h = check_hypotheses(&v.ops0, &CriterionOptions::default()).unwrap();
    let k1 = (2.0 * PI / 5.0f64).powi(2);
    assert!(h.a1_kernel_constants.holds);
    assert!((h.a1_kernel_constants.value - k1).abs() < 1e-12);
    assert!(!h.l0_nonzero.holds);
    let c = evaluate_criterion(&v.ops0, &CriterionOptions::default()).unwrap();
    assert_eq!(c.verdict, Verdict::Ambiguous);
    assert_eq!((c.lhs, c.rhs), (Some(0), 0));
}

#[test]
fn monotone_maxwellian_is_inconclusive() {
    for nv in [16, 24] {
        let m = maxwellian(nv);
        // l0 = (1/P) int int v1hat^2 sum mu_e, integrated over x
        let mut l = 0.0;
        for s in Species::BOTH {
            for j in 0..m.vgrid.len() {
                let (v1, v2) = m.vgrid.velocity(j);
                let g = lorentz(v1, v2);
                l += m.vgrid.weight(j) * (v1 / g).powi(2) * m.profile.eval(s, g, v2).mu_e;
            }
        }
        assert!(l < 0.0);
        assert!((m.ops0.l - l).abs() < 1e-12 * l.abs());
        let c = evaluate_criterion(&m.ops0, &CriterionOptions::default()).unwrap();
        assert!(c.hypotheses.l0_nonzero.holds);
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert_eq!((c.lhs, c.rhs), (Some(0), 0));
    }
}

#[test]
fn near_zero_transverse_mode_is_ambiguous() {
    let m = maxwellian(16);
    let mut ops = m.ops0.clone();
    let shift = vmstab_inertia::sorted_eigen(&ops.a2).unwrap().0[0];
    let n = ops.a2.nrows();
    ops.a2 -= DMatrix::identity(n, n) * shift;
    let h = check_hypotheses(&ops, &CriterionOptions::default()).unwrap();
    assert!(!h.a2_kernel_trivial.holds);
    let c = evaluate_criterion(&ops, &CriterionOptions::default()).unwrap();
    assert_eq!(c.verdict, Verdict::Ambiguous);
}

#[test]
fn two_stream_criterion_matches_the_fourier_counts() {
    let c2 = two_stream();
    let c = evaluate_criterion(&c2.ops0, &CriterionOptions::default()).unwrap();
    // the operators are diagonal in Fourier modes: count negative diagonals
    let neg_a1 = (1..=MODES)
        .filter(|&m| dispersion_oracle(&c2.profile, &c2.vgrid, PERIOD, m, 0.0) < 0.0)
        .count()
        * 2;
    assert!(neg_a1 > 0);
    assert_eq!(c.a1.neg, neg_a1);
    assert_eq!(c.verdict, Verdict::UnstableExcess, "{:?} {} {:?}", c.lhs, c.rhs, c.reasons);
    assert!(c.lhs.unwrap() > c.rhs);
    let counts = truncated_counts(&c2.ops0, &[1, 2, 3, 4, 6, 8], 1e-8, Default::default()).unwrap();
    let last = counts.last().unwrap();
    assert_eq!((last.neg_a1, Some(last.neg_k1)), (c.a1.neg, c.lhs));
    assert!(stable_from(&counts).is_some());
}

#[test]
fn oracle_matches_the_assembled_diagonal() {
    let c2 = two_stream();
    for lambda in [0.05, 0.3] {
        let ops = assemble_operator_set(lambda, &c2.ctx, MODES, &AssemblyOptions::default()).unwrap();
        let basis = ops.phi_basis();
        for k in 0..basis.dim() {
            let d = dispersion_oracle(&c2.profile, &c2.vgrid, PERIOD, basis.mode_number(k), lambda);
            assert!((ops.a1[(k, k)] - d).abs() < 1e-10 * d.abs().max(1.0));
        }
    }
}

#[test]
fn dispersion_oracle_cases() {
    let v = vacuum();
    for m in 1..4 {
        let k = 2.0 * PI * m as f64 / 5.0;
        assert_eq!(dispersion_oracle(&v.profile, &v.vgrid, 5.0, m, 0.7), k * k);
        assert!(dispersion_roots(&v.profile, &v.vgrid, 5.0, m, (1e-3, 10.0), 200).is_empty());
    }
    let mx = maxwellian(24);
    for m in 1..6 {
        for i in 1..=100 {
            assert!(dispersion_oracle(&mx.profile, &mx.vgrid, 6.0, m, 0.1 * i as f64) > 0.0);
        }
    }
    let c2 = two_stream();
    let root = dominant_dispersion_root(&c2.profile, &c2.vgrid, PERIOD, MODES, (1e-3, 10.0)).unwrap();
    assert_eq!(root.mode, 1);
    assert!(dispersion_oracle(&c2.profile, &c2.vgrid, PERIOD, 1, root.lambda).abs() < 1e-9);
}

#[test]
fn synthetic_crossing() {
    let family = |l: f64| Ok(DMatrix::from_diagonal(&DVector::from_vec(vec![l - 1.0, 2.0, -3.0, l + 5.0])));
    let c = find_kernel_crossing(&family, (0.3, 4.0), &CrossingOptions::default()).unwrap();
    assert!((c.lambda - 1.0).abs() < 1e-12);
    assert_eq!((c.neg_lo, c.neg_hi, c.index), (2, 1, 1));
    assert!(c.eigenvalue.abs() < 1e-9);
    assert!((c.vector[0].abs() - 1.0).abs() < 1e-12);
    assert!(matches!(
        find_kernel_crossing(&family, (2.0, 4.0), &CrossingOptions::default()),
        Err(AnalysisError::BracketLost { .. })
    ));
}

#[test]
fn vacuum_has_a_plateau_and_no_crossing() {
    let v = vacuum();
    let rates = RateOperators::new(&v.ctx, MODES, AssemblyOptions::default());
    let pair = truncation_for(&v.ops0, 4, 1e-8).unwrap();
    assert_eq!((pair.n_phi, pair.n_psi), (4, 5));
    let family = TruncatedFamily { ops: &rates, pair };
    let grid = lambda_grid(1e-2, 8.0, 12).unwrap();
    let scan = scan_lambda(&family, 5, &grid, 8.0, Default::default()).unwrap();
    assert!(scan.rows.iter().all(|r| r.neg == 5 && r.zero == 0));
    assert!(scan.changes.is_empty());
    let opts = RefineOptions { ranks: vec![2, 4], ..RefineOptions::default() };
    assert!(matches!(refine_n(&rates, &v.ops0, &opts), Err(AnalysisError::NoConvergence { n: 2 })));
}

#[test]
fn two_stream_crossing_matches_the_dispersion_root() {
    let c2 = two_stream();
    let rates = RateOperators::new(&c2.ctx, MODES, AssemblyOptions::default());
    let opts = RefineOptions { ranks: vec![2, 4, 8], ..RefineOptions::default() };
    let r = refine_n(&rates, &c2.ops0, &opts).unwrap();
    let root = converged_root();
    assert_eq!(root.mode, 1);
    assert!((r.lambda0 - root.lambda).abs() < 0.1 * root.lambda, "{} vs {root:?}", r.lambda0);
    // the Fourier modes decouple, so every rank finds the same root
    for e in &r.history {
        assert!((e.lambda_n - r.lambda0).abs() < 1e-9 * r.lambda0, "{e:?}");
        assert!(e.bracket.0 < e.lambda_n && e.lambda_n < e.bracket.1);
    }
    assert!(r.mode.trivial_overlap <= 1e-6);
    // plateau at the top of the scan
    let top = r.scan.rows.last().unwrap();
    assert_eq!(top.neg, r.scan.plateau);

    let mode = reconstruct_mode(r.lambda0, &r.mode.phi, &r.mode.psi, r.mode.b, &c2.ctx).unwrap();
    let res = mode_residual(&mode, &c2.ctx).unwrap();
    assert!(res.max_field() <= 1e-3, "{res:?}");

    // negative control: an arbitrary vector is far from a solution
    let n = r.mode.phi.len();
    let phi: Vec<f64> = (0..n).map(|k| if k == 0 { 0.0 } else { (k as f64 * 0.7).sin() }).collect();
    let psi: Vec<f64> = (0..n).map(|k| (k as f64 * 1.3).cos()).collect();
    let bad = reconstruct_mode(r.lambda0, &phi, &psi, 0.4, &c2.ctx).unwrap();
    let bad_res = mode_residual(&bad, &c2.ctx).unwrap();
    assert!(bad_res.max_field() > 0.05, "{bad_res:?}");
    assert!(bad_res.max_field() > 1e3 * res.max_field());
}

#[test]
fn crossing_is_stable_under_refinement() {
    let coarse = two_stream();
    let fine = two_stream_with(32, 96);
    let mut lams = vec![];
    for c in [coarse, &fine] {
        let rates = RateOperators::new(&c.ctx, MODES, AssemblyOptions::default());
        let opts = RefineOptions { ranks: vec![4], ..RefineOptions::default() };
        lams.push(refine_n(&rates, &c.ops0, &opts).unwrap().lambda0);
    }
    assert!((lams[0] - lams[1]).abs() < 0.05 * lams[1], "{lams:?}");
}

#[test]
fn trivial_vector_gives_the_zero_solution() {
    let c2 = two_stream();
    let n = 2 * MODES + 1;
    let mut phi = vec![0.0; n];
    phi[0] = PERIOD.sqrt();
    let mode = reconstruct_mode(0.4, &phi, &vec![0.0; n], 0.0, &c2.ctx).unwrap();
    let grid = &c2.ctx.grid;
    for s in Species::BOTH {
        let scale = (0..grid.len()).fold(0.0f64, |m, n| m.max(c2.ctx.density(s, n).mu_e.abs()));
        assert!(mode.f[s.index()].values.iter().all(|v| v.abs() < 1e-12 * scale * PERIOD.sqrt()));
    }
    assert!(mode.e1.iter().chain(&mode.e2).chain(&mode.b_field).all(|v| v.abs() < 1e-12));
    let res = mode_residual(&mode, &c2.ctx).unwrap();
    // both sides vanish, so only the absolute size is meaningful
    assert!(res.field_scale < 1e-9, "{res:?}");
}

#[test]
fn free_streaming_reconstruction() {
    let c2 = two_stream();
    let n = 2 * MODES + 1;
    let lambda = 0.3;
    let k = 2.0 * PI * 2.0 / PERIOD;
    let amp = (2.0 / PERIOD).sqrt();
    // phi = cos(k x) (second mode), psi = b = 0
    let mut phi = vec![0.0; n];
    phi[3] = 1.0;
    let mode = reconstruct_mode(lambda, &phi, &vec![0.0; n], 0.0, &c2.ctx).unwrap();
    // b = 1 alone
    let mode_b = reconstruct_mode(lambda, &vec![0.0; n], &vec![0.0; n], 1.0, &c2.ctx).unwrap();
    let grid = &c2.ctx.grid;
    let mut worst: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    for s in Species::BOTH {
        for idx in (0..grid.len()).step_by(7) {
            let (x, v1, v2) = grid.point(idx);
            let g = lorentz(v1, v2);
            let kv = k * v1 / g;
            let me = c2.profile.eval(s, g, v2).mu_e;
            let q = (lambda * lambda * (k * x).cos() + lambda * kv * (k * x).sin()) / (lambda * lambda + kv * kv);
            let want = s.sign() * me * amp * ((k * x).cos() - q);
            worst = worst.max((mode.f[s.index()].values[idx] - want).abs());
            worst_b = worst_b.max((mode_b.f[s.index()].values[idx] - s.sign() * me * v1 / g).abs());
        }
    }
    let scale = c2.ctx.density(Species::Minus, 0).mu_e.abs().max(1.0);
    assert!(worst < 1e-8 * scale, "{worst:.3e}");
    assert!(worst_b < 1e-10 * scale, "{worst_b:.3e}");
}
