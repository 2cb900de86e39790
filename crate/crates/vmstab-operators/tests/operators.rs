use std::f64::consts::PI;
use std::sync::OnceLock;

use vmstab_equilibrium::trig::uniform_nodes;
use vmstab_equilibrium::*;
use vmstab_inertia::{inertia_count, sorted_eigen, DMatrix, ZeroTol};
use vmstab_kinetic::{KineticError, ProjectionOptions};
use vmstab_operators::*;

fn consts(period: f64, v_max: f64) -> FamilyConstants {
    FamilyConstants { period, alpha: 3.0, c_weight: 1e4, v_max }
}

struct Homogeneous {
    ctx: OperatorContext,
    vgrid: VelocityGrid,
}

fn homogeneous(period: f64, temperature: f64, density: f64, nx: usize) -> Homogeneous {
    let vgrid = VelocityGrid::new(24, 5.0).unwrap();
    let fam = HomogeneousMaxwellian { temperature, density }.build(consts(period, 5.0), &vgrid).unwrap();
    let fields = EquilibriumFields::zero(period, nx).unwrap();
    let ctx = OperatorContext::new(&fam.profile, &fields, vgrid.clone(), &ContextOptions::default()).unwrap();
    Homogeneous { ctx, vgrid }
}

fn maxwellian() -> &'static Homogeneous {
    static CELL: OnceLock<Homogeneous> = OnceLock::new();
    CELL.get_or_init(|| homogeneous(6.0, 0.3, 1.0, 32))
}

/// Self-consistent purely magnetic equilibrium.
fn magnetic() -> &'static OperatorContext {
    static CELL: OnceLock<OperatorContext> = OnceLock::new();
    CELL.get_or_init(|| {
        let period = 8.0;
        let g = VelocityGrid::new(24, 4.0).unwrap();
        let fam = PurelyMagneticSymmetric { temperature: 0.2, drift: 1.0, width: 0.4, density: 0.25, seed_amplitude: 0.05 }
            .build(consts(period, 4.0), 32, &g)
            .unwrap();
        let opts = SolveOptions { psi_guess: fam.psi_seed.clone(), ..SolveOptions::default() };
        let (fields, _) = solve_equilibrium(&fam.profile, 32, &g, &opts).unwrap();
        OperatorContext::new(&fam.profile, &fields, g, &ContextOptions::default()).unwrap()
    })
}

/// Same profile in imposed (not self-consistent) fields without symmetry.
fn skewed() -> &'static OperatorContext {
    static CELL: OnceLock<OperatorContext> = OnceLock::new();
    CELL.get_or_init(|| skewed_with(20))
}

fn ops(ctx: &OperatorContext, lambda: f64, modes: usize) -> OperatorSet {
    assemble_operator_set(lambda, ctx, modes, &AssemblyOptions::default()).unwrap()
}

/// Quadrature over the velocity grid of sum_species g(mu_e, v1hat, v2hat)
/// at zero fields.
fn velocity_sum(h: &Homogeneous, g: impl Fn(f64, f64, f64) -> f64) -> f64 {
    let mut total = 0.0;
    for s in Species::BOTH {
        for j in 0..h.vgrid.len() {
            let (v1, v2) = h.vgrid.velocity(j);
            let gm = lorentz(v1, v2);
            let d = h.ctx.profile.eval(s, gm, v2);
            total += h.vgrid.weight(j) * g(d.mu_e, v1 / gm, v2 / gm);
        }
    }
    total
}

fn off_diagonal_norm(m: &DMatrix<f64>) -> f64 {
    let mut m = m.clone();
    m.fill_diagonal(0.0);
    m.norm()
}

#[test]
fn free_streaming_operators_have_closed_form_diagonals() {
    let h = maxwellian();
    let modes = 5;
    for lambda in [0.0, 0.05, 0.7, 4.0] {
        let o = ops(&h.ctx, lambda, modes);
        let basis = o.phi_basis();
        for k in 0..basis.dim() {
            let kw = basis.wavenumber(k);
            let resolvent = |v1h: f64| {
                if lambda == 0.0 {
                    0.0
                } else {
                    lambda * lambda / (lambda * lambda + kw * kw * v1h * v1h)
                }
            };
            let a1 = kw * kw - velocity_sum(h, |me, v1h, _| me * (1.0 - resolvent(v1h)));
            assert!((o.a1[(k, k)] - a1).abs() < 1e-10 * a1.abs().max(1.0), "A1 lambda={lambda} k={k}");
            // c_2 vanishes for a homogeneous Maxwellian (mu_p = 0)
            let a2 = kw * kw + lambda * lambda - velocity_sum(h, |me, v1h, v2h| me * v2h * v2h * resolvent(v1h));
            let kk = k + 1;
            assert!((o.a2[(kk, kk)] - a2).abs() < 1e-10 * a2.abs().max(1.0), "A2 lambda={lambda} k={k}");
        }
        // the constant transverse mode: Q and P leave constants alone
        let a2_0 = lambda * lambda - velocity_sum(h, |me, _, v2h| me * v2h * v2h);
        assert!((o.a2[(0, 0)] - a2_0).abs() < 1e-10);
        assert!(off_diagonal_norm(&o.a1) < 1e-12 * o.a1.norm());
        assert!(off_diagonal_norm(&o.a2) < 1e-12 * o.a2.norm());
        assert!(o.b.norm() < 1e-12 * o.a1.norm());
        let l = velocity_sum(h, |me, v1h, _| me * v1h * v1h);
        assert!((o.l - l).abs() < 1e-12 * l.abs());
        assert!(o.l < 0.0);
    }
}

#[test]
fn projected_free_streaming_a1_is_shifted_laplacian() {
    let h = maxwellian();
    let o = ops(&h.ctx, 0.0, 4);
    let ce = h.ctx.coefficients.mu_e[0];
    for k in 0..8 {
        let kw = o.phi_basis().wavenumber(k);
        assert!((o.a1[(k, k)] - (kw * kw - ce)).abs() < 1e-10);
    }
    let rep = o.projection.unwrap();
    assert!(rep.disagreement <= ProjectionOptions::default().proj_tol);
}

#[test]
fn m0_structure() {
    let h = maxwellian();
    let o = ops(&h.ctx, 0.0, 4);
    let m0 = assemble_m0(&o).unwrap();
    assert_eq!(m0.dims, [8, 9, 1]);
    assert_eq!(m0.matrix[(17, 17)], o.period * o.l);
    assert!(m0.block(0, 2).iter().all(|v| *v == 0.0));
    assert!(m0.block(1, 2).iter().all(|v| *v == 0.0));
    assert_eq!(m0.matrix, m0.matrix.transpose());
    assert!(matches!(assemble_m(&o), Err(OperatorError::InvalidRate(_))));
    let o1 = ops(&h.ctx, 1.0, 4);
    assert!(matches!(assemble_m0(&o1), Err(OperatorError::InvalidRate(_))));
}

#[test]
fn vacuum_reduces_to_the_laplacian_pattern() {
    let h = homogeneous(5.0, 0.3, 0.0, 16);
    let lambda = 0.8;
    let o = ops(&h.ctx, lambda, 3);
    let m = assemble_m(&o).unwrap();
    assert_eq!(m.matrix, m.matrix.transpose());
    let basis = o.psi_basis();
    let mut want = vec![];
    for k in 1..basis.dim() {
        want.push(-basis.wavenumber(k).powi(2));
    }
    for k in 0..basis.dim() {
        want.push(basis.wavenumber(k).powi(2) + lambda * lambda);
    }
    want.push(-o.period * lambda * lambda);
    let diag = m.matrix.diagonal();
    for (a, b) in diag.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    assert!(off_diagonal_norm(&m.matrix) < 1e-14);
}

#[test]
fn trivial_vector_is_in_the_kernel() {
    let ctx = magnetic();
    for lambda in [0.1, 1.0, 10.0] {
        let o = ops(ctx, lambda, 5);
        let m = assemble_m_raw(&o);
        let r = (&m * trivial_vector(&o)).norm();
        assert!(r <= 1e-8 * m.norm(), "lambda={lambda}: {r:.3e} vs {:.3e}", m.norm());
        // A1 annihilates constants
        assert!(o.raw.a1.column(0).norm() <= 1e-10 * o.raw.a1.norm());
    }
}

#[test]
fn purely_magnetic_coupling_vanishes() {
    let o = ops(magnetic(), 0.0, 5);
    let scale = o.a1.norm();
    assert!(o.b.norm() <= 1e-10 * scale, "{:.3e}", o.b.norm());
}

#[test]
fn coupling_vectors_vanish_as_the_rate_goes_to_zero() {
    let ctx = skewed();
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for lambda in [1.0, 0.1, 0.01, 0.001] {
        let o = ops(ctx, lambda, 4);
        let (c, d) = (o.c.norm(), o.d.norm());
        assert!(c < prev.0 && d < prev.1, "lambda={lambda}: {c:.3e} {d:.3e}");
        prev = (c, d);
    }
    let o1 = ops(ctx, 1.0, 4);
    assert!(prev.0 < 0.05 * o1.c.norm() && prev.1 < 0.05 * o1.d.norm());
}

#[test]
fn operators_converge_to_the_projected_ones() {
    let ctx = skewed();
    let o0 = ops(ctx, 0.0, 4);
    let mut prev = [f64::INFINITY; 3];
    for lambda in [0.3, 0.1, 0.03, 0.01] {
        let o = ops(ctx, lambda, 4);
        let a2_0 = &o0.a2 + DMatrix::identity(9, 9) * lambda * lambda;
        let diff = [(&o.a1 - &o0.a1).norm(), (&o.a2 - a2_0).norm(), (&o.b - &o0.b).norm()];
        for k in 0..3 {
            assert!(diff[k] < prev[k], "block {k} at lambda={lambda}: {diff:?}");
        }
        prev = diff;
    }
    let l0 = o0.l;
    let l = ops(ctx, 0.001, 4).l;
    assert!((l - l0).abs() < 0.05 * l0.abs().max(1e-3), "{l} vs {l0}");
}

#[test]
fn large_rates_make_the_diagonal_blocks_positive() {
    for ctx in [magnetic(), skewed(), &maxwellian().ctx] {
        let o = ops(ctx, 10.0, 4);
        let a1 = inertia_count(&o.a1, ZeroTol::default()).unwrap();
        let a2 = inertia_count(&o.a2, ZeroTol::default()).unwrap();
        assert_eq!((a1.neg, a1.zero), (0, 0));
        assert_eq!((a2.neg, a2.zero), (0, 0));
    }
}

fn skewed_with(nv: usize) -> OperatorContext {
    let period = 8.0;
    let g = VelocityGrid::new(nv, 4.0).unwrap();
    let fam = PurelyMagneticSymmetric { temperature: 0.2, drift: 1.0, width: 0.4, density: 0.25, seed_amplitude: 0.0 }
        .build(consts(period, 4.0), 32, &g)
        .unwrap();
    let k = 2.0 * PI / period;
    let xs = uniform_nodes(32, period);
    let phi = xs.iter().map(|x| 0.1 * (k * x).cos() + 0.05 * (2.0 * k * x).sin()).collect();
    let psi = xs.iter().map(|x| 0.3 * (k * x).cos() + 0.1 * (k * x).sin()).collect();
    let fields = EquilibriumFields::from_potentials(period, phi, psi).unwrap();
    OperatorContext::new(&fam.profile, &fields, g, &ContextOptions::default()).unwrap()
}

/// Integrates d/dv2 of the profile, so it vanishes only up to velocity
/// quadrature error.
#[test]
fn projected_coupling_has_mean_zero_range() {
    let mut prev = f64::INFINITY;
    let mut last = 0.0;
    for nv in [16, 32, 40] {
        let o = ops(&skewed_with(nv), 0.0, 4);
        assert!(o.raw.b.norm() > 0.5);
        let rel = o.raw.b.row(0).norm() / o.raw.b.norm();
        assert!(rel < prev, "nv={nv}: {rel:.3e}");
        prev = rel;
        last = rel;
    }
    assert!(last < 1e-2, "{last:.3e}");
}

#[test]
fn laplacian_dominates_high_modes() {
    let o = ops(magnetic(), 0.0, 7);
    let basis = o.phi_basis();
    let ratio: Vec<f64> = (0..basis.dim()).map(|k| o.a1[(k, k)] / basis.wavenumber(k).powi(2)).collect();
    // worst of each cos/sin pair
    let dev: Vec<f64> = ratio.chunks(2).map(|p| (p[0] - 1.0).abs().max((p[1] - 1.0).abs())).collect();
    for m in 1..dev.len() {
        assert!(dev[m] < dev[m - 1], "{ratio:?}");
    }
    assert!(dev[6] < dev[0] / 10.0, "{ratio:?}");
}

#[test]
fn block_matrix_is_symmetric_and_has_the_right_corner() {
    let o = ops(skewed(), 0.5, 3);
    let m = assemble_m(&o).unwrap();
    assert_eq!(m.matrix, m.matrix.transpose());
    assert_eq!(m.dims, [6, 7, 1]);
    assert_eq!(m.matrix[(13, 13)], -o.period * (0.25 - o.l));
    assert_eq!(m.block(0, 0), -&o.a1);
    assert_eq!(m.block(1, 2).column(0).clone_owned(), -&o.d);
    assert_eq!(m.block(0, 2).column(0).clone_owned(), o.c);
    // the spectrum is real and finite
    let (e, _) = sorted_eigen(&m.matrix).unwrap();
    assert!(e.iter().all(|v| v.is_finite()));
}

#[test]
fn assembly_is_deterministic() {
    let ctx = skewed();
    let a = ops(ctx, 0.37, 4);
    let b = ops(ctx, 0.37, 4);
    assert_eq!(a.raw.a1, b.raw.a1);
    assert_eq!(a.raw.b_adjoint, b.raw.b_adjoint);
    assert_eq!(a.l.to_bits(), b.l.to_bits());
}

#[test]
fn assembly_errors() {
    let ctx = skewed();
    let strict = AssemblyOptions { asym_tol: 1e-14, ..AssemblyOptions::default() };
    assert!(matches!(
        assemble_operator_set(0.5, ctx, 3, &strict),
        Err(OperatorError::AsymmetryTooLarge { .. })
    ));
    assert!(matches!(
        assemble_operator_set(0.5, ctx, 9, &AssemblyOptions::default()),
        Err(OperatorError::Unresolved { modes: 9, nx: 32 })
    ));
    assert!(matches!(
        assemble_operator_set(-1.0, ctx, 3, &AssemblyOptions::default()),
        Err(OperatorError::InvalidRate(_))
    ));
    let tight = AssemblyOptions {
        projection: ProjectionOptions { proj_tol: 1e-9, ..ProjectionOptions::default() },
        ..AssemblyOptions::default()
    };
    assert!(matches!(
        assemble_operator_set(0.0, ctx, 3, &tight),
        Err(OperatorError::Kinetic(KineticError::ProjectionDisagreement { .. }))
    ));
}

#[test]
fn matrices_dump_as_csv() {
    let o = ops(&maxwellian().ctx, 1.0, 2);
    let mut buf = vec![];
    write_matrix_csv(&mut buf, &o.a2, o.lambda, o.modes, "abc").unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# lambda=1e0 modes=2 rows=5 cols=5 grid=abc"));
    assert_eq!(lines.len(), 6);
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first.len(), 5);
    assert_eq!(first[0], o.a2[(0, 0)]);
}
