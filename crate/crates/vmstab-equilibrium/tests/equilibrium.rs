use std::f64::consts::PI;

use vmstab_equilibrium::trig::uniform_nodes;
use vmstab_equilibrium::*;

fn consts(period: f64, v_max: f64) -> FamilyConstants {
    FamilyConstants { period, alpha: 3.0, c_weight: 1e4, v_max }
}

#[test]
fn homogeneous_profile_has_zero_fields() {
    let g = VelocityGrid::new(32, 5.0).unwrap();
    let fam = HomogeneousMaxwellian { temperature: 0.3, density: 1.0 }.build(consts(5.0, 5.0), &g).unwrap();
    let (fields, rep) = solve_equilibrium(&fam.profile, 16, &g, &SolveOptions::default()).unwrap();
    assert!(fields.is_zero());
    assert!(rep.residual.max() <= 1e-12, "{:?}", rep.residual);
    let r = equilibrium_residual(&fields, &fam.profile, &g);
    assert!(r.poisson <= 1e-12 && r.ampere <= 1e-12 && r.charge_defect.abs() <= 1e-12);
}

#[test]
fn two_stream_background_neutralizes() {
    let g = VelocityGrid::new(32, 4.0).unwrap();
    let fam = TwoStream {
        beam_drift: 0.8,
        beam_energy_width: 0.15,
        beam_momentum_width: 0.3,
        beam_density: 1.0,
        transverse_temperature: 0.05,
        transverse_drift: 1.0,
        transverse_width: 0.3,
        transverse_density: 0.2,
    }
    .build(consts(9.0, 4.0), &g)
    .unwrap();
    let (fields, rep) = solve_equilibrium(&fam.profile, 16, &g, &SolveOptions::default()).unwrap();
    assert!(fields.is_zero());
    assert!(rep.residual.charge_defect.abs() < 1e-12);
}

#[test]
fn missing_background_is_a_neutrality_violation() {
    let g = VelocityGrid::new(24, 4.0).unwrap();
    let mut fam = HomogeneousMaxwellian { temperature: 0.3, density: 1.0 }.build(consts(5.0, 4.0), &g).unwrap();
    fam.profile.n0 = 0.1;
    let err = solve_equilibrium(&fam.profile, 16, &g, &SolveOptions::default()).unwrap_err();
    assert!(matches!(err, EquilibriumError::NeutralityViolation { .. }), "{err}");
}

fn magnetic(period: f64) -> (FamilyProfile, VelocityGrid) {
    let g = VelocityGrid::new(40, 4.0).unwrap();
    let fam = PurelyMagneticSymmetric { temperature: 0.2, drift: 1.0, width: 0.4, density: 0.25, seed_amplitude: 0.05 }
        .build(consts(period, 4.0), 32, &g)
        .unwrap();
    (fam, g)
}

fn solve_seeded(fam: &FamilyProfile, g: &VelocityGrid, shift: f64) -> EquilibriumFields {
    let opts = SolveOptions {
        psi_guess: fam.psi_seed.as_ref().map(|s| s.iter().map(|v| v + shift).collect()),
        ..SolveOptions::default()
    };
    solve_equilibrium(&fam.profile, 32, g, &opts).unwrap().0
}

#[test]
fn purely_magnetic_profile_keeps_phi_zero() {
    let (fam, g) = magnetic(8.0);
    let fields = solve_seeded(&fam, &g, 0.0);
    let phi_max = fields.phi0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let psi_max = fields.psi0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(phi_max < 1e-12, "phi0 = {phi_max}");
    assert!(psi_max > 0.5, "psi0 amplitude {psi_max}");
    let r = equilibrium_residual(&fields, &fam.profile, &g);
    assert!(r.max() <= 1e-9, "{r:?}");
    assert!(fields.consistency_defect() < 1e-10);
}

#[test]
fn seed_shift_reaches_same_fixed_point() {
    let (fam, g) = magnetic(8.0);
    let a = solve_seeded(&fam, &g, 0.0);
    let b = solve_seeded(&fam, &g, 0.37);
    for (x, y) in a.psi0.iter().zip(&b.psi0) {
        assert!((x - y).abs() < 1e-9);
    }
}

/// Current j2 for phi = 0 as a function of the local psi value, computed
/// directly from the profile on the same velocity grid.
fn current(fam: &FamilyProfile, g: &VelocityGrid, psi: f64) -> f64 {
    let mut j = 0.0;
    for s in Species::BOTH {
        for k in 0..g.len() {
            let (v1, v2) = g.velocity(k);
            let gm = lorentz(v1, v2);
            j += s.sign() * g.weight(k) * v2 / gm * fam.profile.eval(s, gm, v2 + s.sign() * psi).mu;
        }
    }
    j
}

/// psi'' = -j2(psi) from psi(0) = a, psi'(0) = 0 with classical RK4; returns
/// psi on `xs` and psi'(P/2).
fn shoot(fam: &FamilyProfile, g: &VelocityGrid, a: f64, period: f64, xs: &[f64]) -> (Vec<f64>, f64) {
    let steps = 4000;
    let h = period / steps as f64;
    let f = |y: [f64; 2]| [y[1], -current(fam, g, y[0])];
    let mut y = [a, 0.0];
    let mut out = vec![0.0; xs.len()];
    let mut half = 0.0;
    let per_node = steps / xs.len();
    for n in 0..steps {
        if n % per_node == 0 {
            out[n / per_node] = y[0];
        }
        if n == steps / 2 {
            half = y[1];
        }
        let k1 = f(y);
        let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    }
    (out, half)
}

#[test]
fn magnetic_equilibrium_matches_shooting() {
    let period = 7.0;
    let (fam, g) = magnetic(period);
    let fields = solve_seeded(&fam, &g, 0.0);
    let amp = fields.psi0[0];
    assert!(amp > 0.05, "amplitude {amp}");
    let xs = uniform_nodes(32, period);
    // secant on the amplitude so that psi'(P/2) = 0
    let (mut a0, mut a1) = (0.9 * amp, 1.1 * amp);
    let mut f0 = shoot(&fam, &g, a0, period, &xs).1;
    let mut f1 = shoot(&fam, &g, a1, period, &xs).1;
    for _ in 0..30 {
        let a2 = a1 - f1 * (a1 - a0) / (f1 - f0);
        a0 = a1;
        f0 = f1;
        a1 = a2;
        f1 = shoot(&fam, &g, a1, period, &xs).1;
        if f1.abs() < 1e-14 {
            break;
        }
    }
    let (oracle, _) = shoot(&fam, &g, a1, period, &xs);
    let mean = oracle.iter().sum::<f64>() / oracle.len() as f64;
    for (p, o) in fields.psi0.iter().zip(&oracle) {
        assert!((p - (o - mean)).abs() < 1e-8, "solver {p} vs shooting {}", o - mean);
    }
}

#[test]
fn perturbed_potential_residual_scales_with_wavenumber() {
    let g = VelocityGrid::new(32, 5.0).unwrap();
    let fam = HomogeneousMaxwellian { temperature: 0.3, density: 1.0 }.build(consts(5.0, 5.0), &g).unwrap();
    let eps = 1e-5;
    let k = 2.0 * PI / 5.0;
    let xs = uniform_nodes(16, 5.0);
    let phi: Vec<f64> = xs.iter().map(|x| eps * (k * x).sin()).collect();
    let fields = EquilibriumFields::from_potentials(5.0, phi, vec![0.0; 16]).unwrap();
    let r = equilibrium_residual(&fields, &fam.profile, &g);
    // d rho / d phi for a uniform state: sum over species of int mu_e dv
    let c = eval_coefficient_fields(&fam.profile, &EquilibriumFields::zero(5.0, 16).unwrap(), &g, 1e-3).unwrap();
    let predicted = eps * (k * k - c.mu_e[0]).abs();
    assert!((r.poisson - predicted).abs() < 1e-3 * predicted, "{} vs {predicted}", r.poisson);
}

/// Adaptive Simpson on [a, b].
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

#[test]
fn coefficient_fields_match_adaptive_quadrature() {
    let term = ProfileTerm { amplitude: 1.0, energy: EnergyShape::Exp { theta: 1.0 }, momentum: MomentumShape::Flat };
    let model = DistributionModel::Analytic { plus: vec![term], minus: vec![term] };
    let profile = EquilibriumProfile::new(model, 4.0, 3.0, 1e3, 30.0, 0.0).unwrap();
    let g = VelocityGrid::new(480, 30.0).unwrap();
    let fields = EquilibriumFields::zero(4.0, 8).unwrap();
    let c = eval_coefficient_fields(&profile, &fields, &g, 1e-6).unwrap();
    // polar form: int mu_e dv = 2 pi int r mu_e(sqrt(1 + r^2)) dr, two species
    let oracle = 2.0 * 2.0 * PI * simpson(&|r: f64| -r * (-((1.0 + r * r).sqrt() - 1.0)).exp(), 0.0, 60.0, 1e-13);
    for v in &c.mu_e {
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
    }
    assert!(c.mu_p.iter().chain(&c.v2_mu_p).all(|v| v.abs() < 1e-14));
}

#[test]
fn tail_check_flags_truncated_profiles() {
    let term = ProfileTerm { amplitude: 1.0, energy: EnergyShape::Exp { theta: 2.0 }, momentum: MomentumShape::Flat };
    let model = DistributionModel::Analytic { plus: vec![term], minus: vec![term] };
    let profile = EquilibriumProfile::new(model, 4.0, 3.0, 1e3, 3.0, 0.0).unwrap();
    let g = VelocityGrid::new(24, 3.0).unwrap();
    let fields = EquilibriumFields::zero(4.0, 8).unwrap();
    let err = eval_coefficient_fields(&profile, &fields, &g, 1e-6).unwrap_err();
    assert!(matches!(err, EquilibriumError::TailTooLarge { .. }));
}
