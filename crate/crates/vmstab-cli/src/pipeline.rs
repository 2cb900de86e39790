use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vmstab_analysis::{
    dominant_dispersion_root, evaluate_criterion, mode_residual, reconstruct_mode, refine_n, stable_from,
    truncated_counts, CriterionOptions, CriterionVerdict, CrossingOptions, RateOperators, RefineOptions, ScanOptions,
    Verdict,
};
use vmstab_equilibrium::VelocityGrid;
use vmstab_inertia::ZeroTol;
use vmstab_operators::{assemble_operator_set, OperatorContext, OperatorSet};

use crate::config::LoadedConfig;
use crate::report::*;
use crate::setup::{assembly_options, build_profile, solve, Equilibrium, Resolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Equilibrium,
    Criterion,
    Mode,
    Convergence,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::Criterion => "criterion",
            Command::Mode => "mode",
            Command::Convergence => "convergence",
        }
    }
}

/// What a finished command leaves behind.
#[derive(Clone, Debug)]
pub struct Outcome {
    /// 0 on success, 2 when the verdict is ambiguous.
    pub exit_code: u8,
    pub verdict: Option<Verdict>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    fn new(verdict: Option<Verdict>, files: Vec<PathBuf>) -> Self {
        let exit_code = if verdict == Some(Verdict::Ambiguous) { 2 } else { 0 };
        Self { exit_code, verdict, files }
    }
}

struct Run<'a> {
    cfg: &'a LoadedConfig,
    command: Command,
    out: &'a Path,
    seed: u64,
}

impl Run<'_> {
    fn header(&self) -> Header {
        Header {
            schema_version: SCHEMA_VERSION,
            command: self.command.name().into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: self.cfg.sha256.clone(),
            seed: self.seed,
            config: self.cfg.config.clone(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn csv_enabled(&self) -> bool {
        !self.cfg.config.output.no_csv
    }

    fn base_resolution(&self) -> Resolution {
        let g = &self.cfg.config.grid;
        Resolution { modes: g.modes, nx: g.nx, nv: g.nv }
    }

    fn criterion_options(&self) -> CriterionOptions {
        let t = &self.cfg.config.tolerances;
        CriterionOptions { zero_tol: ZeroTol::Relative(t.zero_tol), l_tol: t.l_tol }
    }

    fn refine_options(&self, modes: usize) -> RefineOptions {
        let c = &self.cfg.config;
        let t = &c.tolerances;
        let zero_tol = ZeroTol::Relative(t.zero_tol);
        let ranks = if c.scan.ranks.is_empty() {
            let mut r = vec![(modes / 2).max(1), modes, 2 * modes];
            r.dedup();
            r
        } else {
            c.scan.ranks.clone()
        };
        RefineOptions {
            ranks,
            gap_tol: t.gap_tol,
            scan: ScanOptions {
                points: c.scan.points,
                lambda_min: c.scan.lambda_min,
                lambda_start: c.scan.lambda_start,
                max_doublings: c.scan.max_doublings,
                zero_tol,
            },
            crossing: CrossingOptions { eig_tol: t.eig_tol, lambda_tol: t.lambda_tol, max_iter: 60, zero_tol },
        }
    }
}

fn summary(eq: &Equilibrium, tol: f64) -> EquilibriumSummary {
    EquilibriumSummary {
        iterations: eq.solve.iterations,
        residual: eq.solve.residual,
        tol,
        consistency_defect: eq.fields.consistency_defect(),
    }
}

/// Everything the lambda = 0 stage produces.
struct Stage0 {
    eq: Equilibrium,
    ctx: OperatorContext,
    ops0: OperatorSet,
    criterion: CriterionVerdict,
}

fn stage0(run: &Run, res: Resolution) -> Result<Stage0> {
    let eq = solve(run.cfg, res)?;
    let ctx = eq.context(run.cfg)?;
    let ops0 = assemble_operator_set(0.0, &ctx, res.modes, &assembly_options(run.cfg))
        .context("assembling the lambda = 0 operators")?;
    let criterion = evaluate_criterion(&ops0, &run.criterion_options()).context("evaluating the criterion")?;
    Ok(Stage0 { eq, ctx, ops0, criterion })
}

pub fn run_pipeline(cfg: &LoadedConfig, command: Command, out: &Path, seed: u64) -> Result<Outcome> {
    fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;
    let run = Run { cfg, command, out, seed };
    match command {
        Command::Equilibrium => equilibrium(&run),
        Command::Criterion => criterion(&run),
        Command::Mode => mode(&run),
        Command::Convergence => convergence(&run),
    }
}

fn equilibrium(run: &Run) -> Result<Outcome> {
    let eq = solve(run.cfg, run.base_resolution())?;
    let report = EquilibriumReport {
        header: run.header(),
        grid: eq.grid.clone(),
        equilibrium: summary(&eq, run.cfg.config.tolerances.solve_tol),
    };
    let mut files = vec![run.path("equilibrium.json")];
    write_json(&files[0], &report)?;
    if run.csv_enabled() {
        files.push(run.path("fields.csv"));
        write_fields_csv(&files[1], &eq.fields)?;
    }
    Ok(Outcome::new(None, files))
}

fn criterion(run: &Run) -> Result<Outcome> {
    let s = stage0(run, run.base_resolution())?;
    let t = &run.cfg.config.tolerances;
    let ranks: Vec<usize> = (1..=2 * s.eq.res.modes).collect();
    let truncation = truncated_counts(&s.ops0, &ranks, t.gap_tol, ZeroTol::Relative(t.zero_tol))
        .context("counting the truncated operators")?;
    let report = CriterionReport {
        header: run.header(),
        grid: s.eq.grid.clone(),
        equilibrium: summary(&s.eq, t.solve_tol),
        assembly: AssemblyDiagnostics::new(&s.ops0, t.asym_tol, t.proj_tol),
        stable_from: stable_from(&truncation),
        truncation,
        criterion: s.criterion,
    };
    let path = run.path("criterion.json");
    write_json(&path, &report)?;
    Ok(Outcome::new(Some(report.criterion.verdict), vec![path]))
}

/// Unit-free random vector with a zero constant phi entry.
fn control_vector(seed: u64, n: usize) -> (Vec<f64>, Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi = (0..n).map(|k| if k == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) }).collect();
    let psi = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (phi, psi, rng.gen_range(-1.0..1.0))
}

fn oracle_check(run: &Run, eq: &Equilibrium, lambda0: f64) -> Result<Option<OracleCheck>> {
    let c = &run.cfg.config;
    if c.oracle.nv == 0 || !eq.fields.is_zero() {
        return Ok(None);
    }
    let range = (c.oracle.lambda_min, c.oracle.lambda_max);
    let modes = eq.res.modes;
    let fine = VelocityGrid::new(c.oracle.nv, c.grid.v_max)?;
    let (profile, _) = build_profile(run.cfg, eq.res.nx, &fine)?;
    let independent = dominant_dispersion_root(&profile, &fine, c.grid.period, modes, range);
    let same_grid = dominant_dispersion_root(&eq.profile, &eq.vgrid, c.grid.period, modes, range);
    Ok(Some(OracleCheck {
        nv: c.oracle.nv,
        relative_gap: independent.map(|r| (lambda0 - r.lambda).abs() / r.lambda),
        independent,
        same_grid,
    }))
}

fn mode(run: &Run) -> Result<Outcome> {
    let s = stage0(run, run.base_resolution())?;
    let t = &run.cfg.config.tolerances;
    let rates = RateOperators::new(&s.ctx, s.eq.res.modes, assembly_options(run.cfg));
    let r = refine_n(&rates, &s.ops0, &run.refine_options(s.eq.res.modes)).context("locating the kernel crossing")?;
    let m = &r.mode;
    let growing = reconstruct_mode(r.lambda0, &m.phi, &m.psi, m.b, &s.ctx)?;
    let residual = mode_residual(&growing, &s.ctx)?;
    let (phi, psi, b) = control_vector(run.seed, m.phi.len());
    let control = reconstruct_mode(r.lambda0, &phi, &psi, b, &s.ctx)?;
    let control_residual = mode_residual(&control, &s.ctx)?;
    let oracle = oracle_check(run, &s.eq, r.lambda0)?;

    let mut files = vec![run.path("mode.json")];
    if run.csv_enabled() {
        files.push(run.path("scan.csv"));
        write_scan_csv(&files[1], &r.scan, r.crossing.index)?;
        files.push(run.path("mode_fields.csv"));
        write_mode_csv(&files[2], &growing)?;
    }
    let report = ModeReport {
        header: run.header(),
        grid: s.eq.grid.clone(),
        equilibrium: summary(&s.eq, t.solve_tol),
        assembly: AssemblyDiagnostics::new(&s.ops0, t.asym_tol, t.proj_tol),
        criterion: s.criterion,
        lambda0: r.lambda0,
        crossing: r.crossing,
        history: r.history,
        contracting: r.contracting,
        scan: r.scan,
        mode: ModeCoefficients { phi: m.phi.clone(), psi: m.psi.clone(), b: m.b },
        residual,
        control_residual,
        oracle,
    };
    write_json(&files[0], &report)?;
    Ok(Outcome::new(Some(report.criterion.verdict), files))
}

fn convergence(run: &Run) -> Result<Outcome> {
    let c = &run.cfg.config;
    let mut levels: Vec<ConvergenceLevel> = vec![];
    for &factor in &c.convergence.factors {
        let res = run.base_resolution().scaled(factor);
        let s = stage0(run, res).with_context(|| format!("at refinement factor {factor}"))?;
        let lambda0 = if c.convergence.crossing {
            let rates = RateOperators::new(&s.ctx, res.modes, assembly_options(run.cfg));
            let r = refine_n(&rates, &s.ops0, &run.refine_options(res.modes))
                .with_context(|| format!("locating the crossing at refinement factor {factor}"))?;
            Some(r.lambda0)
        } else {
            None
        };
        levels.push(ConvergenceLevel {
            factor,
            grid: s.eq.grid.clone(),
            verdict: s.criterion.verdict,
            lhs: s.criterion.lhs,
            rhs: s.criterion.rhs,
            l0: s.criterion.l0,
            neg_a1: s.criterion.a1.neg,
            lambda0,
        });
    }
    let first = &levels[0];
    let consistent = levels.iter().all(|l| (l.lhs, l.rhs) == (first.lhs, first.rhs));
    let finest = levels.last().expect("at least one level").verdict;
    let verdict = if consistent { finest } else { Verdict::Ambiguous };
    let lambdas: Option<Vec<f64>> = levels.iter().map(|l| l.lambda0).collect();
    let lambda0_change = lambdas
        .filter(|v| v.len() > 1)
        .map(|v| v.windows(2).map(|w| (w[1] - w[0]).abs() / w[1]).fold(0.0, f64::max));
    let report = ConvergenceReport { header: run.header(), levels, consistent, verdict, lambda0_change };
    let path = run.path("convergence.json");
    write_json(&path, &report)?;
    Ok(Outcome::new(Some(verdict), vec![path]))
}
