//! Run configuration, read from a sectioned TOML file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vmstab_equilibrium::{HomogeneousMaxwellian, NonmonotoneRing, PurelyMagneticSymmetric, TwoStream};

/// Which equilibrium to analyze.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProfileSpec {
    HomogeneousMaxwellian(HomogeneousMaxwellian),
    TwoStream(TwoStream),
    PurelyMagneticSymmetric(PurelyMagneticSymmetric),
    NonmonotoneRing(NonmonotoneRing),
    /// CSV with header `e,p,mu_plus,mu_minus`; a relative path is taken
    /// from the config file's directory.
    Table { path: PathBuf, n0: f64 },
}

impl ProfileSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileSpec::HomogeneousMaxwellian(_) => "homogeneous-maxwellian",
            ProfileSpec::TwoStream(_) => "two-stream",
            ProfileSpec::PurelyMagneticSymmetric(_) => "purely-magnetic-symmetric",
            ProfileSpec::NonmonotoneRing(_) => "nonmonotone-ring",
            ProfileSpec::Table { .. } => "table",
        }
    }
}

/// Weight c (1 + |e|)^(-alpha) bounding |mu_e| + |mu_p|.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightConfig {
    pub alpha: f64,
    pub c_weight: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self { alpha: 3.0, c_weight: 1e4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub period: f64,
    /// Fourier modes M per potential.
    pub modes: usize,
    pub nx: usize,
    /// Gauss-Legendre nodes per velocity direction.
    pub nv: usize,
    pub v_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative to the spectral norm.
    pub zero_tol: f64,
    pub l_tol: f64,
    pub gap_tol: f64,
    pub eig_tol: f64,
    pub lambda_tol: f64,
    pub solve_tol: f64,
    pub neutrality_tol: f64,
    pub tail_tol: f64,
    pub mask_tol: f64,
    pub asym_tol: f64,
    pub proj_tol: f64,
    pub lambda_proj: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero_tol: 1e-8,
            l_tol: 1e-8,
            gap_tol: 1e-8,
            eig_tol: 1e-10,
            lambda_tol: 1e-10,
            solve_tol: 1e-10,
            neutrality_tol: 1e-8,
            tail_tol: 1e-4,
            mask_tol: 1e-13,
            asym_tol: 5e-2,
            proj_tol: 0.25,
            lambda_proj: 1e-2,
        }
    }
}

impl Tolerances {
    fn check(&self) -> Result<()> {
        let all = [
            ("zero_tol", self.zero_tol),
            ("l_tol", self.l_tol),
            ("gap_tol", self.gap_tol),
            ("eig_tol", self.eig_tol),
            ("lambda_tol", self.lambda_tol),
            ("solve_tol", self.solve_tol),
            ("neutrality_tol", self.neutrality_tol),
            ("tail_tol", self.tail_tol),
            ("mask_tol", self.mask_tol),
            ("asym_tol", self.asym_tol),
            ("proj_tol", self.proj_tol),
            ("lambda_proj", self.lambda_proj),
        ];
        for (name, v) in all {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tolerances.{name} must be positive, got {v}");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub points: usize,
    pub lambda_min: f64,
    pub lambda_start: f64,
    pub max_doublings: usize,
    /// Truncation ranks n; empty means M/2, M, 2M.
    pub ranks: Vec<usize>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { points: 40, lambda_min: 1e-2, lambda_start: 0.5, max_doublings: 30, ranks: vec![] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitConfig {
    /// Equispaced samples per orbit period.
    pub samples: usize,
    /// Longest period searched for.
    pub horizon: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self { samples: 64, horizon: 2000.0, rtol: 1e-10, atol: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceConfig {
    /// Each level multiplies M, N_x and N_v by the factor.
    pub factors: Vec<usize>,
    /// Also locate the crossing at every level.
    pub crossing: bool,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self { factors: vec![1, 2], crossing: false }
    }
}

/// Dispersion-root cross-check for profiles without equilibrium fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Velocity nodes of the independent grid; 0 disables the check.
    pub nv: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { nv: 192, lambda_min: 1e-3, lambda_max: 10.0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Skip the CSV plot data.
    pub no_csv: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileSpec,
    #[serde(default)]
    pub weight: WeightConfig,
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub orbit: OrbitConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// Where and how results go; not part of the config hash.
    #[serde(default, skip_serializing)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(g.period > 0.0 && g.period.is_finite()) {
            bail!("grid.period must be positive, got {}", g.period);
        }
        if g.modes == 0 {
            bail!("grid.modes must be at least 1");
        }
        if g.nx < 4 * g.modes {
            bail!("grid.nx = {} is below 4 * modes = {}", g.nx, 4 * g.modes);
        }
        if g.nv < 2 {
            bail!("grid.nv must be at least 2");
        }
        if !(g.v_max > 0.0 && g.v_max.is_finite()) {
            bail!("grid.v_max must be positive, got {}", g.v_max);
        }
        self.tolerances.check()?;
        let s = &self.scan;
        if s.points < 2 || !(s.lambda_min > 0.0) || !(s.lambda_start > 0.0) {
            bail!("scan needs points >= 2 and positive lambda_min, lambda_start");
        }
        if s.ranks.contains(&0) {
            bail!("scan.ranks must be positive");
        }
        if self.orbit.samples < 4 || !(self.orbit.horizon > 0.0) {
            bail!("orbit needs samples >= 4 and a positive horizon");
        }
        if self.convergence.factors.is_empty() || self.convergence.factors.contains(&0) {
            bail!("convergence.factors must be a nonempty list of positive integers");
        }
        let o = &self.oracle;
        if o.nv > 0 && !(o.lambda_min > 0.0 && o.lambda_max > o.lambda_min) {
            bail!("oracle needs 0 < lambda_min < lambda_max");
        }
        Ok(())
    }

    /// Sizes that are not powers of two (allowed, but flagged).
    pub fn warnings(&self) -> Vec<String> {
        let g = &self.grid;
        [("modes", g.modes), ("nx", g.nx), ("nv", g.nv)]
            .into_iter()
            .filter(|(_, v)| !v.is_power_of_two())
            .map(|(k, v)| format!("grid.{k} = {v} is not a power of two"))
            .collect()
    }
}

/// A parsed config together with where it came from and its hash.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    /// SHA-256 over the canonical JSON form of the config, followed by the
    /// bytes of the profile table if there is one.
    pub sha256: String,
}

impl LoadedConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config = RunConfig::parse(&text).with_context(|| format!("in config {}", path.display()))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::new(config, base_dir)
    }

    pub fn new(config: RunConfig, base_dir: PathBuf) -> Result<Self> {
        config.validate()?;
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&config)?);
        if let ProfileSpec::Table { path, .. } = &config.profile {
            let p = base_dir.join(path);
            h.update(std::fs::read(&p).with_context(|| format!("reading profile table {}", p.display()))?);
        }
        Ok(Self { config, base_dir, sha256: hex::encode(h.finalize()) })
    }

    pub fn table_path(&self) -> Option<PathBuf> {
        match &self.config.profile {
            ProfileSpec::Table { path, .. } => Some(self.base_dir.join(path)),
            _ => None,
        }
    }
}
