//! Configuration loading and merging. Precedence, highest first:
//! command-line flags, then the TOML config file, then preset defaults.
//! Unknown keys anywhere in the file are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use dyndict::dictionary::{BasisSpec, Dictionary};
use dyndict::linalg::Vector;
use dyndict::optimizers::{BatchSize, OptimizerConfig};
use dyndict::presets::{ChuaPreset, HeatPreset, OuPreset, TripleWellPreset};

use crate::{CliError, CommonFlags, FitFlags};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum System {
    Ou,
    TripleWell,
    Chua,
    Heat,
    File(PathBuf),
}

impl System {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "ou" => Ok(System::Ou),
            "triple-well" => Ok(System::TripleWell),
            "chua" => Ok(System::Chua),
            "heat" => Ok(System::Heat),
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(System::File(PathBuf::from(path))),
                _ => Err(CliError::config(format!(
                    "unknown system `{other}` (expected ou, triple-well, chua, heat, or file:<path>)"
                ))),
            },
        }
    }

    pub fn name(&self) -> &str {
        match self {
            System::Ou => "ou",
            System::TripleWell => "triple-well",
            System::Chua => "chua",
            System::Heat => "heat",
            System::File(_) => "file",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    Edmd,
    Sindy,
    Pdefind,
}

impl FitKind {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "edmd" => Ok(FitKind::Edmd),
            "sindy" => Ok(FitKind::Sindy),
            "pdefind" => Ok(FitKind::Pdefind),
            other => Err(CliError::config(format!(
                "unknown fit kind `{other}` (expected edmd, sindy, or pdefind)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            FitKind::Edmd => "edmd",
            FitKind::Sindy => "sindy",
            FitKind::Pdefind => "pdefind",
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub system: Option<String>,
    pub fit: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub data: Option<PathBuf>,
    pub threshold: Option<f64>,
    pub params: Option<ParamsSection>,
    pub chua: Option<ChuaSection>,
    pub heat: Option<HeatSection>,
    pub dictionary: Option<DictionarySection>,
    pub optimizer: Option<OptimizerSection>,
    pub scan: Option<ScanSection>,
    pub grid: Option<GridSection>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub tau: Option<f64>,
    pub eta: Option<f64>,
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ChuaSection {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub d: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub eta: Option<f64>,
    pub steps: Option<usize>,
    pub stride: Option<usize>,
    pub w1_init: Option<f64>,
    pub w2_init: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct HeatSection {
    pub kappa0: Option<f64>,
    pub chi: Option<f64>,
    pub rho: Option<f64>,
    pub cp: Option<f64>,
    pub x_lo: Option<f64>,
    pub x_hi: Option<f64>,
    pub left_bc: Option<f64>,
    pub right_bc: Option<f64>,
    pub nx: Option<usize>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub thin_stride: Option<usize>,
    pub chi_init: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionarySection {
    /// `gaussian` (1-D center grid) or `monomial` (all terms up to a total
    /// degree).
    pub family: String,
    pub n: Option<usize>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub bandwidth: Option<f64>,
    pub degree: Option<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BatchSetting {
    Count(usize),
    Word(String),
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub step_size: Option<f64>,
    pub max_iters: Option<usize>,
    pub batch: Option<BatchSetting>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub param: Option<String>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub resolution: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn resolve_system(&self, flag: Option<&str>) -> Result<System, CliError> {
        match flag.or(self.system.as_deref()) {
            Some(s) => System::parse(s),
            None => Err(CliError::config(
                "no system selected; pass --system or set `system` in the config file",
            )),
        }
    }

    /// Fit kind, defaulting by system: lagged-pair presets fit an evolution
    /// operator, chua fits a derivative model, heat fits a field equation.
    pub fn resolve_fit_kind(
        &self,
        flag: Option<&str>,
        system: &System,
        dataset_kind: Option<FitKind>,
    ) -> Result<FitKind, CliError> {
        if let Some(s) = flag.or(self.fit.as_deref()) {
            return FitKind::parse(s);
        }
        match system {
            System::Ou | System::TripleWell => Ok(FitKind::Edmd),
            System::Chua => Ok(FitKind::Sindy),
            System::Heat => Ok(FitKind::Pdefind),
            System::File(_) => dataset_kind.ok_or_else(|| {
                CliError::config("pass --kind (edmd, sindy, pdefind) for file datasets")
            }),
        }
    }
}

fn reject_flag(present: bool, flag: &str, system: &str) -> Result<(), CliError> {
    if present {
        return Err(CliError::config(format!(
            "--{flag} does not apply to the {system} system"
        )));
    }
    Ok(())
}

/// Data-generation seed: flag, then config file, then preset default.
pub fn data_seed(flag: Option<u64>, cfg: &FileConfig, fallback: u64) -> u64 {
    flag.or(cfg.seed).unwrap_or(fallback)
}

pub fn ou_preset(
    cfg: &FileConfig,
    flags: &CommonFlags,
    seed_flag: Option<u64>,
) -> Result<OuPreset, CliError> {
    let mut p = OuPreset::default();
    if let Some(s) = &cfg.params {
        p.alpha = s.alpha.unwrap_or(p.alpha);
        p.beta = s.beta.unwrap_or(p.beta);
        p.tau = s.tau.unwrap_or(p.tau);
        p.eta = s.eta.unwrap_or(p.eta);
        p.m = s.m.unwrap_or(p.m);
    }
    p.alpha = flags.alpha.unwrap_or(p.alpha);
    p.beta = flags.beta.unwrap_or(p.beta);
    p.tau = flags.tau.unwrap_or(p.tau);
    p.eta = flags.eta.unwrap_or(p.eta);
    p.m = flags.m.unwrap_or(p.m);
    p.seed = data_seed(seed_flag, cfg, p.seed);
    Ok(p)
}

pub fn triple_well_preset(
    cfg: &FileConfig,
    flags: &CommonFlags,
    seed_flag: Option<u64>,
) -> Result<TripleWellPreset, CliError> {
    reject_flag(flags.alpha.is_some(), "alpha", "triple-well")?;
    let mut p = TripleWellPreset::default();
    if let Some(s) = &cfg.params {
        p.beta = s.beta.unwrap_or(p.beta);
        p.tau = s.tau.unwrap_or(p.tau);
        p.eta = s.eta.unwrap_or(p.eta);
        p.m = s.m.unwrap_or(p.m);
    }
    p.beta = flags.beta.unwrap_or(p.beta);
    p.tau = flags.tau.unwrap_or(p.tau);
    p.eta = flags.eta.unwrap_or(p.eta);
    p.m = flags.m.unwrap_or(p.m);
    p.seed = data_seed(seed_flag, cfg, p.seed);
    Ok(p)
}

pub fn chua_preset(cfg: &FileConfig, flags: &CommonFlags) -> Result<ChuaPreset, CliError> {
    reject_flag(flags.tau.is_some(), "tau", "chua")?;
    reject_flag(flags.m.is_some(), "m", "chua")?;
    let mut p = ChuaPreset::default();
    if let Some(s) = &cfg.chua {
        p.a = s.a.unwrap_or(p.a);
        p.b = s.b.unwrap_or(p.b);
        p.d = s.d.unwrap_or(p.d);
        p.alpha = s.alpha.unwrap_or(p.alpha);
        p.beta = s.beta.unwrap_or(p.beta);
        p.eta = s.eta.unwrap_or(p.eta);
        p.steps = s.steps.unwrap_or(p.steps);
        p.stride = s.stride.unwrap_or(p.stride);
        p.basin_init = s.w1_init.unwrap_or(p.basin_init);
        p.w2_init = s.w2_init.unwrap_or(p.w2_init);
    }
    p.alpha = flags.alpha.unwrap_or(p.alpha);
    p.beta = flags.beta.unwrap_or(p.beta);
    p.eta = flags.eta.unwrap_or(p.eta);
    Ok(p)
}

pub fn heat_preset(cfg: &FileConfig, flags: &CommonFlags) -> Result<HeatPreset, CliError> {
    reject_flag(flags.alpha.is_some(), "alpha", "heat")?;
    reject_flag(flags.beta.is_some(), "beta", "heat")?;
    reject_flag(flags.tau.is_some(), "tau", "heat")?;
    reject_flag(flags.eta.is_some(), "eta", "heat")?;
    reject_flag(flags.m.is_some(), "m", "heat")?;
    let mut p = HeatPreset::default();
    if let Some(s) = &cfg.heat {
        p.spec.kappa0 = s.kappa0.unwrap_or(p.spec.kappa0);
        p.spec.chi = s.chi.unwrap_or(p.spec.chi);
        p.spec.rho = s.rho.unwrap_or(p.spec.rho);
        p.spec.cp = s.cp.unwrap_or(p.spec.cp);
        p.spec.x_lo = s.x_lo.unwrap_or(p.spec.x_lo);
        p.spec.x_hi = s.x_hi.unwrap_or(p.spec.x_hi);
        p.spec.left_bc = s.left_bc.unwrap_or(p.spec.left_bc);
        p.spec.right_bc = s.right_bc.unwrap_or(p.spec.right_bc);
        p.spec.nx = s.nx.unwrap_or(p.spec.nx);
        if s.dt.is_some() {
            p.spec.dt = s.dt;
        }
        p.spec.t_final = s.t_final.unwrap_or(p.spec.t_final);
        p.thin_stride = s.thin_stride.unwrap_or(p.thin_stride);
        p.chi_init = s.chi_init.unwrap_or(p.chi_init);
    }
    Ok(p)
}

fn parse_batch_word(s: &str) -> Result<BatchSize, CliError> {
    if s == "full" {
        return Ok(BatchSize::Full);
    }
    s.parse::<usize>().map(BatchSize::Size).map_err(|_| {
        CliError::config(format!("batch must be `full` or a positive integer, got `{s}`"))
    })
}

/// Merges optimizer settings onto `base`. Seed precedence: the global
/// `--seed` flag, then `[optimizer].seed`, then the top-level config seed,
/// then the preset default.
pub fn optimizer_config(
    base: OptimizerConfig,
    cfg: &FileConfig,
    flags: &FitFlags,
    seed_flag: Option<u64>,
) -> Result<OptimizerConfig, CliError> {
    let mut o = base;
    if let Some(s) = &cfg.optimizer {
        o.step_size = s.step_size.unwrap_or(o.step_size);
        o.max_iters = s.max_iters.unwrap_or(o.max_iters);
        o.tolerance = s.tolerance.unwrap_or(o.tolerance);
        o.beta1 = s.beta1.unwrap_or(o.beta1);
        o.beta2 = s.beta2.unwrap_or(o.beta2);
        o.epsilon = s.epsilon.unwrap_or(o.epsilon);
        if let Some(b) = &s.batch {
            o.batch = match b {
                BatchSetting::Count(k) => BatchSize::Size(*k),
                BatchSetting::Word(w) => parse_batch_word(w)?,
            };
        }
        o.seed = s.seed.unwrap_or(cfg.seed.unwrap_or(o.seed));
    } else if let Some(seed) = cfg.seed {
        o.seed = seed;
    }
    o.step_size = flags.step_size.unwrap_or(o.step_size);
    o.max_iters = flags.max_iters.unwrap_or(o.max_iters);
    o.tolerance = flags.tolerance.unwrap_or(o.tolerance);
    if let Some(b) = &flags.batch {
        o.batch = parse_batch_word(b)?;
    }
    if let Some(seed) = seed_flag {
        o.seed = seed;
    }
    Ok(o)
}

/// All monomial exponent vectors over `dim` coordinates with total degree
/// at most `degree`, in graded order (degree 0 first).
fn monomial_exponents(dim: usize, degree: u32) -> Vec<Vec<u32>> {
    fn exact(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, coord: usize, left: u32) {
        if coord + 1 == current.len() {
            current[coord] = left;
            out.push(current.clone());
            current[coord] = 0;
            return;
        }
        for e in 0..=left {
            current[coord] = e;
            exact(out, current, coord + 1, left - e);
        }
        current[coord] = 0;
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; dim.max(1)];
    for total in 0..=degree {
        exact(&mut out, &mut current, 0, total);
    }
    out
}

/// Builds the dictionary described by a `[dictionary]` section.
pub fn build_dictionary(
    section: &DictionarySection,
    state_dim: usize,
) -> Result<(Dictionary, Vector), CliError> {
    match section.family.as_str() {
        "gaussian" => {
            let n = section
                .n
                .ok_or_else(|| CliError::config("gaussian dictionary needs `n`"))?;
            let lo = section
                .lo
                .ok_or_else(|| CliError::config("gaussian dictionary needs `lo`"))?;
            let hi = section
                .hi
                .ok_or_else(|| CliError::config("gaussian dictionary needs `hi`"))?;
            let bandwidth = section
                .bandwidth
                .ok_or_else(|| CliError::config("gaussian dictionary needs `bandwidth`"))?;
            if state_dim != 1 {
                return Err(CliError::config(format!(
                    "gaussian center grids are 1-D; the dataset has {state_dim} coordinates"
                )));
            }
            if n < 2 || !(lo < hi) || !(bandwidth > 0.0) {
                return Err(CliError::config(
                    "gaussian dictionary needs n >= 2, lo < hi, bandwidth > 0",
                ));
            }
            let specs: Vec<BasisSpec> = (0..n)
                .map(|j| BasisSpec::GaussianRbf {
                    center: vec![lo + (hi - lo) * j as f64 / (n - 1) as f64],
                    bandwidth,
                })
                .collect();
            Ok(Dictionary::build(state_dim, &specs)?)
        }
        "monomial" => {
            let degree = section
                .degree
                .ok_or_else(|| CliError::config("monomial dictionary needs `degree`"))?;
            let specs: Vec<BasisSpec> = monomial_exponents(state_dim, degree)
                .into_iter()
                .map(BasisSpec::Monomial)
                .collect();
            Ok(Dictionary::build(state_dim, &specs)?)
        }
        other => Err(CliError::config(format!(
            "unknown dictionary family `{other}` (expected gaussian or monomial)"
        ))),
    }
}
