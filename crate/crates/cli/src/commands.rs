//! The five subcommands. Every command resolves its settings through
//! [`crate::config`], runs to completion in the foreground, writes
//! plot-ready CSV/JSON artifacts into the output directory, and never
//! mutates its input files.

use std::path::{Path, PathBuf};

use dyndict::benchmarks::{self, BENCHMARK_NAMES};
use dyndict::koopman::{self, KoopmanError};
use dyndict::linalg::{Matrix, Vector};
use dyndict::model_io::{self, Provenance};
use dyndict::optimizers::{HistoryRecord, OptimError, OptimizerConfig, StopReason};
use dyndict::simulate::{PairKind, TrajectoryData};
use dyndict::sysid::{self, SysidError};

use crate::config::{self, FileConfig, FitKind, System};
use crate::{BenchmarkFlags, CliError, CommonFlags, FitFlags, ScanFlags, SpectrumFlags};

pub struct Ctx {
    pub cfg: FileConfig,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub verbose: bool,
}

impl Ctx {
    fn out_dir(&self) -> Result<PathBuf, CliError> {
        let dir = self
            .out
            .clone()
            .or_else(|| self.cfg.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&dir).map_err(|e| {
            CliError::config(format!(
                "cannot create output directory {}: {e}",
                dir.display()
            ))
        })?;
        Ok(dir)
    }
}

/// What a dataset file on disk holds, read from its `# kind:` header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DataKind {
    Lagged,
    Derivative,
    Grid,
}

fn peek_kind(path: &Path) -> Result<DataKind, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    for line in text.lines().take(8) {
        if let Some(kind) = line.strip_prefix("# kind:") {
            return match kind.trim() {
                "lagged" => Ok(DataKind::Lagged),
                "derivative" => Ok(DataKind::Derivative),
                "grid" => Ok(DataKind::Grid),
                other => Err(CliError::config(format!(
                    "{}: unknown dataset kind `{other}`",
                    path.display()
                ))),
            };
        }
    }
    Err(CliError::config(format!(
        "{}: missing `# kind:` header; not a dataset file",
        path.display()
    )))
}

/// Explicit dataset path, if any: `--data`, then the config `data` key,
/// then a `file:` system path.
fn explicit_data_path(ctx: &Ctx, common: &CommonFlags, system: &System) -> Option<PathBuf> {
    common
        .data
        .clone()
        .or_else(|| ctx.cfg.data.clone())
        .or_else(|| match system {
            System::File(p) => Some(p.clone()),
            _ => None,
        })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn stop_reason_text(stop: StopReason) -> &'static str {
    match stop {
        StopReason::MaxIters => "iteration cap",
        StopReason::UpdateNormBelowTolerance => "update norm below tolerance",
        StopReason::LossPlateau => "loss plateau",
    }
}

/// Unwraps a parametric-fit result; on divergence the partial history is
/// written before the exit-4 error is raised.
fn check_koopman_fit<T>(
    res: Result<T, KoopmanError>,
    out: &Path,
) -> Result<T, CliError> {
    match res {
        Ok(v) => Ok(v),
        Err(KoopmanError::Optimizer(OptimError::Diverged {
            iteration,
            loss,
            history,
        })) => Err(divergence(iteration, loss, &history, out)),
        Err(e) => Err(e.into()),
    }
}

fn check_sysid_fit<T>(res: Result<T, SysidError>, out: &Path) -> Result<T, CliError> {
    match res {
        Ok(v) => Ok(v),
        Err(SysidError::Optimizer(OptimError::Diverged {
            iteration,
            loss,
            history,
        })) => Err(divergence(iteration, loss, &history, out)),
        Err(e) => Err(e.into()),
    }
}

fn divergence(iteration: usize, loss: f64, history: &[HistoryRecord], out: &Path) -> CliError {
    let path = out.join("history.csv");
    let note = match model_io::write_history(history, &path) {
        Ok(()) => format!("partial history written to {}", path.display()),
        Err(e) => format!("could not write partial history: {e}"),
    };
    CliError::Diverged(format!(
        "optimization diverged at iteration {iteration} with loss {loss:.3e}; {note}"
    ))
}

fn provenance(system: &str, seed: Option<u64>, history: &[HistoryRecord]) -> Provenance {
    Provenance {
        system: Some(system.to_string()),
        seed,
        optimizer: Some("alternating adam".to_string()),
        final_loss_coeff: history.last().map(|r| r.loss_coeff),
        final_loss_param: history.last().map(|r| r.loss_param),
    }
}

// ---------------------------------------------------------------- simulate

pub fn simulate(ctx: &Ctx, flags: &CommonFlags) -> Result<(), CliError> {
    let system = ctx.cfg.resolve_system(flags.system.as_deref())?;
    let out = ctx.out_dir()?;
    match &system {
        System::Ou => {
            let p = config::ou_preset(&ctx.cfg, flags, ctx.seed)?;
            if ctx.verbose {
                println!(
                    "simulate ou: alpha={} beta={} tau={} eta={} m={} seed={}",
                    p.alpha, p.beta, p.tau, p.eta, p.m, p.seed
                );
            }
            let data = p.generate()?;
            write_pairs(&data, &out)?;
        }
        System::TripleWell => {
            let p = config::triple_well_preset(&ctx.cfg, flags, ctx.seed)?;
            if ctx.verbose {
                println!(
                    "simulate triple-well: beta={} tau={} eta={} m={} seed={}",
                    p.beta, p.tau, p.eta, p.m, p.seed
                );
            }
            let data = p.generate()?;
            write_pairs(&data, &out)?;
        }
        System::Chua => {
            let p = config::chua_preset(&ctx.cfg, flags)?;
            if ctx.verbose {
                println!(
                    "simulate chua: a={} b={} d={} alpha={} beta={} eta={} steps={} (deterministic)",
                    p.a, p.b, p.d, p.alpha, p.beta, p.eta, p.steps
                );
            }
            let data = p.generate()?;
            write_pairs(&data, &out)?;
        }
        System::Heat => {
            let p = config::heat_preset(&ctx.cfg, flags)?;
            let field = p.solve()?;
            let path = out.join("grid.csv");
            model_io::write_grid(&field, &p.dataset_meta(), &path)?;
            println!(
                "wrote a {}x{} space-time grid to {}",
                field.nt(),
                field.nx(),
                path.display()
            );
        }
        System::File(_) => {
            return Err(CliError::config(
                "simulate generates named systems; `file:` datasets already exist",
            ));
        }
    }
    Ok(())
}

fn write_pairs(data: &TrajectoryData, out: &Path) -> Result<(), CliError> {
    let path = out.join("dataset.csv");
    model_io::write_dataset(data, &path)?;
    println!("wrote {} pairs to {}", data.len(), path.display());
    Ok(())
}

// --------------------------------------------------------------------- fit

pub fn fit(ctx: &Ctx, flags: &FitFlags) -> Result<(), CliError> {
    let system = ctx.cfg.resolve_system(flags.common.system.as_deref())?;
    let out = ctx.out_dir()?;
    let data_path = explicit_data_path(ctx, &flags.common, &system);
    let peeked = match &data_path {
        Some(p) => Some(peek_kind(p)?),
        None => None,
    };
    let inferred = peeked.map(|k| match k {
        DataKind::Lagged => FitKind::Edmd,
        DataKind::Derivative => FitKind::Sindy,
        DataKind::Grid => FitKind::Pdefind,
    });
    let kind = ctx
        .cfg
        .resolve_fit_kind(flags.kind.as_deref(), &system, inferred)?;
    if ctx.verbose {
        println!(
            "fit: system={} kind={} out={}",
            system.name(),
            kind.name(),
            out.display()
        );
    }
    match kind {
        FitKind::Edmd => fit_edmd(ctx, flags, &system, data_path, &out),
        FitKind::Sindy => fit_sindy(ctx, flags, &system, data_path, &out),
        FitKind::Pdefind => fit_pdefind(ctx, flags, &system, data_path, &out),
    }
}

fn load_pairs(
    path: &Path,
    want: PairKindWanted,
) -> Result<TrajectoryData, CliError> {
    let data = model_io::read_dataset(path)?;
    match (want, &data.kind) {
        (PairKindWanted::Lagged, PairKind::Lagged { .. })
        | (PairKindWanted::Derivative, PairKind::Derivative) => Ok(data),
        (PairKindWanted::Lagged, PairKind::Derivative) => Err(CliError::config(
            "evolution-operator fits need lagged snapshot pairs; this dataset holds derivative pairs",
        )),
        (PairKindWanted::Derivative, PairKind::Lagged { .. }) => Err(CliError::config(
            "derivative-model fits need (state, derivative) pairs; this dataset holds lagged pairs",
        )),
    }
}

#[derive(Clone, Copy)]
enum PairKindWanted {
    Lagged,
    Derivative,
}

fn fit_edmd(
    ctx: &Ctx,
    flags: &FitFlags,
    system: &System,
    data_path: Option<PathBuf>,
    out: &Path,
) -> Result<(), CliError> {
    let data = match &data_path {
        Some(p) => load_pairs(p, PairKindWanted::Lagged)?,
        None => match system {
            System::Ou => config::ou_preset(&ctx.cfg, &flags.common, ctx.seed)?.generate()?,
            System::TripleWell => {
                config::triple_well_preset(&ctx.cfg, &flags.common, ctx.seed)?.generate()?
            }
            _ => {
                return Err(CliError::config(format!(
                    "the {} preset does not provide lagged pairs; pass --data",
                    system.name()
                )))
            }
        },
    };
    let PairKind::Lagged { tau } = data.kind else {
        unreachable!("load_pairs enforces the pair kind");
    };

    let (dict, w0) = match (&ctx.cfg.dictionary, system) {
        (Some(section), _) => config::build_dictionary(section, data.dim())?,
        (None, System::Ou) => config::ou_preset(&ctx.cfg, &flags.common, ctx.seed)?.dictionary(),
        (None, System::TripleWell) => {
            config::triple_well_preset(&ctx.cfg, &flags.common, ctx.seed)?.dictionary()
        }
        (None, _) => {
            return Err(CliError::config(
                "a [dictionary] section is required to fit this dataset",
            ))
        }
    };
    let base = match system {
        System::Ou => config::ou_preset(&ctx.cfg, &flags.common, ctx.seed)?.optimizer,
        System::TripleWell => {
            config::triple_well_preset(&ctx.cfg, &flags.common, ctx.seed)?.optimizer
        }
        _ => OptimizerConfig::default(),
    };
    let optimizer = config::optimizer_config(base, &ctx.cfg, flags, ctx.seed)?;

    let (mut model, fit) = check_koopman_fit(
        koopman::fit_parametric_edmd(&data.x, &data.y, tau, &dict, w0, None, None, &optimizer),
        out,
    )?;
    // final coefficients come from the closed-form solve at the learned
    // dictionary parameters, as in the presets
    let psi_x = model.dictionary.evaluate(&data.x, &model.params)?;
    let psi_y = model.dictionary.evaluate(&data.y, &model.params)?;
    model.k = koopman::edmd_solve(&psi_x, &psi_y, None)?;

    model_io::write_history(&fit.history, &out.join("history.csv"))?;
    let prov = provenance(&data.meta.system, data.meta.seed, &fit.history);
    model_io::save_koopman_model(&model, &prov, &out.join("model.json"))?;

    let spectral = model.spectral()?;
    let eigenvalues = &spectral.spectrum.eigenvalues;
    model_io::write_eigenvalues(eigenvalues, &out.join("eigenvalues.csv"))?;
    let points = eigen_grid(&ctx.cfg, Some(&data), model.dictionary.state_dim(), None)?;
    let values = spectral.eigenfunction_values(
        &model.dictionary,
        &model.params,
        &points,
        eigenvalues.len(),
    )?;
    model_io::write_eigenfunctions(&points, &values, &out.join("eigenfunctions.csv"))?;

    let last = fit.history.last();
    println!(
        "fit finished after {} iterations ({}); residual {:.4e}, score {:.4}",
        fit.history.len(),
        stop_reason_text(fit.stop),
        last.map_or(f64::NAN, |r| r.loss_coeff),
        last.map_or(f64::NAN, |r| r.loss_param),
    );
    let top: Vec<String> = eigenvalues
        .iter()
        .take(3)
        .map(|l| format!("{:.4}", l.norm()))
        .collect();
    println!("top eigenvalue moduli: {}", top.join(", "));
    println!("wrote model.json, history.csv, eigenvalues.csv, eigenfunctions.csv");
    Ok(())
}

/// Points to evaluate eigenfunctions at: a 1-D line uses `[grid]` bounds or
/// the sampled data range; higher dimensions subsample the data columns.
fn eigen_grid(
    cfg: &FileConfig,
    data: Option<&TrajectoryData>,
    dim: usize,
    bounds_override: Option<(Option<f64>, Option<f64>, Option<usize>)>,
) -> Result<Matrix, CliError> {
    let section = cfg.grid.clone().unwrap_or_default();
    let (flag_lo, flag_hi, flag_n) = bounds_override.unwrap_or((None, None, None));
    let n = flag_n.or(section.n).unwrap_or(200).max(1);
    if dim == 1 {
        let data_range = data.map(|d| {
            let lo = d.x.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = d.x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        });
        let lo = flag_lo
            .or(section.lo)
            .or(data_range.map(|r| r.0))
            .unwrap_or(-2.0);
        let hi = flag_hi
            .or(section.hi)
            .or(data_range.map(|r| r.1))
            .unwrap_or(2.0);
        if !(lo <= hi) {
            return Err(CliError::config(format!(
                "eigenfunction grid needs lo <= hi, got [{lo}, {hi}]"
            )));
        }
        let values = linspace(lo, hi, n);
        Ok(Matrix::from_fn(1, n, |_, j| values[j]))
    } else {
        let Some(data) = data else {
            return Err(CliError::config(
                "eigenfunction evaluation for multi-dimensional models needs a dataset",
            ));
        };
        let m = data.x.ncols();
        let g = n.min(m);
        let idx: Vec<usize> = (0..g)
            .map(|j| if g == 1 { 0 } else { j * (m - 1) / (g - 1) })
            .collect();
        Ok(data.x.select_columns(idx.iter()))
    }
}

fn state_names(dim: usize) -> Vec<String> {
    (1..=dim).map(|k| format!("x{k}")).collect()
}

fn fit_sindy(
    ctx: &Ctx,
    flags: &FitFlags,
    system: &System,
    data_path: Option<PathBuf>,
    out: &Path,
) -> Result<(), CliError> {
    let data = match &data_path {
        Some(p) => load_pairs(p, PairKindWanted::Derivative)?,
        None => match system {
            System::Chua => config::chua_preset(&ctx.cfg, &flags.common)?.generate()?,
            _ => {
                return Err(CliError::config(format!(
                    "the {} preset does not provide derivative pairs; pass --data",
                    system.name()
                )))
            }
        },
    };

    let (dict, w0, base) = if matches!(system, System::Chua) {
        let preset = config::chua_preset(&ctx.cfg, &flags.common)?;
        let w1_init = flags.w1_init.unwrap_or(preset.basin_init);
        let (dict, w0) = match &ctx.cfg.dictionary {
            Some(section) => config::build_dictionary(section, data.dim())?,
            None => preset.dictionary(w1_init, preset.w2_init),
        };
        (dict, w0, preset.optimizer.clone())
    } else {
        let Some(section) = &ctx.cfg.dictionary else {
            return Err(CliError::config(
                "a [dictionary] section is required to fit this dataset",
            ));
        };
        let (dict, w0) = config::build_dictionary(section, data.dim())?;
        (dict, w0, OptimizerConfig::default())
    };
    let optimizer = config::optimizer_config(base, &ctx.cfg, flags, ctx.seed)?;

    let (model, fit) = check_sysid_fit(
        sysid::fit_parametric_sindy(&data.x, &data.y, &dict, w0, None, &optimizer),
        out,
    )?;
    model_io::write_history(&fit.history, &out.join("history.csv"))?;

    let threshold = flags
        .threshold
        .or(ctx.cfg.threshold)
        .unwrap_or(DEFAULT_THRESHOLD);
    let sparse = sysid::threshold_sparsify_sindy(&model, &data.x, &data.y, threshold, None)?;
    let prov = provenance(&data.meta.system, data.meta.seed, &fit.history);
    model_io::save_sindy_model(&sparse, &prov, &out.join("model.json"))?;

    let names = state_names(data.dim());
    let equations = sysid::print_sindy_equations(&sparse, &names);
    std::fs::write(out.join("equations.txt"), &equations)
        .map_err(|e| CliError::config(format!("cannot write equations.txt: {e}")))?;

    let last = fit.history.last();
    println!(
        "fit finished after {} iterations ({}); residual {:.4e}",
        fit.history.len(),
        stop_reason_text(fit.stop),
        last.map_or(f64::NAN, |r| r.loss_coeff),
    );
    print!("{equations}");
    println!("wrote model.json, history.csv, equations.txt");
    Ok(())
}

const DEFAULT_THRESHOLD: f64 = 0.05;

fn fit_pdefind(
    ctx: &Ctx,
    flags: &FitFlags,
    system: &System,
    data_path: Option<PathBuf>,
    out: &Path,
) -> Result<(), CliError> {
    let mut preset = config::heat_preset(&ctx.cfg, &flags.common)?;
    preset.optimizer =
        config::optimizer_config(preset.optimizer.clone(), &ctx.cfg, flags, ctx.seed)?;
    let (field, meta_system) = match &data_path {
        Some(p) => {
            let (field, meta) = model_io::read_grid(p)?;
            (field, meta.system)
        }
        None => match system {
            System::Heat => (preset.solve()?, "heat".to_string()),
            _ => {
                return Err(CliError::config(format!(
                    "the {} preset does not provide a space-time grid; pass --data",
                    system.name()
                )))
            }
        },
    };

    let lib = preset.library(&field)?;
    let (model, fit) = check_sysid_fit(preset.fit(&lib), out)?;
    model_io::write_history(&fit.history, &out.join("history.csv"))?;

    let threshold = flags
        .threshold
        .or(ctx.cfg.threshold)
        .unwrap_or(preset.threshold);
    let sparse = sysid::threshold_sparsify_pde(&model, &lib, threshold, None)?;
    let prov = provenance(&meta_system, None, &fit.history);
    model_io::save_pde_model(&sparse, &prov, &out.join("model.json"))?;

    let equation = sysid::print_pde_equation(&sparse);
    std::fs::write(out.join("equations.txt"), &equation)
        .map_err(|e| CliError::config(format!("cannot write equations.txt: {e}")))?;

    let last = fit.history.last();
    println!(
        "fit finished after {} iterations ({}); residual {:.4e}",
        fit.history.len(),
        stop_reason_text(fit.stop),
        last.map_or(f64::NAN, |r| r.loss_coeff),
    );
    print!("{equation}");
    println!("wrote model.json, history.csv, equations.txt");
    Ok(())
}

// -------------------------------------------------------------------- scan

/// Looks up a sweep parameter: a flat index, or `w<k>` naming the k-th
/// trainable slot (1-based).
fn parse_param(spec: &str, trainable: &[bool]) -> Result<usize, CliError> {
    let index = if let Ok(i) = spec.parse::<usize>() {
        i
    } else if let Some(k) = spec.strip_prefix('w').and_then(|r| r.parse::<usize>().ok()) {
        if k == 0 {
            return Err(CliError::config("trainable slots are numbered from w1"));
        }
        trainable
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(i, _)| i)
            .nth(k - 1)
            .ok_or_else(|| {
                CliError::config(format!(
                    "parameter {spec} does not exist: only {} trainable slots",
                    trainable.iter().filter(|&&t| t).count()
                ))
            })?
    } else {
        return Err(CliError::config(format!(
            "unknown parameter `{spec}` (use a flat index or w<k>)"
        )));
    };
    if index >= trainable.len() {
        return Err(CliError::config(format!(
            "parameter index {index} out of range for {} parameters",
            trainable.len()
        )));
    }
    if !trainable[index] {
        return Err(CliError::config(format!(
            "parameter {index} is not trainable"
        )));
    }
    Ok(index)
}

struct SweepSpec {
    param: String,
    values: Vec<f64>,
}

fn resolve_sweep(ctx: &Ctx, flags: &ScanFlags, system: &System) -> Result<SweepSpec, CliError> {
    let section = ctx.cfg.scan.clone().unwrap_or_default();
    let defaults: Option<(&str, f64, f64, usize)> = match system {
        System::Chua => Some(("w1", 0.2, 3.0, 281)),
        System::Heat => Some(("chi", -1.5, -0.5, 101)),
        _ => None,
    };
    let param = flags
        .param
        .clone()
        .or(section.param)
        .or_else(|| defaults.map(|d| d.0.to_string()))
        .ok_or_else(|| CliError::config("scan needs --param (or a [scan] section)"))?;
    let lo = flags
        .lo
        .or(section.lo)
        .or(defaults.map(|d| d.1))
        .ok_or_else(|| CliError::config("scan needs --lo"))?;
    let hi = flags
        .hi
        .or(section.hi)
        .or(defaults.map(|d| d.2))
        .ok_or_else(|| CliError::config("scan needs --hi"))?;
    let resolution = flags
        .resolution
        .or(section.resolution)
        .or(defaults.map(|d| d.3))
        .ok_or_else(|| CliError::config("scan needs --resolution"))?;
    if resolution == 0 {
        return Err(CliError::config("scan resolution must be at least 1"));
    }
    if resolution > 1 && !(lo < hi) {
        return Err(CliError::config(format!(
            "scan range needs lo < hi, got [{lo}, {hi}]"
        )));
    }
    Ok(SweepSpec {
        param,
        values: linspace(lo, hi, resolution),
    })
}

pub fn scan(ctx: &Ctx, flags: &ScanFlags) -> Result<(), CliError> {
    let system = ctx.cfg.resolve_system(flags.common.system.as_deref())?;
    let out = ctx.out_dir()?;
    let data_path = explicit_data_path(ctx, &flags.common, &system);
    let peeked = match &data_path {
        Some(p) => Some(peek_kind(p)?),
        None => None,
    };
    let inferred = peeked.map(|k| match k {
        DataKind::Lagged => FitKind::Edmd,
        DataKind::Derivative => FitKind::Sindy,
        DataKind::Grid => FitKind::Pdefind,
    });
    let kind = ctx.cfg.resolve_fit_kind(None, &system, inferred)?;
    let sweep = resolve_sweep(ctx, flags, &system)?;
    if ctx.verbose {
        println!(
            "scan: system={} kind={} param={} over [{:.4}, {:.4}] with {} values",
            system.name(),
            kind.name(),
            sweep.param,
            sweep.values.first().copied().unwrap_or(f64::NAN),
            sweep.values.last().copied().unwrap_or(f64::NAN),
            sweep.values.len()
        );
    }

    let points: Vec<(f64, f64)> = match kind {
        FitKind::Edmd => {
            let data = match &data_path {
                Some(p) => load_pairs(p, PairKindWanted::Lagged)?,
                None => match &system {
                    System::Ou => {
                        config::ou_preset(&ctx.cfg, &flags.common, ctx.seed)?.generate()?
                    }
                    System::TripleWell => {
                        config::triple_well_preset(&ctx.cfg, &flags.common, ctx.seed)?.generate()?
                    }
                    _ => {
                        return Err(CliError::config(format!(
                            "the {} preset does not provide lagged pairs; pass --data",
                            system.name()
                        )))
                    }
                },
            };
            let (dict, w0) = match (&ctx.cfg.dictionary, &system) {
                (Some(section), _) => config::build_dictionary(section, data.dim())?,
                (None, System::Ou) => {
                    config::ou_preset(&ctx.cfg, &flags.common, ctx.seed)?.dictionary()
                }
                (None, System::TripleWell) => {
                    config::triple_well_preset(&ctx.cfg, &flags.common, ctx.seed)?.dictionary()
                }
                (None, _) => {
                    return Err(CliError::config(
                        "a [dictionary] section is required to scan this dataset",
                    ))
                }
            };
            let index = parse_param(&sweep.param, dict.trainable())?;
            let mut probe = w0.clone();
            let mut points = Vec::with_capacity(sweep.values.len());
            for &v in &sweep.values {
                probe[index] = v;
                let psi_x = dict.evaluate(&data.x, &probe)?;
                let psi_y = dict.evaluate(&data.y, &probe)?;
                let k = koopman::edmd_solve(&psi_x, &psi_y, None)?;
                let loss = koopman::reconstruction_loss(&psi_x, &psi_y, &k)?.sqrt();
                points.push((v, loss));
            }
            points
        }
        FitKind::Sindy => {
            let data = match &data_path {
                Some(p) => load_pairs(p, PairKindWanted::Derivative)?,
                None => match &system {
                    System::Chua => config::chua_preset(&ctx.cfg, &flags.common)?.generate()?,
                    _ => {
                        return Err(CliError::config(format!(
                            "the {} preset does not provide derivative pairs; pass --data",
                            system.name()
                        )))
                    }
                },
            };
            let (dict, w0) = if matches!(system, System::Chua) {
                let preset = config::chua_preset(&ctx.cfg, &flags.common)?;
                let w1_init = flags.w1_init.unwrap_or(preset.basin_init);
                match &ctx.cfg.dictionary {
                    Some(section) => config::build_dictionary(section, data.dim())?,
                    None => preset.dictionary(w1_init, preset.w2_init),
                }
            } else if let Some(section) = &ctx.cfg.dictionary {
                config::build_dictionary(section, data.dim())?
            } else {
                return Err(CliError::config(
                    "a [dictionary] section is required to scan this dataset",
                ));
            };
            let index = parse_param(&sweep.param, dict.trainable())?;
            sysid::sindy_landscape(&dict, &w0, index, &sweep.values, &data.x, &data.y, None)?
        }
        FitKind::Pdefind => {
            if sweep.param != "chi" && sweep.param != "w1" && sweep.param != "0" {
                return Err(CliError::config(format!(
                    "field-equation scans sweep the shared exponent; use --param chi, got `{}`",
                    sweep.param
                )));
            }
            let preset = config::heat_preset(&ctx.cfg, &flags.common)?;
            let field = match &data_path {
                Some(p) => model_io::read_grid(p)?.0,
                None => match &system {
                    System::Heat => preset.solve()?,
                    _ => {
                        return Err(CliError::config(format!(
                            "the {} preset does not provide a space-time grid; pass --data",
                            system.name()
                        )))
                    }
                },
            };
            let lib = preset.library(&field)?;
            let mut points = Vec::with_capacity(sweep.values.len());
            for &v in &sweep.values {
                let w = Vector::from_vec(vec![v]);
                let theta = lib.theta(&w)?;
                let xi = sysid::pdefind_solve(&theta, &lib.ut, None)?;
                let loss = sysid::pde_loss(&theta, &lib.ut, &xi)?.sqrt();
                points.push((v, loss));
            }
            points
        }
    };

    let path = out.join("landscape.csv");
    model_io::write_landscape(&points, &path)?;
    let (best_v, best_loss) = points
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((f64::NAN, f64::NAN));
    println!(
        "wrote {} rows to {}; minimum loss {:.4e} at {} = {:.6}",
        points.len(),
        path.display(),
        best_loss,
        sweep.param,
        best_v
    );
    Ok(())
}

// ---------------------------------------------------------------- spectrum

pub fn spectrum(ctx: &Ctx, flags: &SpectrumFlags) -> Result<(), CliError> {
    let out = ctx.out_dir()?;
    let (model, prov) = model_io::load_koopman_model(&flags.model)?;
    let spectral = model.spectral()?;
    let eigenvalues = &spectral.spectrum.eigenvalues;
    model_io::write_eigenvalues(eigenvalues, &out.join("eigenvalues.csv"))?;

    let dim = model.dictionary.state_dim();
    let mut wrote_functions = false;
    if dim == 1 {
        let points = eigen_grid(
            &ctx.cfg,
            None,
            dim,
            Some((flags.grid_lo, flags.grid_hi, flags.grid_n)),
        )?;
        let values = spectral.eigenfunction_values(
            &model.dictionary,
            &model.params,
            &points,
            eigenvalues.len(),
        )?;
        model_io::write_eigenfunctions(&points, &values, &out.join("eigenfunctions.csv"))?;
        wrote_functions = true;
    } else if ctx.verbose {
        println!("eigenfunction grids are written for 1-D dictionaries only");
    }

    if ctx.verbose {
        if let Some(system) = &prov.system {
            println!("model system: {system}");
        }
    }
    for (i, l) in eigenvalues.iter().take(5).enumerate() {
        println!(
            "lambda{}: {:.6} {} {:.6}i  (modulus {:.6})",
            i + 1,
            l.re,
            if l.im < 0.0 { "-" } else { "+" },
            l.im.abs(),
            l.norm()
        );
    }
    println!(
        "wrote eigenvalues.csv{}",
        if wrote_functions {
            " and eigenfunctions.csv"
        } else {
            ""
        }
    );
    Ok(())
}

// --------------------------------------------------------------- benchmark

pub fn benchmark(ctx: &Ctx, flags: &BenchmarkFlags) -> Result<(), CliError> {
    let names: Vec<&str> = match &flags.only {
        Some(name) => {
            if !BENCHMARK_NAMES.contains(&name.as_str()) {
                return Err(CliError::config(format!(
                    "unknown benchmark `{name}` (expected one of {})",
                    BENCHMARK_NAMES.join(", ")
                )));
            }
            vec![name.as_str()]
        }
        None => BENCHMARK_NAMES.to_vec(),
    };
    let mut failed: Vec<String> = Vec::new();
    for name in names {
        match benchmarks::run(name) {
            Ok(report) => {
                print!("{}", report.summary());
                if ctx.verbose {
                    for (key, value) in &report.values {
                        println!("  {key} = {value:.9e}");
                    }
                }
                if !report.passed() {
                    failed.push(name.to_string());
                }
            }
            Err(e) => {
                println!("[FAIL] {name}: {e}");
                failed.push(name.to_string());
            }
        }
    }
    if failed.is_empty() {
        println!("all benchmarks passed");
        Ok(())
    } else {
        Err(CliError::Benchmark(format!(
            "benchmarks failed: {}",
            failed.join(", ")
        )))
    }
}
