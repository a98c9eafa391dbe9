//! The experiment driver behind the `tvdd` binary.
//!
//! A run loads an image (or the bundled 64x64 sample), corrupts it, builds
//! the fidelity model, solves it with the domain-decomposition solver or the
//! single-domain baseline, and writes the restored image, a CSV energy trace
//! and a JSON report.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize, Serializer};

use crate::decomposition::{Partition, PartitionSpec};
use crate::error::{Result, TvError};
use crate::fidelity::{FidelityModel, Mask};
use crate::grid::ImageField;
use crate::solvers::{
    dd_solve, solve_full_primal_dual, DdOptions, InnerParams, OuterParams, PrimalDualParams,
    SolveReport, TraceRow,
};

use super::io::{load_image, load_mask, save_image};
use super::metrics::format_psnr;
use super::noise::{add_gaussian, add_salt_pepper};
use super::synthetic::{bundled_sample, text_mask};

const BUNDLED_REFERENCES: &str = include_str!("../../data/reference_energies.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    DenoiseL2,
    DenoiseL1,
    InpaintL2,
    InpaintL1,
    Segment,
    /// Run the oracle suites.
    Verify,
    /// Sweep partitions 1x1, 2x2, 4x4 on the configured problem.
    Bench,
}

impl Task {
    pub const SOLVE_TASKS: [Task; 5] = [
        Task::DenoiseL2,
        Task::DenoiseL1,
        Task::InpaintL2,
        Task::InpaintL1,
        Task::Segment,
    ];

    pub fn default_alpha(self) -> f64 {
        match self {
            Task::DenoiseL1 | Task::InpaintL1 => 1.0,
            _ => 10.0,
        }
    }

    /// Corruption applied when no noise flag is given.
    pub fn default_corruption(self) -> Corruption {
        match self {
            Task::DenoiseL2 | Task::InpaintL2 => Corruption::Gaussian(0.05),
            Task::DenoiseL1 | Task::InpaintL1 => Corruption::SaltPepper(0.2),
            Task::Segment => Corruption::Gaussian(0.01),
            Task::Verify | Task::Bench => Corruption::None,
        }
    }

    pub fn needs_mask(self) -> bool {
        matches!(self, Task::InpaintL2 | Task::InpaintL1)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.to_possible_value().expect("no skipped variants");
        f.write_str(name.get_name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Corruption {
    None,
    SaltPepper(f64),
    /// Zero-mean additive noise with the given variance.
    Gaussian(f64),
}

impl fmt::Display for Corruption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Corruption::None => write!(f, "clean"),
            Corruption::SaltPepper(d) => write!(f, "salt-pepper={d}"),
            Corruption::Gaussian(v) => write!(f, "gaussian={v}"),
        }
    }
}

/// Configuration of one run; doubles as the command-line interface.
#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "tvdd", version, about = "Domain-decomposition solvers for TV imaging problems")]
pub struct ExperimentConfig {
    #[arg(value_enum)]
    pub task: Task,

    /// 8-bit PGM or PNG input; the bundled 64x64 sample when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Restored image (.pgm or .png). The trace and report default to the
    /// same stem with .csv and .json.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Inpainting mask, nonzero pixels are missing. A synthetic text mask is
    /// used when omitted.
    #[arg(long)]
    pub mask: Option<PathBuf>,

    #[arg(long)]
    pub alpha: Option<f64>,

    #[arg(long, default_value = "2x2")]
    pub partition: PartitionSpec,

    /// Outer step; 50 for denoising and inpainting, 1 for segmentation.
    #[arg(long)]
    pub tau: Option<f64>,

    /// `τσ = 1/L`.
    #[arg(long = "L", default_value_t = 2.0)]
    pub l: f64,

    #[arg(long, default_value_t = 1e-5)]
    pub outer_tol: f64,

    #[arg(long, default_value_t = 1e-6)]
    pub inner_tol: f64,

    #[arg(long, default_value_t = 1000)]
    pub max_outer: usize,

    #[arg(long, default_value_t = 1000)]
    pub max_inner: usize,

    #[arg(long)]
    pub threads: Option<usize>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Known `J(u*)`: a number, or `bundled` for the shipped table.
    #[arg(long)]
    pub reference_energy: Option<String>,

    #[arg(long, default_value_t = 0.6)]
    pub c1: f64,

    #[arg(long, default_value_t = 0.1)]
    pub c2: f64,

    /// Salt-and-pepper density.
    #[arg(long, conflicts_with_all = ["gaussian", "clean"])]
    pub salt_pepper: Option<f64>,

    /// Variance of zero-mean Gaussian noise.
    #[arg(long, conflicts_with = "clean")]
    pub gaussian: Option<f64>,

    /// Solve the input as is, without corruption.
    #[arg(long)]
    pub clean: bool,

    /// CSV energy trace.
    #[arg(long)]
    pub log: Option<PathBuf>,

    /// JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,

    /// Solve with the single-domain primal-dual iteration instead.
    #[arg(long)]
    pub baseline: bool,
}

impl ExperimentConfig {
    pub fn new(task: Task) -> Self {
        ExperimentConfig::parse_from(["tvdd", &task.to_string()])
    }

    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(self.task.default_alpha())
    }

    pub fn corruption(&self) -> Corruption {
        if self.clean {
            Corruption::None
        } else if let Some(d) = self.salt_pepper {
            Corruption::SaltPepper(d)
        } else if let Some(v) = self.gaussian {
            Corruption::Gaussian(v)
        } else {
            self.task.default_corruption()
        }
    }

    pub fn outer_params(&self) -> Result<OuterParams> {
        let tau = self.tau.unwrap_or(match self.task {
            Task::Segment => 1.0,
            _ => 50.0,
        });
        Ok(OuterParams::new(tau, self.l)?
            .with_max_outer(self.max_outer)
            .with_tol(self.outer_tol)
            .with_reference(self.resolve_reference()?))
    }

    pub fn inner_params(&self, outer: &OuterParams) -> InnerParams {
        InnerParams::for_outer(outer)
            .with_tol(self.inner_tol)
            .with_max_inner(self.max_inner)
    }

    /// Key of this problem in the bundled reference table, if it is one of
    /// the shipped instances (bundled sample, synthetic mask).
    pub fn reference_key(&self) -> Option<String> {
        if self.input.is_some() || self.mask.is_some() {
            return None;
        }
        let mut key = format!(
            "{}/alpha={}/{}/seed={}",
            self.task,
            self.alpha(),
            self.corruption(),
            self.seed
        );
        if self.task == Task::Segment {
            key.push_str(&format!("/c1={}/c2={}", self.c1, self.c2));
        }
        Some(key)
    }

    fn resolve_reference(&self) -> Result<Option<f64>> {
        match self.reference_energy.as_deref() {
            None => Ok(None),
            Some("bundled") => {
                let key = self.reference_key().ok_or_else(|| {
                    TvError::Config("bundled references exist only for the bundled sample".into())
                })?;
                bundled_reference(&key)?
                    .map(Some)
                    .ok_or_else(|| TvError::Config(format!("no bundled reference for {key}")))
            }
            Some(text) => text
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| {
                    TvError::Config(format!(
                        "--reference-energy expects a number or `bundled`, got {text:?}"
                    ))
                }),
        }
    }

    fn trace_path(&self) -> Option<PathBuf> {
        self.log
            .clone()
            .or_else(|| self.output.as_ref().map(|p| p.with_extension("csv")))
    }

    fn report_path(&self) -> Option<PathBuf> {
        self.report
            .clone()
            .or_else(|| self.output.as_ref().map(|p| p.with_extension("json")))
    }
}

/// Looks up a bundled reference energy.
pub fn bundled_reference(key: &str) -> Result<Option<f64>> {
    let table: BTreeMap<String, f64> = serde_json::from_str(BUNDLED_REFERENCES)?;
    Ok(table.get(key).copied())
}

/// A corrupted problem ready to solve.
#[derive(Clone, Debug)]
pub struct Problem {
    pub clean: ImageField,
    pub observed: ImageField,
    pub mask: Option<Mask>,
    pub model: FidelityModel,
}

/// Loads and corrupts the input and builds the fidelity model.
pub fn prepare(config: &ExperimentConfig) -> Result<Problem> {
    let clean = match &config.input {
        Some(path) => load_image(path)?,
        None => bundled_sample(),
    };
    let shape = clean.shape();
    let mask = if config.task.needs_mask() {
        Some(match &config.mask {
            Some(path) => {
                let m = load_mask(path)?;
                if m.shape() != shape {
                    return Err(TvError::ShapeMismatch {
                        expected: shape,
                        found: m.shape(),
                    });
                }
                m
            }
            None => text_mask(shape, config.seed.wrapping_add(1)),
        })
    } else {
        None
    };
    let observed = match config.corruption() {
        Corruption::None => clean.clone(),
        Corruption::SaltPepper(d) => add_salt_pepper(&clean, d, config.seed)?,
        Corruption::Gaussian(v) => add_gaussian(&clean, 0.0, v, config.seed)?,
    };
    let alpha = config.alpha();
    let model = match config.task {
        Task::DenoiseL2 => FidelityModel::rof(alpha, observed.clone())?,
        Task::DenoiseL1 => FidelityModel::tv_l1(alpha, observed.clone())?,
        Task::InpaintL2 => {
            FidelityModel::inpaint_l2(alpha, observed.clone(), mask.clone().expect("mask built"))?
        }
        Task::InpaintL1 => {
            FidelityModel::inpaint_l1(alpha, observed.clone(), mask.clone().expect("mask built"))?
        }
        Task::Segment => FidelityModel::segmentation(alpha, observed.clone(), config.c1, config.c2)?,
        Task::Verify | Task::Bench => {
            return Err(TvError::Config(format!("task {} has no single problem", config.task)))
        }
    };
    Ok(Problem {
        clean,
        observed,
        mask,
        model,
    })
}

fn serialize_psnr<S: Serializer>(value: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match value {
        Some(v) if v.is_finite() => s.serialize_f64(*v),
        Some(v) => s.serialize_str(&format_psnr(*v)),
        None => s.serialize_none(),
    }
}

/// Contents of the JSON report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub task: Task,
    pub seed: u64,
    pub partition: String,
    pub outer_iters: usize,
    pub max_inner_iters: usize,
    pub final_energy: f64,
    #[serde(serialize_with = "serialize_psnr")]
    pub psnr: Option<f64>,
    pub wall_time_sec: f64,
    pub converged: bool,
    pub reference_energy: Option<f64>,
    pub nonconverged_local_solves: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    BudgetExhausted,
    /// `verify` found a failing check.
    ChecksFailed,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Converged => 0,
            RunStatus::BudgetExhausted => 2,
            RunStatus::ChecksFailed => 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    /// One report per solve (several for `bench`).
    pub reports: Vec<RunReport>,
    /// Human-readable summary lines.
    pub lines: Vec<String>,
    pub solution: Option<ImageField>,
}

/// Writes `iter,energy,rel_gap,psnr`, one row per trace entry.
pub fn write_trace(trace: &[TraceRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iter", "energy", "rel_gap", "psnr"])?;
    for row in trace {
        w.write_record([
            row.iter.to_string(),
            format!("{:e}", row.energy),
            row.rel_gap.map(|g| format!("{g:e}")).unwrap_or_default(),
            row.psnr.map(format_psnr).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn solve(config: &ExperimentConfig, problem: &Problem, spec: PartitionSpec) -> Result<(ImageField, SolveReport, Option<f64>)> {
    let outer = config.outer_params()?;
    let truth = Some(&problem.clean);
    if config.baseline {
        let params = PrimalDualParams {
            max_iter: config.max_outer,
            tol: config.outer_tol,
            reference_energy: outer.reference_energy,
            ..PrimalDualParams::default()
        };
        let sol = solve_full_primal_dual(&problem.model, &params, truth)?;
        return Ok((sol.u, sol.report, outer.reference_energy));
    }
    let partition = Partition::from_spec(problem.model.shape(), spec)?;
    let inner = config.inner_params(&outer);
    let opts = DdOptions {
        threads: config.threads,
        ground_truth: truth,
    };
    let sol = dd_solve(&problem.model, &partition, &outer, &inner, &opts)?;
    Ok((sol.u, sol.report, outer.reference_energy))
}

fn make_report(config: &ExperimentConfig, spec: PartitionSpec, report: &SolveReport, reference: Option<f64>) -> RunReport {
    RunReport {
        task: config.task,
        seed: config.seed,
        partition: if config.baseline { "full".into() } else { spec.to_string() },
        outer_iters: report.outer_iters,
        max_inner_iters: report.max_inner_iters,
        final_energy: report.final_energy(),
        psnr: report.psnr,
        wall_time_sec: report.wall_time_sec,
        converged: report.converged,
        reference_energy: reference,
        nonconverged_local_solves: report.nonconverged_local_solves,
    }
}

fn summary(r: &RunReport) -> String {
    format!(
        "{} partition={} outer_iters={} max_inner_iters={} energy={:.10e} psnr={} time={:.3}s{}",
        r.task,
        r.partition,
        r.outer_iters,
        r.max_inner_iters,
        r.final_energy,
        r.psnr.map(format_psnr).unwrap_or_else(|| "-".into()),
        r.wall_time_sec,
        if r.converged { "" } else { " (budget exhausted)" }
    )
}

/// Executes one configured task.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    match config.task {
        Task::Verify => run_verify(config),
        Task::Bench => run_bench(config),
        _ => {
            let problem = prepare(config)?;
            let (u, report, reference) = solve(config, &problem, config.partition)?;
            if let Some(path) = &config.output {
                save_image(&u, path)?;
            }
            if let Some(path) = config.trace_path() {
                write_trace(&report.trace, path)?;
            }
            let rep = make_report(config, config.partition, &report, reference);
            if let Some(path) = config.report_path() {
                std::fs::write(path, serde_json::to_string_pretty(&rep)?)?;
            }
            Ok(RunOutcome {
                status: if report.converged {
                    RunStatus::Converged
                } else {
                    RunStatus::BudgetExhausted
                },
                lines: vec![summary(&rep)],
                reports: vec![rep],
                solution: Some(u),
            })
        }
    }
}

/// Problem solved by `bench`: the denoise-l1 protocol unless overridden by
/// the configured alpha and corruption flags.
fn run_bench(config: &ExperimentConfig) -> Result<RunOutcome> {
    let mut inner_config = config.clone();
    inner_config.task = Task::DenoiseL1;
    let problem = prepare(&inner_config)?;
    let mut reports = Vec::new();
    let mut lines = Vec::new();
    let mut all_converged = true;
    for (nx, ny) in [(1, 1), (2, 2), (4, 4)] {
        let spec = PartitionSpec { nx, ny };
        let (_, report, reference) = solve(&inner_config, &problem, spec)?;
        all_converged &= report.converged;
        let rep = make_report(&inner_config, spec, &report, reference);
        lines.push(summary(&rep));
        reports.push(rep);
    }
    if let Some(path) = config.report_path() {
        std::fs::write(path, serde_json::to_string_pretty(&reports)?)?;
    }
    Ok(RunOutcome {
        status: if all_converged {
            RunStatus::Converged
        } else {
            RunStatus::BudgetExhausted
        },
        reports,
        lines,
        solution: None,
    })
}

#[cfg(feature = "oracle")]
fn run_verify(config: &ExperimentConfig) -> Result<RunOutcome> {
    let checks = crate::oracle::run_verify_suite(config.seed);
    let ok = checks.iter().all(|c| c.passed);
    let lines = checks
        .iter()
        .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect();
    Ok(RunOutcome {
        status: if ok { RunStatus::Converged } else { RunStatus::ChecksFailed },
        reports: Vec::new(),
        lines,
        solution: None,
    })
}

#[cfg(not(feature = "oracle"))]
fn run_verify(_config: &ExperimentConfig) -> Result<RunOutcome> {
    Err(TvError::Config("this build has no oracles; enable the `oracle` feature".into()))
}
