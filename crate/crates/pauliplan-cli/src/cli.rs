//! Argument surface and flag/config merging.

use crate::config::Config;
use crate::methods::{EstimatorChoice, Instance, MethodOptions, UsageError};
use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pauliplan_core::allocation::{
    overlap_weights, BoundKind, BoundSpec, OverlapWeightRule, SolverOptions,
};
use pauliplan_core::estimation::KRule;
use pauliplan_core::pipeline::BernsteinMaxScope;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "pauliplan",
    about = "Group Pauli observables, allocate a measurement budget, simulate, estimate",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Build the overlapped measurement groups for a Hamiltonian
    Group(GroupArgs),
    /// Minimize the confidence bound and print the shot allocation
    Allocate(AllocateArgs),
    /// Run the full pipeline on the exact ground state
    Estimate(EstimateArgs),
    /// Compare methods over repeated seeded trials
    Bench(BenchArgs),
    /// Emit the imbalanced two-group toy Hamiltonian
    ToyModel(ToyModelArgs),
}

#[derive(Args)]
pub struct GroupArgs {
    /// Hamiltonian file (one `coefficient axes` pair per line)
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// Write JSON here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct Common {
    /// Hamiltonian file
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// Flat key=value config file; flags win over file values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Confidence-bound flavor
    #[arg(long, value_enum)]
    pub bound: Option<BoundFlag>,
    /// Accuracy parameter ε (default: 2Σ|a|·√(M₀/M))
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// M₀ in the default ε rule
    #[arg(long)]
    pub m0: Option<f64>,
    /// Per-term estimator
    #[arg(long, value_enum)]
    pub estimator: Option<EstimatorFlag>,
    /// Median-of-means block rule
    #[arg(long, value_enum)]
    pub k_rule: Option<KRuleFlag>,
    /// Overlap-weight rule for the per-group bound
    #[arg(long, value_enum)]
    pub wo: Option<WoFlag>,
    /// Adaptive rounds T for rogs_adaptive
    #[arg(long)]
    pub adaptive_rounds: Option<usize>,
    /// Range statistic scope for the bernstein bound
    #[arg(long, value_enum)]
    pub bernstein_max: Option<BernsteinMaxFlag>,
    /// Coarse search: test budget (default: the main budget)
    #[arg(long)]
    pub m_test: Option<usize>,
    /// Coarse search: number of candidate rounds
    #[arg(long)]
    pub n_rounds: Option<usize>,
    /// Coarse search: simulated repeats per candidate
    #[arg(long)]
    pub n_rep: Option<usize>,
    /// Write machine output here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum BoundFlag {
    #[value(name = "per-op")]
    PerOp,
    #[value(name = "per-group")]
    PerGroup,
    #[value(name = "bernstein")]
    Bernstein,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum EstimatorFlag {
    Mean,
    Mom,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum KRuleFlag {
    /// K = ⌈√M⌉
    Sqrt,
    /// K = round(M·σ/ε_ℓ)
    Var,
    /// K = round(M·ε_ℓ²/σ²)
    VarInv,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum WoFlag {
    Inverse,
    Size,
    Truncate,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum BernsteinMaxFlag {
    PerTerm,
    Global,
}

#[derive(Args)]
pub struct AllocateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Total measurement budget M
    #[arg(long)]
    pub shots: usize,
}

#[derive(Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Total measurement budget M
    #[arg(long)]
    pub shots: usize,
    /// Base seed; all randomness derives from it
    #[arg(long)]
    pub seed: u64,
    /// Measurement strategy
    #[arg(long, default_value = "rogs_naive")]
    pub method: String,
    /// Independent trials (the report is from the first)
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Dump the first repeat's measurement records as JSON lines
    #[arg(long)]
    pub dump_records: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    /// Total measurement budget M per trial
    #[arg(long)]
    pub shots: usize,
    /// Base seed
    #[arg(long)]
    pub seed: u64,
    /// Independent trials per method
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Comma-separated methods to compare
    #[arg(
        long = "method",
        value_delimiter = ',',
        default_value = "rogs_naive,even_distribution"
    )]
    pub methods: Vec<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Include measured wall times (breaks byte-for-byte reproducibility)
    #[arg(long, default_value_t = false)]
    pub timing: bool,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Args)]
pub struct ToyModelArgs {
    /// Qubit count, 2 ..= 10
    #[arg(long)]
    pub n: usize,
    /// Write the Hamiltonian here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    /// Merge flags over the optional config file into method options.
    pub fn method_options(&self) -> Result<MethodOptions> {
        let cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        let defaults = MethodOptions::default();

        let bound = match self.bound {
            Some(BoundFlag::PerOp) => BoundKind::HoeffdingPerOperator,
            Some(BoundFlag::PerGroup) => BoundKind::HoeffdingPerGroup,
            Some(BoundFlag::Bernstein) => BoundKind::Bernstein,
            None => match cfg.get("bound.kind") {
                Some("per-op") | None => BoundKind::HoeffdingPerOperator,
                Some("per-group") => BoundKind::HoeffdingPerGroup,
                Some("bernstein") => BoundKind::Bernstein,
                Some(other) => {
                    return Err(anyhow!(UsageError(format!(
                        "config bound.kind '{other}' not one of per-op, per-group, bernstein"
                    ))))
                }
            },
        };
        let k_rule = match self.k_rule {
            Some(KRuleFlag::Sqrt) => KRule::SqrtM,
            Some(KRuleFlag::Var) => KRule::VarianceScaled,
            Some(KRuleFlag::VarInv) => KRule::VarianceScaledInverse,
            None => KRule::VarianceScaled,
        };
        Ok(MethodOptions {
            bound,
            epsilon: self.epsilon.or(cfg.get_f64("bound.epsilon")?),
            m0: self.m0.or(cfg.get_f64("bound.m0")?).unwrap_or(1.0),
            estimator: match self.estimator {
                Some(EstimatorFlag::Mean) => EstimatorChoice::Mean,
                Some(EstimatorFlag::Mom) | None => EstimatorChoice::Mom(k_rule),
            },
            wo_rule: match self.wo {
                Some(WoFlag::Inverse) | None => OverlapWeightRule::InverseMultiplicity,
                Some(WoFlag::Size) => OverlapWeightRule::GroupSizeProportional,
                Some(WoFlag::Truncate) => OverlapWeightRule::TruncateLight { min_fraction: 0.1 },
            },
            solver: SolverOptions {
                stationarity_tol: cfg
                    .get_f64("solver.tol")?
                    .unwrap_or(pauliplan_core::allocation::DEFAULT_STATIONARITY_TOL),
                max_iters: cfg
                    .get_usize("solver.max_iters")?
                    .unwrap_or(pauliplan_core::allocation::DEFAULT_MAX_ITERS),
            },
            coarse_m_test: self.m_test,
            coarse_rounds: self.n_rounds.unwrap_or(defaults.coarse_rounds),
            coarse_reps: self.n_rep.unwrap_or(defaults.coarse_reps),
            adaptive_rounds: self.adaptive_rounds.unwrap_or(defaults.adaptive_rounds),
            bernstein_scope: match self.bernstein_max {
                Some(BernsteinMaxFlag::Global) => BernsteinMaxScope::Global,
                _ => BernsteinMaxScope::PerTerm,
            },
        })
    }
}

/// Bound spec for an explicit (ε, M); bernstein is adaptive-only.
pub fn build_bound_spec(
    opts: &MethodOptions,
    epsilon: f64,
    budget: usize,
    inst: &Instance,
) -> Result<BoundSpec> {
    match opts.bound {
        BoundKind::HoeffdingPerOperator => Ok(BoundSpec::hoeffding_per_operator(epsilon, budget)),
        BoundKind::HoeffdingPerGroup => Ok(BoundSpec::hoeffding_per_group(
            epsilon,
            budget,
            overlap_weights(&inst.groups, &inst.hamiltonian, opts.wo_rule),
        )),
        BoundKind::Bernstein => Err(anyhow!(UsageError(
            "the bernstein bound needs measurement statistics; use --method rogs_adaptive".into()
        ))),
    }
}
