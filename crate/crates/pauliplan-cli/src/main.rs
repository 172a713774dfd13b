//! pauliplan: measurement planning and benchmarking for Pauli-sum energy
//! estimation. Exit codes: 0 success, 1 runtime failure, 2 usage or
//! input-format error.

use clap::Parser;
use pauliplan_cli::methods::UsageError;
use pauliplan_cli::{cli, commands};
use pauliplan_core::hamiltonian::ParseError;
use pauliplan_core::pauli::PauliError;
use pauliplan_core::pipeline::PipelineError;
use std::process::ExitCode;

fn run(cli: cli::Cli) -> anyhow::Result<()> {
    match &cli.command {
        cli::Command::Group(args) => commands::cmd_group(args),
        cli::Command::Allocate(args) => commands::cmd_allocate(args),
        cli::Command::Estimate(args) => commands::cmd_estimate(args),
        cli::Command::Bench(args) => commands::cmd_bench(args),
        cli::Command::ToyModel(args) => commands::cmd_toy_model(args),
    }
}

fn is_usage_error(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause.is::<UsageError>()
            || cause.is::<ParseError>()
            || cause.is::<PauliError>()
            || matches!(
                cause.downcast_ref::<PipelineError>(),
                Some(PipelineError::IndivisibleBudget { .. })
            )
    })
}

fn main() -> ExitCode {
    let cli = cli::Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_usage_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
