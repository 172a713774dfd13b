//! Subcommand implementations. Machine output (JSON/CSV) goes to stdout
//! or `--out`; short human summaries go to stderr.

use crate::bench::{run_bench, to_csv, to_json};
use crate::cli::{BenchArgs, Common, EstimateArgs, GroupArgs, OutputFormat, ToyModelArgs};
use crate::methods::{run_method, Instance, Method, MethodOptions, UsageError};
use anyhow::{anyhow, Context, Result};
use pauliplan_core::allocation::{optimize_weights_with, Allocation};
use pauliplan_core::hamiltonian::toy_model;
use pauliplan_core::simulator::{derive_seed, execute_recipe};
use pauliplan_core::estimation::estimate_energy;
use serde::Serialize;
use std::path::Path;

fn emit(out: Option<&Path>, payload: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, payload)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{payload}"),
    }
    Ok(())
}

pub fn cmd_group(args: &GroupArgs) -> Result<()> {
    let inst = Instance::load(&args.hamiltonian)?;
    let gs = &inst.groups;
    eprintln!("n_terms: {}", gs.n_terms());
    eprintln!("n_groups: {}", gs.n_groups());
    for (alpha, g) in gs.groups().iter().enumerate() {
        eprintln!(
            "group {alpha}: size {} (added {}), basis {}",
            g.members.len(),
            g.added.len(),
            g.basis
        );
    }
    let mut json = gs.to_json();
    json.push('\n');
    emit(args.out.as_deref(), &json)
}

/// Resolve ε as flag > config > naive default for this budget.
fn resolve_allocation(common: &Common, inst: &Instance, m: usize) -> Result<(Allocation, MethodOptions)> {
    let opts = common.method_options()?;
    let epsilon = opts
        .epsilon
        .unwrap_or_else(|| pauliplan_core::allocation::naive_epsilon(&inst.hamiltonian, m, opts.m0));
    let spec = crate::cli::build_bound_spec(&opts, epsilon, m, inst)?;
    let allocation = optimize_weights_with(&spec, &inst.groups, &inst.hamiltonian, opts.solver)?;
    Ok((allocation, opts))
}

pub fn cmd_allocate(args: &crate::cli::AllocateArgs) -> Result<()> {
    let inst = Instance::load(&args.common.hamiltonian)?;
    let (allocation, _) = resolve_allocation(&args.common, &inst, args.shots)?;
    eprintln!(
        "n_groups: {}, n_circuit: {}, epsilon: {}, delta: {}",
        inst.groups.n_groups(),
        allocation.support_size,
        allocation.epsilon,
        allocation.bound_value
    );
    let mut json = allocation.to_json();
    json.push('\n');
    emit(args.common.out.as_deref(), &json)
}

#[derive(Serialize)]
struct EstimateReport {
    method: String,
    hamiltonian: String,
    m: usize,
    seed: u64,
    epsilon: f64,
    estimate: f64,
    true_energy: f64,
    abs_error: f64,
    n_circuit: usize,
    n_groups: usize,
    estimates_per_repeat: Vec<f64>,
    /// Per-term diagnostics of the first repeat (record-based methods).
    detail: Option<pauliplan_core::EnergyEstimate>,
}

pub fn cmd_estimate(args: &EstimateArgs) -> Result<()> {
    let inst = Instance::load(&args.common.hamiltonian)?;
    let opts = args.common.method_options()?;
    let method: Method = args.method.parse().map_err(|e: UsageError| anyhow!(e))?;
    let run = run_method(&inst, method, args.shots, args.repeats, args.seed, &opts)?;

    if let Some(dump) = &args.dump_records {
        // Re-derive the first repeat's records for inspection.
        if let Some(allocation) = &run.allocation {
            let records = execute_recipe(
                &inst.psi,
                &inst.groups,
                &allocation.shots,
                derive_seed(derive_seed(args.seed, method_tag(method)), 0),
            )?;
            let mut text = String::new();
            for r in &records {
                text.push_str(&r.to_jsonl());
                text.push('\n');
            }
            std::fs::write(dump, text).with_context(|| format!("writing {}", dump.display()))?;
            // Sanity: the dumped records reproduce the reported estimate.
            let est = estimate_energy(
                &records,
                &inst.groups,
                &inst.hamiltonian,
                opts.estimator.resolve(run.epsilon, &inst.hamiltonian),
            )?;
            debug_assert_eq!(est.value, run.outcomes[0].estimate);
        }
    }

    let report = EstimateReport {
        method: method.name().to_string(),
        hamiltonian: inst.name.clone(),
        m: args.shots,
        seed: args.seed,
        epsilon: run.epsilon,
        estimate: run.outcomes[0].estimate,
        true_energy: inst.ground_energy,
        abs_error: (run.outcomes[0].estimate - inst.ground_energy).abs(),
        n_circuit: run.outcomes[0].n_circuit,
        n_groups: inst.groups.n_groups(),
        estimates_per_repeat: run.outcomes.iter().map(|o| o.estimate).collect(),
        detail: run.first_estimate,
    };
    eprintln!(
        "estimate: {} (true {}, |err| {}), n_circuit {}",
        report.estimate, report.true_energy, report.abs_error, report.n_circuit
    );
    if let Some(detail) = &report.detail {
        if !detail.unmeasured.is_empty() {
            eprintln!(
                "warning: {} terms received no shots and contribute 0: {:?}",
                detail.unmeasured.len(),
                detail.unmeasured
            );
        }
    }
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    emit(args.common.out.as_deref(), &json)
}

fn method_tag(method: Method) -> u64 {
    match method {
        Method::RogsNaive => 1,
        Method::RogsCoarse => 2,
        Method::RogsAdaptive => 3,
        Method::EvenDistribution => 4,
        Method::UniformShadow => 5,
    }
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let inst = Instance::load(&args.common.hamiltonian)?;
    let opts = args.common.method_options()?;
    let methods: Vec<Method> = args
        .methods
        .iter()
        .map(|s| s.parse().map_err(|e: UsageError| anyhow!(e)))
        .collect::<Result<_>>()?;
    let rows = run_bench(
        &inst,
        &methods,
        args.shots,
        args.repeats,
        args.seed,
        &opts,
        args.timing,
    )?;
    for row in &rows {
        eprintln!(
            "{}: rmse {}, mae {}, n_circuit {}/{}",
            row.method, row.rmse, row.mae, row.n_circuit, row.n_groups
        );
    }
    let payload = match args.format {
        OutputFormat::Csv => to_csv(&rows),
        OutputFormat::Json => {
            let mut j = to_json(&rows);
            j.push('\n');
            j
        }
    };
    emit(args.common.out.as_deref(), &payload)
}

pub fn cmd_toy_model(args: &ToyModelArgs) -> Result<()> {
    if !(2..=10).contains(&args.n) {
        return Err(anyhow!(UsageError(format!(
            "--n must be between 2 and 10, got {}",
            args.n
        ))));
    }
    let h = toy_model(args.n);
    eprintln!(
        "toy model n={}: {} terms, identity offset {}",
        args.n,
        h.n_terms(),
        h.identity_offset()
    );
    emit(args.out.as_deref(), &h.serialize())
}
