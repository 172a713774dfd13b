//! The benchmark harness: repeated seeded trials per method, RMSE/MAE
//! aggregation against the exact ground energy, CSV and JSON emission.
//!
//! Wall times are measured but written as 0 unless timing output is
//! requested, so that fixed-seed runs stay byte-identical.

use crate::methods::{run_method, Instance, Method, MethodOptions};
use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub method: String,
    pub hamiltonian: String,
    pub m: usize,
    pub repeats: usize,
    pub rmse: f64,
    pub mae: f64,
    /// Largest per-repeat circuit count.
    pub n_circuit: usize,
    pub n_groups: usize,
    pub seed: u64,
    pub wall_ms: u64,
    pub estimates: Vec<f64>,
    pub ground_energy: f64,
}

/// RMSE over per-repeat estimates against a reference energy.
pub fn rmse(estimates: &[f64], truth: f64) -> f64 {
    let mean_sq = estimates
        .iter()
        .map(|e| (e - truth) * (e - truth))
        .sum::<f64>()
        / estimates.len() as f64;
    mean_sq.sqrt()
}

pub fn mae(estimates: &[f64], truth: f64) -> f64 {
    estimates.iter().map(|e| (e - truth).abs()).sum::<f64>() / estimates.len() as f64
}

/// Run every requested method on one instance. Methods run in parallel;
/// every trial's randomness derives from (seed, method, repeat) alone, so
/// scheduling cannot change the numbers.
pub fn run_bench(
    inst: &Instance,
    methods: &[Method],
    m: usize,
    repeats: usize,
    seed: u64,
    opts: &MethodOptions,
    timing: bool,
) -> Result<Vec<BenchRow>> {
    let rows: Vec<Result<BenchRow>> = methods
        .par_iter()
        .map(|&method| {
            let start = Instant::now();
            let run = run_method(inst, method, m, repeats, seed, opts)?;
            let wall = start.elapsed().as_millis() as u64;
            let estimates: Vec<f64> = run.outcomes.iter().map(|o| o.estimate).collect();
            let n_circuit = run.outcomes.iter().map(|o| o.n_circuit).max().unwrap_or(0);
            Ok(BenchRow {
                method: method.name().to_string(),
                hamiltonian: inst.name.clone(),
                m,
                repeats,
                rmse: rmse(&estimates, inst.ground_energy),
                mae: mae(&estimates, inst.ground_energy),
                n_circuit,
                n_groups: inst.groups.n_groups(),
                seed,
                wall_ms: if timing { wall } else { 0 },
                estimates,
                ground_energy: inst.ground_energy,
            })
        })
        .collect();
    rows.into_iter().collect()
}

pub const CSV_HEADER: &str =
    "method,hamiltonian,M,repeats,rmse,mae,n_circuit,n_groups,seed,wall_ms";

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.hamiltonian,
            r.m,
            r.repeats,
            r.rmse,
            r.mae,
            r.n_circuit,
            r.n_groups,
            r.seed,
            r.wall_ms
        );
    }
    out
}

pub fn to_json(rows: &[BenchRow]) -> String {
    #[derive(Serialize)]
    struct Dto<'a> {
        results: &'a [BenchRow],
    }
    serde_json::to_string_pretty(&Dto { results: rows }).expect("bench rows serialize")
}
