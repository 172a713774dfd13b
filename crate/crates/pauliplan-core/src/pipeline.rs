//! Simulation-driven allocation refinements: the coarse-grained search
//! over the ε hyperparameter, and the multi-round adaptive loop that
//! sharpens the bound with measured variances.

use crate::allocation::{
    optimize_weights, Allocation, AllocationError, BoundSpec, OperatorStats,
};
use crate::estimation::{
    estimate_energy, extract_signs, EnergyEstimate, EstimationError, EstimatorKind,
    OperatorSamples,
};
use crate::grouping::GroupSet;
use crate::hamiltonian::Hamiltonian;
use crate::simulator::{derive_seed, execute_recipe, SimulatorError, StateVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("test budget {m_test} is not divisible into {n_rounds} equal sub-budgets")]
    IndivisibleBudget { m_test: usize, n_rounds: usize },
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error(transparent)]
    Simulator(#[from] SimulatorError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
}

/// Empirical RMSE of repeated simulated estimations of ⟨H⟩ under a fixed
/// shot recipe. Repeat r samples with a seed derived from (`seed`, r).
pub fn empirical_rmse(
    h: &Hamiltonian,
    groups: &GroupSet,
    psi: &StateVector,
    shots: &[usize],
    estimator: EstimatorKind,
    n_rep: usize,
    seed: u64,
) -> Result<f64, PipelineError> {
    let truth = psi.energy(h);
    let mut sq = 0.0;
    for rep in 0..n_rep {
        let records = execute_recipe(psi, groups, shots, derive_seed(seed, rep as u64))?;
        let est = estimate_energy(&records, groups, h, estimator)?;
        sq += (est.value - truth) * (est.value - truth);
    }
    Ok((sq / n_rep as f64).sqrt())
}

/// One candidate of the coarse-grained ε search.
#[derive(Debug, Clone)]
pub struct CoarseGrainCandidate {
    pub m0: f64,
    pub epsilon_cg: f64,
    pub rmse: f64,
}

#[derive(Debug, Clone)]
pub struct CoarseGrainResult {
    /// Winning ε rescaled to the final budget.
    pub epsilon: f64,
    pub candidates: Vec<CoarseGrainCandidate>,
}

/// Search ε by drawing M₀ uniformly from [0.1, 10], allocating a test
/// sub-budget M_cg = m_test / n_rounds at ε_cg = 2Σ|a|·√(M₀/M_cg), and
/// scoring each candidate by simulated RMSE over `n_rep` repeats. The
/// best ε_cg is rescaled to the final budget as ε = ε_cg·√(M_cg/M).
#[allow(clippy::too_many_arguments)]
pub fn coarse_grain_search(
    h: &Hamiltonian,
    groups: &GroupSet,
    psi: &StateVector,
    final_budget: usize,
    m_test: usize,
    n_rounds: usize,
    n_rep: usize,
    estimator: EstimatorKind,
    seed: u64,
) -> Result<CoarseGrainResult, PipelineError> {
    if n_rounds == 0 || !m_test.is_multiple_of(n_rounds) {
        return Err(PipelineError::IndivisibleBudget { m_test, n_rounds });
    }
    let m_cg = m_test / n_rounds;
    let coeff_sum = h.abs_coeff_sum();
    let mut m0_rng = ChaCha12Rng::seed_from_u64(seed);
    let mut candidates = Vec::with_capacity(n_rounds);
    let mut best: Option<usize> = None;
    for round in 0..n_rounds {
        let m0: f64 = m0_rng.random_range(0.1..10.0);
        let epsilon_cg = 2.0 * coeff_sum * (m0 / m_cg as f64).sqrt();
        let spec = BoundSpec::hoeffding_per_operator(epsilon_cg, m_cg);
        let alloc = optimize_weights(&spec, groups, h)?;
        let rmse = empirical_rmse(
            h,
            groups,
            psi,
            &alloc.shots,
            estimator,
            n_rep,
            derive_seed(seed, 0x4347 ^ (round as u64) << 8),
        )?;
        candidates.push(CoarseGrainCandidate {
            m0,
            epsilon_cg,
            rmse,
        });
        if best.is_none_or(|b| rmse < candidates[b].rmse) {
            best = Some(round);
        }
    }
    let winner = &candidates[best.expect("n_rounds >= 1")];
    let epsilon = winner.epsilon_cg * (m_cg as f64 / final_budget as f64).sqrt();
    Ok(CoarseGrainResult {
        epsilon,
        candidates,
    })
}

/// Scope of the Bernstein range statistic: each term's own |mean|, or one
/// global maximum shared by every term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BernsteinMaxScope {
    PerTerm,
    Global,
}

/// Bernstein statistics from pooled signs. Terms never measured fall back
/// to the worst case for ±1 variables: variance 1, range 1.
pub fn bernstein_stats(samples: &OperatorSamples, scope: BernsteinMaxScope) -> Vec<OperatorStats> {
    let per_term: Vec<OperatorStats> = (0..samples.n_terms())
        .map(|t| match samples.mean(t) {
            Some(m) => OperatorStats {
                variance: samples.variance(t).expect("measured"),
                max_abs: m.abs().clamp(0.0, 1.0),
            },
            None => OperatorStats {
                variance: 1.0,
                max_abs: 1.0,
            },
        })
        .collect();
    match scope {
        BernsteinMaxScope::PerTerm => per_term,
        BernsteinMaxScope::Global => {
            let g = per_term
                .iter()
                .map(|s| s.max_abs)
                .fold(0.0f64, f64::max)
                .max(0.0);
            per_term
                .into_iter()
                .map(|s| OperatorStats {
                    variance: s.variance,
                    max_abs: g,
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveConfig {
    /// Number of measurement rounds T; the budget splits near-evenly with
    /// earlier rounds taking the remainder.
    pub rounds: usize,
    pub epsilon: f64,
    pub estimator: EstimatorKind,
    pub max_scope: BernsteinMaxScope,
}

#[derive(Debug, Clone)]
pub struct AdaptiveRound {
    pub allocation: Allocation,
    pub estimate: EnergyEstimate,
}

#[derive(Debug, Clone)]
pub struct AdaptiveTrace {
    pub rounds: Vec<AdaptiveRound>,
    /// Estimate over all rounds' pooled records.
    pub cumulative: EnergyEstimate,
    /// Distinct circuits executed across all rounds.
    pub n_circuit: usize,
}

/// The state-adaptive loop: round 1 allocates with the per-operator
/// Hoeffding bound; every later round re-allocates with the Bernstein
/// bound fed by variance and range statistics accumulated from all prior
/// rounds' records. Round t executes with base seed derive_seed(seed, t).
pub fn adaptive_rounds(
    h: &Hamiltonian,
    groups: &GroupSet,
    psi: &StateVector,
    budget: usize,
    cfg: &AdaptiveConfig,
    seed: u64,
) -> Result<AdaptiveTrace, PipelineError> {
    assert!(cfg.rounds >= 1, "adaptive loop needs at least one round");
    let t_rounds = cfg.rounds;
    let base = budget / t_rounds;
    let mut all_records = Vec::new();
    let mut rounds = Vec::with_capacity(t_rounds);
    for t in 0..t_rounds {
        let m_t = base + usize::from(t < budget % t_rounds);
        let spec = if t == 0 {
            BoundSpec::hoeffding_per_operator(cfg.epsilon, m_t)
        } else {
            let pooled = extract_signs(&all_records, groups, h)?;
            let stats = bernstein_stats(&pooled, cfg.max_scope);
            BoundSpec::bernstein(cfg.epsilon, m_t, stats)
        };
        let allocation = optimize_weights(&spec, groups, h)?;
        let records = execute_recipe(psi, groups, &allocation.shots, derive_seed(seed, t as u64))?;
        let estimate = estimate_energy(&records, groups, h, cfg.estimator)?;
        all_records.extend(records);
        rounds.push(AdaptiveRound {
            allocation,
            estimate,
        });
    }
    let cumulative = estimate_energy(&all_records, groups, h, cfg.estimator)?;
    let mut measured = vec![false; groups.n_groups()];
    for r in &all_records {
        measured[r.group_index] = true;
    }
    Ok(AdaptiveTrace {
        rounds,
        cumulative,
        n_circuit: measured.iter().filter(|&&m| m).count(),
    })
}
