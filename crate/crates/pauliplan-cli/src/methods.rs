//! The measurement strategies the harness compares: the three allocation
//! pipelines (naive ε, coarse-grained ε search, state-adaptive) plus the
//! even-split and uniform-random-shadow baselines.

use anyhow::{anyhow, bail, Context, Result};
use pauliplan_core::allocation::{
    naive_epsilon, optimize_weights_with, overlap_weights, Allocation, BoundKind, BoundSpec,
    OverlapWeightRule, SolverOptions,
};
use pauliplan_core::estimation::{estimate_energy, EnergyEstimate, EstimatorKind, KRule, MomConfig};
use pauliplan_core::grouping::{maxmin_grouping, GroupSet};
use pauliplan_core::hamiltonian::Hamiltonian;
use pauliplan_core::pipeline::{
    adaptive_rounds, coarse_grain_search, AdaptiveConfig, BernsteinMaxScope,
};
use pauliplan_core::simulator::{
    derive_seed, execute_recipe, ground_state, sample_basis, seeded_rng, MeasurementRecord,
    StateVector,
};
use pauliplan_core::pauli::{Axis, PauliString};
use rand::Rng;
use rayon::prelude::*;
use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

/// A malformed request (as opposed to a runtime failure); maps to exit 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for UsageError {}

/// One problem instance with everything precomputed: parsed Hamiltonian,
/// Max-Min groups, exact ground state and energy.
pub struct Instance {
    pub name: String,
    pub hamiltonian: Hamiltonian,
    pub groups: GroupSet,
    pub psi: StateVector,
    pub ground_energy: f64,
}

impl Instance {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let hamiltonian = pauliplan_core::parse_hamiltonian(&text)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        Instance::build(name, hamiltonian)
    }

    pub fn build(name: String, hamiltonian: Hamiltonian) -> Result<Self> {
        let groups = maxmin_grouping(&hamiltonian)?;
        let (ground_energy, psi) = ground_state(&hamiltonian)?;
        Ok(Instance {
            name,
            hamiltonian,
            groups,
            psi,
            ground_energy,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    RogsNaive,
    RogsCoarse,
    RogsAdaptive,
    EvenDistribution,
    UniformShadow,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::RogsNaive => "rogs_naive",
            Method::RogsCoarse => "rogs_coarse",
            Method::RogsAdaptive => "rogs_adaptive",
            Method::EvenDistribution => "even_distribution",
            Method::UniformShadow => "uniform_shadow",
        }
    }

    fn seed_tag(&self) -> u64 {
        match self {
            Method::RogsNaive => 1,
            Method::RogsCoarse => 2,
            Method::RogsAdaptive => 3,
            Method::EvenDistribution => 4,
            Method::UniformShadow => 5,
        }
    }
}

impl FromStr for Method {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, UsageError> {
        match s {
            "rogs_naive" => Ok(Method::RogsNaive),
            "rogs_coarse" => Ok(Method::RogsCoarse),
            "rogs_adaptive" => Ok(Method::RogsAdaptive),
            "even_distribution" => Ok(Method::EvenDistribution),
            "uniform_shadow" => Ok(Method::UniformShadow),
            other => Err(UsageError(format!(
                "unknown method '{other}' (expected rogs_naive, rogs_coarse, rogs_adaptive, even_distribution, uniform_shadow)"
            ))),
        }
    }
}

/// Per-term estimator choice; the ε-dependent piece resolves at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorChoice {
    Mean,
    Mom(KRule),
}

impl EstimatorChoice {
    pub fn resolve(&self, epsilon: f64, h: &Hamiltonian) -> EstimatorKind {
        match *self {
            EstimatorChoice::Mean => EstimatorKind::Mean,
            EstimatorChoice::Mom(rule) => EstimatorKind::MedianOfMeans(MomConfig {
                rule,
                epsilon_term: epsilon / h.abs_coeff_sum(),
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MethodOptions {
    pub bound: BoundKind,
    pub epsilon: Option<f64>,
    pub m0: f64,
    pub estimator: EstimatorChoice,
    pub wo_rule: OverlapWeightRule,
    pub solver: SolverOptions,
    /// Coarse search: test budget (defaults to the main budget), rounds,
    /// and simulated repeats per candidate.
    pub coarse_m_test: Option<usize>,
    pub coarse_rounds: usize,
    pub coarse_reps: usize,
    /// Adaptive rounds T.
    pub adaptive_rounds: usize,
    pub bernstein_scope: BernsteinMaxScope,
}

impl Default for MethodOptions {
    fn default() -> Self {
        MethodOptions {
            bound: BoundKind::HoeffdingPerOperator,
            epsilon: None,
            m0: 1.0,
            estimator: EstimatorChoice::Mom(KRule::VarianceScaled),
            wo_rule: OverlapWeightRule::InverseMultiplicity,
            solver: SolverOptions::default(),
            coarse_m_test: None,
            coarse_rounds: 10,
            coarse_reps: 10,
            adaptive_rounds: 2,
            bernstein_scope: BernsteinMaxScope::PerTerm,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub estimate: f64,
    pub n_circuit: usize,
}

#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    /// ε the allocation used; 0 for the baselines that have none.
    pub epsilon: f64,
    pub allocation: Option<Allocation>,
    pub outcomes: Vec<TrialOutcome>,
    /// Full per-term diagnostics of the first repeat, when the method
    /// runs through the record-based estimator.
    pub first_estimate: Option<EnergyEstimate>,
}

fn bound_spec(
    kind: BoundKind,
    epsilon: f64,
    budget: usize,
    groups: &GroupSet,
    h: &Hamiltonian,
    wo_rule: OverlapWeightRule,
) -> Result<BoundSpec> {
    match kind {
        BoundKind::HoeffdingPerOperator => Ok(BoundSpec::hoeffding_per_operator(epsilon, budget)),
        BoundKind::HoeffdingPerGroup => Ok(BoundSpec::hoeffding_per_group(
            epsilon,
            budget,
            overlap_weights(groups, h, wo_rule),
        )),
        BoundKind::Bernstein => Err(anyhow!(UsageError(
            "the bernstein bound needs measurement statistics; use --method rogs_adaptive".into()
        ))),
    }
}

/// Split a budget evenly over groups, remainder to the lowest indices.
pub fn even_shots(budget: usize, n_groups: usize) -> Vec<usize> {
    let base = budget / n_groups;
    let rem = budget % n_groups;
    (0..n_groups)
        .map(|alpha| base + usize::from(alpha < rem))
        .collect()
}

/// Run one method for `repeats` independently seeded trials at budget `m`.
/// Trial r of a method draws from seeds derived from (seed, method, r), so
/// methods never share streams and reruns are bit-identical.
pub fn run_method(
    inst: &Instance,
    method: Method,
    m: usize,
    repeats: usize,
    seed: u64,
    opts: &MethodOptions,
) -> Result<MethodRun> {
    if m == 0 {
        bail!(UsageError("--shots must be at least 1".into()));
    }
    if repeats == 0 {
        bail!(UsageError("--repeats must be at least 1".into()));
    }
    let h = &inst.hamiltonian;
    let groups = &inst.groups;
    let method_seed = derive_seed(seed, method.seed_tag());
    match method {
        Method::RogsNaive | Method::RogsCoarse => {
            let epsilon = match (method, opts.epsilon) {
                (Method::RogsNaive, Some(e)) => e,
                (Method::RogsNaive, None) => naive_epsilon(h, m, opts.m0),
                _ => {
                    let m_test = opts.coarse_m_test.unwrap_or(m);
                    let probe = EstimatorChoice::Mean.resolve(0.0, h);
                    let search = coarse_grain_search(
                        h,
                        groups,
                        &inst.psi,
                        m,
                        m_test,
                        opts.coarse_rounds,
                        opts.coarse_reps,
                        probe,
                        derive_seed(method_seed, 0xE5),
                    )?;
                    search.epsilon
                }
            };
            let spec = bound_spec(opts.bound, epsilon, m, groups, h, opts.wo_rule)?;
            let allocation = optimize_weights_with(&spec, groups, h, opts.solver)?;
            let estimator = opts.estimator.resolve(epsilon, h);
            let trials = (0..repeats)
                .into_par_iter()
                .map(|rep| {
                    let records = execute_recipe(
                        &inst.psi,
                        groups,
                        &allocation.shots,
                        derive_seed(method_seed, rep as u64),
                    )?;
                    let est = estimate_energy(&records, groups, h, estimator)?;
                    Ok((
                        TrialOutcome {
                            estimate: est.value,
                            n_circuit: allocation.support_size,
                        },
                        est,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let first_estimate = trials.first().map(|(_, e)| e.clone());
            let outcomes = trials.into_iter().map(|(o, _)| o).collect();
            Ok(MethodRun {
                method,
                epsilon,
                allocation: Some(allocation),
                outcomes,
                first_estimate,
            })
        }
        Method::RogsAdaptive => {
            let epsilon = opts.epsilon.unwrap_or_else(|| naive_epsilon(h, m, opts.m0));
            let cfg = AdaptiveConfig {
                rounds: opts.adaptive_rounds,
                epsilon,
                estimator: opts.estimator.resolve(epsilon, h),
                max_scope: opts.bernstein_scope,
            };
            let trials = (0..repeats)
                .into_par_iter()
                .map(|rep| {
                    let trace = adaptive_rounds(
                        h,
                        groups,
                        &inst.psi,
                        m,
                        &cfg,
                        derive_seed(method_seed, rep as u64),
                    )?;
                    Ok((
                        TrialOutcome {
                            estimate: trace.cumulative.value,
                            n_circuit: trace.n_circuit,
                        },
                        trace.cumulative,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let first_estimate = trials.first().map(|(_, e)| e.clone());
            let outcomes = trials.into_iter().map(|(o, _)| o).collect();
            Ok(MethodRun {
                method,
                epsilon,
                allocation: None,
                outcomes,
                first_estimate,
            })
        }
        Method::EvenDistribution => {
            let shots = even_shots(m, groups.n_groups());
            let n_circuit = shots.iter().filter(|&&s| s >= 1).count();
            // The baseline shares the estimator convention, with ε taken
            // at its naive default.
            let epsilon = naive_epsilon(h, m, opts.m0);
            let estimator = opts.estimator.resolve(epsilon, h);
            let trials = (0..repeats)
                .into_par_iter()
                .map(|rep| {
                    let records = execute_recipe(
                        &inst.psi,
                        groups,
                        &shots,
                        derive_seed(method_seed, rep as u64),
                    )?;
                    let est = estimate_energy(&records, groups, h, estimator)?;
                    Ok((TrialOutcome { estimate: est.value, n_circuit }, est))
                })
                .collect::<Result<Vec<_>>>()?;
            let first_estimate = trials.first().map(|(_, e)| e.clone());
            let outcomes = trials.into_iter().map(|(o, _)| o).collect();
            Ok(MethodRun {
                method,
                epsilon: 0.0,
                allocation: None,
                outcomes,
                first_estimate,
            })
        }
        Method::UniformShadow => {
            let outcomes = (0..repeats)
                .into_par_iter()
                .map(|rep| uniform_shadow_trial(inst, m, derive_seed(method_seed, rep as u64)))
                .collect::<Result<Vec<_>>>()?;
            Ok(MethodRun {
                method,
                epsilon: 0.0,
                allocation: None,
                outcomes,
                first_estimate: None,
            })
        }
    }
}

/// Classical-shadow baseline: every one of the `m` snapshots measures a
/// basis with i.i.d. uniform per-qubit axes; each term is estimated by
/// the mean sign over the snapshots whose basis covers it.
pub fn uniform_shadow_trial(inst: &Instance, m: usize, seed: u64) -> Result<TrialOutcome> {
    let h = &inst.hamiltonian;
    let n = h.n_qubits();
    let l = h.n_terms();
    let masks: Vec<u64> = (0..l).map(|t| h.operator(t).support_mask_u64()).collect();
    let mut sums = vec![0.0f64; l];
    let mut hits = vec![0usize; l];
    let mut distinct: HashSet<String> = HashSet::new();
    let mut rng = seeded_rng(seed);
    for _ in 0..m {
        let axes: Vec<Axis> = (0..n)
            .map(|_| match rng.random_range(0..3) {
                0 => Axis::X,
                1 => Axis::Y,
                _ => Axis::Z,
            })
            .collect();
        let basis = PauliString::from_axes(&axes);
        distinct.insert(basis.to_axis_string());
        let rec = sample_basis(&inst.psi, &basis, 1, &mut rng)?;
        let outcome = rec.outcomes[0];
        for t in 0..l {
            if h.operator(t).covered_by(&basis).expect("equal widths") {
                hits[t] += 1;
                sums[t] += MeasurementRecord::sign(outcome, masks[t]) as f64;
            }
        }
    }
    let estimate = h.identity_offset()
        + h.terms()
            .iter()
            .enumerate()
            .map(|(t, (a, _))| {
                if hits[t] == 0 {
                    0.0
                } else {
                    a * sums[t] / hits[t] as f64
                }
            })
            .sum::<f64>();
    Ok(TrialOutcome {
        estimate,
        n_circuit: distinct.len(),
    })
}
