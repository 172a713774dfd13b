//! Shot allocation over measurement groups by confidence-bound
//! minimization.
//!
//! Three bound flavors share one objective shape: a positive sum of
//! exponentials of affine functions of the group weight vector, hence
//! convex on the simplex. The solver is projected gradient descent with
//! backtracking, run on the log of the bound so extreme exponents stay
//! well-scaled; the minimizer is unchanged.

use crate::grouping::GroupSet;
use crate::hamiltonian::Hamiltonian;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AllocationError {
    #[error("weights are off the simplex: sum {sum}, min {min}")]
    OffSimplex { sum: f64, min: f64 },
    #[error("weight vector length {got} does not match group count {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("per-group bound needs overlap weights")]
    MissingOverlapWeights,
    #[error("bernstein bound needs per-operator statistics")]
    MissingOperatorStats,
    #[error("overlap weights malformed: term {term} rows must be >= 0 and sum to 1")]
    BadOverlapWeights { term: usize },
    #[error("operator statistics malformed: term {term} has negative variance")]
    BadOperatorStats { term: usize },
    #[error("solver hit {max_iters} iterations without converging (best bound {best_delta})")]
    NoConvergence {
        max_iters: usize,
        best_delta: f64,
        best: Allocation,
    },
}

/// Which tail bound drives the allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Per-operator Hoeffding: one exponential per Hamiltonian term with a
    /// shared scale 2(Σ|a|)².
    HoeffdingPerOperator,
    /// Per-group Hoeffding: one exponential per group, scaled by the
    /// overlap-weighted coefficient mass of the group.
    HoeffdingPerGroup,
    /// Bernstein: per-operator exponentials sharpened by empirical
    /// variance and range statistics.
    Bernstein,
}

/// Empirical statistics feeding the Bernstein bound.
#[derive(Debug, Clone, Copy)]
pub struct OperatorStats {
    /// Empirical variance of the ±1 sign samples, in [0, 1].
    pub variance: f64,
    /// Range proxy: |sample mean| clipped to [0, 1].
    pub max_abs: f64,
}

/// How the per-group overlap weights w°(term, group) are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverlapWeightRule {
    /// 1 / (number of groups containing the term).
    InverseMultiplicity,
    /// Proportional to the member count of each containing group.
    GroupSizeProportional,
    /// Zero out groups whose coefficient mass is below `min_fraction` of
    /// the heaviest group, unless they are a term's only group; remaining
    /// entries renormalize per term.
    TruncateLight { min_fraction: f64 },
}

/// Build the overlap-weight matrix w°, rows indexed by term.
pub fn overlap_weights(groups: &GroupSet, h: &Hamiltonian, rule: OverlapWeightRule) -> Vec<Vec<f64>> {
    let a = groups.n_groups();
    let group_mass: Vec<f64> = (0..a)
        .map(|alpha| {
            groups
                .group(alpha)
                .members
                .iter()
                .map(|&t| h.coefficient(t).abs())
                .sum()
        })
        .collect();
    let heaviest = group_mass.iter().cloned().fold(0.0, f64::max);
    let mut w = vec![vec![0.0; a]; groups.n_terms()];
    for (t, row) in w.iter_mut().enumerate() {
        let owners = groups.groups_of_term(t);
        if owners.is_empty() {
            continue;
        }
        match rule {
            OverlapWeightRule::InverseMultiplicity => {
                let share = 1.0 / owners.len() as f64;
                for &alpha in owners {
                    row[alpha] = share;
                }
            }
            OverlapWeightRule::GroupSizeProportional => {
                let total: f64 = owners
                    .iter()
                    .map(|&alpha| groups.group(alpha).members.len() as f64)
                    .sum();
                for &alpha in owners {
                    row[alpha] = groups.group(alpha).members.len() as f64 / total;
                }
            }
            OverlapWeightRule::TruncateLight { min_fraction } => {
                let kept: Vec<usize> = owners
                    .iter()
                    .copied()
                    .filter(|&alpha| group_mass[alpha] >= min_fraction * heaviest)
                    .collect();
                let kept = if kept.is_empty() { owners.to_vec() } else { kept };
                let share = 1.0 / kept.len() as f64;
                for alpha in kept {
                    row[alpha] = share;
                }
            }
        }
    }
    w
}

/// A fully specified confidence bound: kind, accuracy parameter, budget,
/// and whatever side data the kind requires.
#[derive(Debug, Clone)]
pub struct BoundSpec {
    pub kind: BoundKind,
    pub epsilon: f64,
    pub budget: usize,
    pub overlap_weights: Option<Vec<Vec<f64>>>,
    pub operator_stats: Option<Vec<OperatorStats>>,
}

impl BoundSpec {
    pub fn hoeffding_per_operator(epsilon: f64, budget: usize) -> Self {
        BoundSpec {
            kind: BoundKind::HoeffdingPerOperator,
            epsilon,
            budget,
            overlap_weights: None,
            operator_stats: None,
        }
    }

    pub fn hoeffding_per_group(epsilon: f64, budget: usize, overlap_weights: Vec<Vec<f64>>) -> Self {
        BoundSpec {
            kind: BoundKind::HoeffdingPerGroup,
            epsilon,
            budget,
            overlap_weights: Some(overlap_weights),
            operator_stats: None,
        }
    }

    pub fn bernstein(epsilon: f64, budget: usize, stats: Vec<OperatorStats>) -> Self {
        BoundSpec {
            kind: BoundKind::Bernstein,
            epsilon,
            budget,
            overlap_weights: None,
            operator_stats: Some(stats),
        }
    }

    fn validate(&self, groups: &GroupSet) -> Result<(), AllocationError> {
        match self.kind {
            BoundKind::HoeffdingPerOperator => {}
            BoundKind::HoeffdingPerGroup => {
                let w = self
                    .overlap_weights
                    .as_ref()
                    .ok_or(AllocationError::MissingOverlapWeights)?;
                for (t, row) in w.iter().enumerate() {
                    let sum: f64 = row.iter().sum();
                    if row.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-9 {
                        return Err(AllocationError::BadOverlapWeights { term: t });
                    }
                }
            }
            BoundKind::Bernstein => {
                let stats = self
                    .operator_stats
                    .as_ref()
                    .ok_or(AllocationError::MissingOperatorStats)?;
                if stats.len() != groups.n_terms() {
                    return Err(AllocationError::MissingOperatorStats);
                }
                for (t, s) in stats.iter().enumerate() {
                    if s.variance < 0.0 {
                        return Err(AllocationError::BadOperatorStats { term: t });
                    }
                }
            }
        }
        Ok(())
    }
}

/// The objective in "sum of exponentials" normal form: δ(w) = 2 Σ_k
/// exp(−⟨rate_k, w⟩), with each rate vector supported on the groups that
/// cover item k. Rows with an infinite rate are exact-zero contributions
/// and are dropped (a deviation of an identically-zero variable).
struct ExpSumObjective {
    rates: Vec<Vec<(usize, f64)>>,
}

impl ExpSumObjective {
    fn build(spec: &BoundSpec, groups: &GroupSet, h: &Hamiltonian) -> Self {
        let eps2m = spec.epsilon * spec.epsilon * spec.budget as f64;
        let coeff_sum = h.abs_coeff_sum();
        let shared = eps2m / (2.0 * coeff_sum * coeff_sum);
        let mut rates = Vec::new();
        match spec.kind {
            BoundKind::HoeffdingPerOperator => {
                for t in 0..groups.n_terms() {
                    rates.push(
                        groups
                            .groups_of_term(t)
                            .iter()
                            .map(|&alpha| (alpha, shared))
                            .collect(),
                    );
                }
            }
            BoundKind::Bernstein => {
                let stats = spec.operator_stats.as_ref().expect("validated");
                for (t, st) in stats.iter().enumerate().take(groups.n_terms()) {
                    let denom = st.variance + spec.epsilon * st.max_abs / 3.0;
                    if denom == 0.0 && !groups.groups_of_term(t).is_empty() {
                        // Zero variance and zero range: the estimator is
                        // exact, the term cannot deviate.
                        continue;
                    }
                    let rate = shared / denom;
                    rates.push(
                        groups
                            .groups_of_term(t)
                            .iter()
                            .map(|&alpha| (alpha, rate))
                            .collect(),
                    );
                }
            }
            BoundKind::HoeffdingPerGroup => {
                let wo = spec.overlap_weights.as_ref().expect("validated");
                let a = groups.n_groups() as f64;
                for (alpha, group) in groups.groups().iter().enumerate() {
                    let mass: f64 = group
                        .members
                        .iter()
                        .map(|&t| h.coefficient(t).abs() * wo[t][alpha])
                        .sum();
                    if mass == 0.0 {
                        continue;
                    }
                    let scale = a * mass;
                    rates.push(vec![(alpha, eps2m / (2.0 * scale * scale))]);
                }
            }
        }
        ExpSumObjective { rates }
    }

    /// δ(w) evaluated literally.
    fn delta(&self, w: &[f64]) -> f64 {
        2.0 * self
            .rates
            .iter()
            .map(|row| {
                let e: f64 = row.iter().map(|&(alpha, r)| r * w[alpha]).sum();
                (-e).exp()
            })
            .sum::<f64>()
    }

    /// ln δ(w) and its gradient, computed with a max-shift so huge ε²M
    /// stays finite.
    fn log_delta_grad(&self, w: &[f64], grad: &mut [f64]) -> f64 {
        grad.fill(0.0);
        if self.rates.is_empty() {
            return f64::NEG_INFINITY;
        }
        let exponents: Vec<f64> = self
            .rates
            .iter()
            .map(|row| -row.iter().map(|&(alpha, r)| r * w[alpha]).sum::<f64>())
            .collect();
        let m = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        let mut scaled = vec![0.0; exponents.len()];
        for (k, &e) in exponents.iter().enumerate() {
            let s = (e - m).exp();
            scaled[k] = s;
            total += s;
        }
        for (k, row) in self.rates.iter().enumerate() {
            let p = scaled[k] / total;
            for &(alpha, r) in row {
                grad[alpha] -= p * r;
            }
        }
        m + total.ln() + std::f64::consts::LN_2
    }
}

/// Exact confidence-bound evaluation at a given weight vector.
pub fn conf_bound(
    spec: &BoundSpec,
    groups: &GroupSet,
    h: &Hamiltonian,
    w: &[f64],
) -> Result<f64, AllocationError> {
    if w.len() != groups.n_groups() {
        return Err(AllocationError::LengthMismatch {
            got: w.len(),
            expected: groups.n_groups(),
        });
    }
    let sum: f64 = w.iter().sum();
    let min = w.iter().cloned().fold(f64::INFINITY, f64::min);
    if (sum - 1.0).abs() > 1e-9 || min < -1e-9 {
        return Err(AllocationError::OffSimplex { sum, min });
    }
    spec.validate(groups)?;
    Ok(ExpSumObjective::build(spec, groups, h).delta(w))
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).expect("finite weights"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    let mut rho = 0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            rho = i + 1;
            theta = t;
        }
    }
    debug_assert!(rho > 0);
    v.iter().map(|&vi| (vi - theta).max(0.0)).collect()
}

/// An allocation: optimal simplex weights, the integer shot split, and the
/// bound value reached. `support_size` counts groups with at least one
/// shot — the number of distinct circuits the recipe executes.
#[derive(Debug, Clone, Serialize)]
pub struct Allocation {
    pub weights: Vec<f64>,
    pub shots: Vec<usize>,
    pub epsilon: f64,
    #[serde(rename = "delta")]
    pub bound_value: f64,
    pub support_size: usize,
}

impl Allocation {
    fn from_weights(weights: Vec<f64>, spec: &BoundSpec, delta: f64) -> Self {
        let shots = weights_to_shots(&weights, spec.budget);
        let support_size = shots.iter().filter(|&&m| m >= 1).count();
        Allocation {
            weights,
            shots,
            epsilon: spec.epsilon,
            bound_value: delta,
            support_size,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("Allocation serializes")
    }
}

const REL_DECREASE_TOL: f64 = 1e-12;
const STALL_ITERS: usize = 50;
pub const DEFAULT_MAX_ITERS: usize = 100_000;
pub const DEFAULT_STATIONARITY_TOL: f64 = 1e-8;

/// Solver knobs; the defaults are the pinned convergence contract.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub stationarity_tol: f64,
    pub max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            stationarity_tol: DEFAULT_STATIONARITY_TOL,
            max_iters: DEFAULT_MAX_ITERS,
        }
    }
}

/// Minimize the confidence bound over the simplex by projected gradient
/// descent with backtracking, starting from uniform weights. Converges
/// when the projected-gradient stationarity norm of the log-objective
/// drops below 1e-8, or the relative objective decrease stays below 1e-12
/// for 50 iterations.
pub fn optimize_weights(
    spec: &BoundSpec,
    groups: &GroupSet,
    h: &Hamiltonian,
) -> Result<Allocation, AllocationError> {
    optimize_weights_with(spec, groups, h, SolverOptions::default())
}

pub fn optimize_weights_with(
    spec: &BoundSpec,
    groups: &GroupSet,
    h: &Hamiltonian,
    opts: SolverOptions,
) -> Result<Allocation, AllocationError> {
    spec.validate(groups)?;
    let a = groups.n_groups();
    let obj = ExpSumObjective::build(spec, groups, h);
    let mut w = vec![1.0 / a as f64; a];
    if a == 1 {
        let delta = obj.delta(&w);
        return Ok(Allocation::from_weights(w, spec, delta));
    }

    let mut grad = vec![0.0; a];
    let mut f = obj.log_delta_grad(&w, &mut grad);
    if f == f64::NEG_INFINITY {
        // No contributing rows: every weight vector is optimal.
        return Ok(Allocation::from_weights(w, spec, 0.0));
    }
    let mut step = 1.0;
    let mut stall = 0usize;
    let mut scratch = vec![0.0; a];

    for _ in 0..opts.max_iters {
        // Stationarity: ‖w − Proj(w − ∇f)‖.
        let probe: Vec<f64> = w.iter().zip(&grad).map(|(wi, gi)| wi - gi).collect();
        let proj = project_simplex(&probe);
        let stat: f64 = proj
            .iter()
            .zip(&w)
            .map(|(p, wi)| (p - wi) * (p - wi))
            .sum::<f64>()
            .sqrt();
        if stat <= opts.stationarity_tol {
            let delta = obj.delta(&w);
            return Ok(Allocation::from_weights(w, spec, delta));
        }

        // Backtracking on the proximal sufficient-decrease condition.
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = w
                .iter()
                .zip(&grad)
                .map(|(wi, gi)| wi - step * gi)
                .collect();
            let w_new = project_simplex(&trial);
            let lin: f64 = w_new
                .iter()
                .zip(&w)
                .zip(&grad)
                .map(|((n, o), g)| (n - o) * g)
                .sum();
            let dist2: f64 = w_new
                .iter()
                .zip(&w)
                .map(|(n, o)| (n - o) * (n - o))
                .sum();
            let f_new = obj.log_delta_grad(&w_new, &mut scratch);
            if f_new <= f + lin + dist2 / (2.0 * step) + 1e-15 {
                let rel = if f.is_finite() {
                    (f - f_new).abs() / f.abs().max(1.0)
                } else {
                    1.0
                };
                stall = if rel <= REL_DECREASE_TOL { stall + 1 } else { 0 };
                w = w_new;
                f = f_new;
                grad.copy_from_slice(&scratch);
                step *= 1.5;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Step underflow: the iterate is numerically stationary.
            let delta = obj.delta(&w);
            return Ok(Allocation::from_weights(w, spec, delta));
        }
        if stall >= STALL_ITERS {
            let delta = obj.delta(&w);
            return Ok(Allocation::from_weights(w, spec, delta));
        }
    }
    let delta = obj.delta(&w);
    Err(AllocationError::NoConvergence {
        max_iters: opts.max_iters,
        best_delta: delta,
        best: Allocation::from_weights(w, spec, delta),
    })
}

/// Floor the fractional shot counts, then hand the leftover shots to the
/// groups with the largest fractional parts (ties to the lower index).
pub fn weights_to_shots(w: &[f64], budget: usize) -> Vec<usize> {
    let mut shots: Vec<usize> = Vec::with_capacity(w.len());
    let mut fractions: Vec<(usize, f64)> = Vec::with_capacity(w.len());
    for (alpha, &wi) in w.iter().enumerate() {
        let exact = wi * budget as f64;
        let floor = exact.floor();
        shots.push(floor as usize);
        fractions.push((alpha, exact - floor));
    }
    let assigned: usize = shots.iter().sum();
    let remainder = budget.saturating_sub(assigned);
    fractions.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite").then(a.0.cmp(&b.0)));
    for &(alpha, _) in fractions.iter().take(remainder) {
        shots[alpha] += 1;
    }
    shots
}

/// The budget-scaled default accuracy parameter: ε = 2 Σ|a| · √(M₀/M).
pub fn naive_epsilon(h: &Hamiltonian, budget: usize, m0: f64) -> f64 {
    assert!(budget >= 1 && m0 > 0.0);
    2.0 * h.abs_coeff_sum() * (m0 / budget as f64).sqrt()
}
