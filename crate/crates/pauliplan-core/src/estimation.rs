//! Post-processing of measurement records into operator and energy
//! estimates.
//!
//! Each record contributes one ±1 sign per shot to every term of its
//! group (the product of the measured signs on the term's support). Terms
//! hit by several groups pool their samples with equal weight. The energy
//! estimator is either the arithmetic mean or a median-of-means over
//! equal-size blocks, the latter being the sane choice once shots
//! concentrate on few groups and hit counts get large.

use crate::grouping::GroupSet;
use crate::hamiltonian::Hamiltonian;
use crate::simulator::MeasurementRecord;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EstimationError {
    #[error("record for group {group} has basis {basis} that does not cover member term {term}")]
    BasisMismatch {
        group: usize,
        term: usize,
        basis: String,
    },
    #[error("record group index {0} out of range")]
    BadGroupIndex(usize),
}

/// Pooled ±1 sign samples per Hamiltonian term, in record order.
#[derive(Debug, Clone)]
pub struct OperatorSamples {
    samples: Vec<Vec<i8>>,
}

impl OperatorSamples {
    pub fn n_terms(&self) -> usize {
        self.samples.len()
    }

    /// M_ℓ: number of pooled samples for a term.
    pub fn count(&self, term: usize) -> usize {
        self.samples[term].len()
    }

    pub fn signs(&self, term: usize) -> &[i8] {
        &self.samples[term]
    }

    /// Arithmetic mean of the signs; `None` when the term was never hit.
    pub fn mean(&self, term: usize) -> Option<f64> {
        let s = &self.samples[term];
        if s.is_empty() {
            return None;
        }
        Some(s.iter().map(|&v| v as f64).sum::<f64>() / s.len() as f64)
    }

    /// Population variance of the signs (1 − mean² for ±1 samples).
    pub fn variance(&self, term: usize) -> Option<f64> {
        self.mean(term).map(|m| (1.0 - m * m).max(0.0))
    }
}

/// Pool signs from all records: a record of group α feeds every term of
/// C_α, one sign per outcome. A record whose basis fails to cover a
/// claimed member indicates a grouping bug and is rejected.
pub fn extract_signs(
    records: &[MeasurementRecord],
    groups: &GroupSet,
    h: &Hamiltonian,
) -> Result<OperatorSamples, EstimationError> {
    let mut samples = vec![Vec::new(); h.n_terms()];
    for rec in records {
        let alpha = rec.group_index;
        if alpha >= groups.n_groups() {
            return Err(EstimationError::BadGroupIndex(alpha));
        }
        for &t in &groups.group(alpha).members {
            let op = h.operator(t);
            if !op.covered_by(&rec.basis).expect("equal widths") {
                return Err(EstimationError::BasisMismatch {
                    group: alpha,
                    term: t,
                    basis: rec.basis.to_axis_string(),
                });
            }
            let mask = op.support_mask_u64();
            let sink = &mut samples[t];
            sink.reserve(rec.outcomes.len());
            for &o in &rec.outcomes {
                sink.push(MeasurementRecord::sign(o, mask));
            }
        }
    }
    Ok(OperatorSamples { samples })
}

/// Per-term hit counts M_ℓ without materializing the sign lists.
pub fn hit_rate(records: &[MeasurementRecord], groups: &GroupSet, h: &Hamiltonian) -> Vec<usize> {
    let mut hits = vec![0usize; h.n_terms()];
    for rec in records {
        for &t in &groups.group(rec.group_index).members {
            hits[t] += rec.outcomes.len();
        }
    }
    hits
}

/// How the block count K of the median-of-means is chosen per term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KRule {
    /// K = ⌈√M⌉.
    SqrtM,
    /// K = round(M·σ/ε_ℓ); the plug-in σ comes from the sample itself.
    VarianceScaled,
    /// K = round(M·ε_ℓ²/σ²), the reciprocal scaling.
    VarianceScaledInverse,
    /// A fixed K for every term.
    Fixed(usize),
}

/// Median-of-means configuration. `epsilon_term` is the per-operator
/// accuracy ε_ℓ = ε / Σ|a| used by the variance-scaled rules. K always
/// clamps to [1, M_ℓ]; an even K takes the midpoint of the two middle
/// block means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomConfig {
    pub rule: KRule,
    pub epsilon_term: f64,
}

impl MomConfig {
    pub fn fixed(k: usize) -> Self {
        MomConfig {
            rule: KRule::Fixed(k),
            epsilon_term: 1.0,
        }
    }

    fn blocks(&self, m: usize, sigma2: f64) -> usize {
        let raw = match self.rule {
            KRule::SqrtM => (m as f64).sqrt().ceil(),
            KRule::VarianceScaled => (m as f64 * (sigma2.max(0.0)).sqrt() / self.epsilon_term).round(),
            KRule::VarianceScaledInverse => {
                if sigma2 <= 0.0 {
                    m as f64
                } else {
                    (m as f64 * self.epsilon_term * self.epsilon_term / sigma2).round()
                }
            }
            KRule::Fixed(k) => k as f64,
        };
        (raw as usize).clamp(1, m)
    }
}

/// Median of K equal-size block means over a sign stream. The trailing
/// `m − K·⌊m/K⌋` samples are discarded so blocks stay equal.
pub fn median_of_means(signs: &[i8], k: usize) -> Option<f64> {
    let m = signs.len();
    if m == 0 {
        return None;
    }
    let k = k.clamp(1, m);
    let block = m / k;
    let mut means: Vec<f64> = (0..k)
        .map(|i| {
            signs[i * block..(i + 1) * block]
                .iter()
                .map(|&v| v as f64)
                .sum::<f64>()
                / block as f64
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    Some(if k % 2 == 1 {
        means[k / 2]
    } else {
        (means[k / 2 - 1] + means[k / 2]) / 2.0
    })
}

/// Which per-term estimator turns signs into expectation values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorKind {
    Mean,
    MedianOfMeans(MomConfig),
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::Mean => "mean",
            EstimatorKind::MedianOfMeans(_) => "median_of_means",
        }
    }
}

/// Per-term estimates aggregated into an energy value, with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyEstimate {
    /// identity_offset + Σ a_ℓ Ô_ℓ.
    pub value: f64,
    pub estimator: String,
    pub term_estimates: Vec<f64>,
    /// Per-term hit counts M_ℓ.
    pub term_hits: Vec<usize>,
    /// Per-term population variance of the pooled signs.
    pub term_variance: Vec<f64>,
    /// Terms with zero hits; they contribute 0 to the value.
    pub unmeasured: Vec<usize>,
}

impl EnergyEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }
}

/// Full estimation pass over a set of records.
pub fn estimate_energy(
    records: &[MeasurementRecord],
    groups: &GroupSet,
    h: &Hamiltonian,
    estimator: EstimatorKind,
) -> Result<EnergyEstimate, EstimationError> {
    let samples = extract_signs(records, groups, h)?;
    Ok(estimate_from_samples(&samples, h, estimator))
}

pub fn estimate_from_samples(
    samples: &OperatorSamples,
    h: &Hamiltonian,
    estimator: EstimatorKind,
) -> EnergyEstimate {
    let l = h.n_terms();
    let mut term_estimates = vec![0.0; l];
    let mut term_hits = vec![0usize; l];
    let mut term_variance = vec![0.0; l];
    let mut unmeasured = Vec::new();
    for t in 0..l {
        term_hits[t] = samples.count(t);
        if term_hits[t] == 0 {
            unmeasured.push(t);
            continue;
        }
        let sigma2 = samples.variance(t).expect("measured");
        term_variance[t] = sigma2;
        term_estimates[t] = match estimator {
            EstimatorKind::Mean => samples.mean(t).expect("measured"),
            EstimatorKind::MedianOfMeans(cfg) => {
                let k = cfg.blocks(term_hits[t], sigma2);
                median_of_means(samples.signs(t), k).expect("measured")
            }
        };
    }
    let value = h.identity_offset()
        + h.terms()
            .iter()
            .enumerate()
            .map(|(t, (a, _))| a * term_estimates[t])
            .sum::<f64>();
    EnergyEstimate {
        value,
        estimator: estimator.name().to_string(),
        term_estimates,
        term_hits,
        term_variance,
        unmeasured,
    }
}
