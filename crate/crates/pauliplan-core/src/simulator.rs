//! Dense statevector simulation of the quantum measurement stage.
//!
//! Ground states come from a full Hermitian eigendecomposition of the
//! 2^n × 2^n Hamiltonian matrix (n ≤ 14). Pauli-basis measurement rotates
//! each qubit into the computational basis (X via H, Y via S†·H, Z
//! untouched) and draws bitstrings from the exact outcome distribution by
//! inverse CDF on a counter-based generator, so runs are reproducible from
//! a single u64 seed.

use crate::grouping::GroupSet;
use crate::hamiltonian::Hamiltonian;
use crate::pauli::{Axis, PauliString};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;
use thiserror::Error;

pub const MAX_SIM_QUBITS: usize = 14;

#[derive(Debug, Error, PartialEq)]
pub enum SimulatorError {
    #[error("{0} qubits exceed the dense simulation cap of {MAX_SIM_QUBITS}")]
    TooManyQubits(usize),
    #[error("state norm {0} is not 1 within 1e-10")]
    NotNormalized(f64),
    #[error("basis must have full support, found identity at qubit {0}")]
    PartialBasis(usize),
    #[error("hamiltonian has no terms to diagonalize")]
    Empty,
}

/// Pure n-qubit state, unit norm, qubit i ↔ bit i of the amplitude index.
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self, SimulatorError> {
        if n_qubits > MAX_SIM_QUBITS {
            return Err(SimulatorError::TooManyQubits(n_qubits));
        }
        assert_eq!(amps.len(), 1 << n_qubits, "amplitude count must be 2^n");
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-10 {
            return Err(SimulatorError::NotNormalized(norm2));
        }
        Ok(StateVector { n_qubits, amps })
    }

    /// Computational basis state |index⟩.
    pub fn basis_state(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[index] = Complex64::ONE;
        StateVector { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Exact ⟨ψ|O|ψ⟩ for a Pauli string, via the sparse one-entry-per-
    /// column action of the operator.
    pub fn expectation(&self, op: &PauliString) -> f64 {
        assert_eq!(op.n_qubits(), self.n_qubits);
        let (x_mask, z_mask) = op_masks(op);
        let y_count = (x_mask & z_mask).count_ones();
        let y_phase = Complex64::i().powu(y_count);
        let mut acc = Complex64::ZERO;
        for (j, &amp) in self.amps.iter().enumerate() {
            let sign = if (z_mask & j as u64).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            let target = j ^ x_mask as usize;
            acc += self.amps[target].conj() * y_phase * sign * amp;
        }
        acc.re
    }

    /// ⟨ψ|H|ψ⟩ including the identity offset.
    pub fn energy(&self, h: &Hamiltonian) -> f64 {
        h.identity_offset()
            + h.terms()
                .iter()
                .map(|(a, op)| a * self.expectation(op))
                .sum::<f64>()
    }
}

fn op_masks(op: &PauliString) -> (u64, u64) {
    let mut x = 0u64;
    let mut z = 0u64;
    for q in op.support() {
        match op.axis(q) {
            Axis::X => x |= 1 << q,
            Axis::Z => z |= 1 << q,
            Axis::Y => {
                x |= 1 << q;
                z |= 1 << q;
            }
            Axis::I => unreachable!("support excludes identity"),
        }
    }
    (x, z)
}

/// Dense Hermitian matrix of the traceless part of `h` (the identity
/// offset is added back to eigenvalues by the caller).
pub fn hamiltonian_matrix(h: &Hamiltonian) -> DMatrix<Complex64> {
    let n = h.n_qubits();
    let dim = 1usize << n;
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (a, op) in h.terms() {
        let (x_mask, z_mask) = op_masks(op);
        let y_phase = Complex64::i().powu((x_mask & z_mask).count_ones());
        for col in 0..dim {
            let sign = if (z_mask & col as u64).count_ones() % 2 == 1 {
                -1.0
            } else {
                1.0
            };
            let row = col ^ x_mask as usize;
            m[(row, col)] += y_phase * (a * sign);
        }
    }
    m
}

/// Minimum eigenvalue (plus identity offset) and the corresponding unit
/// eigenvector. Degenerate ground spaces resolve deterministically: take
/// the candidate whose first non-negligible amplitude sits at the lowest
/// basis index, then fix the global phase so that amplitude is real
/// positive.
pub fn ground_state(h: &Hamiltonian) -> Result<(f64, StateVector), SimulatorError> {
    let n = h.n_qubits();
    if n > MAX_SIM_QUBITS {
        return Err(SimulatorError::TooManyQubits(n));
    }
    if h.n_terms() == 0 {
        return Err(SimulatorError::Empty);
    }
    let m = hamiltonian_matrix(h);
    let eig = m.symmetric_eigen();
    let min_val = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = 1e-10 * (1.0 + min_val.abs());
    let mut pick: Option<(usize, usize)> = None; // (first support index, column)
    for (k, &val) in eig.eigenvalues.iter().enumerate() {
        if val <= min_val + tol {
            let col = eig.eigenvectors.column(k);
            let first = col
                .iter()
                .position(|a| a.norm() > 1e-8)
                .unwrap_or(col.len());
            if pick.is_none_or(|(best, _)| first < best) {
                pick = Some((first, k));
            }
        }
    }
    let (first, k) = pick.expect("at least one eigenvalue");
    let col = eig.eigenvectors.column(k);
    let anchor = col[first];
    let phase = anchor.conj() / anchor.norm();
    let mut amps: Vec<Complex64> = col.iter().map(|a| a * phase).collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in amps.iter_mut() {
        *a /= norm;
    }
    let psi = StateVector {
        n_qubits: n,
        amps,
    };
    Ok((min_val + h.identity_offset(), psi))
}

/// One executed circuit: the full-support basis, which group it measured,
/// and the sampled outcomes. Each outcome is stored as the measured basis
/// index; bit i set means qubit i read |1⟩, i.e. sign −1.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub basis: PauliString,
    pub group_index: usize,
    pub outcomes: Vec<u64>,
}

impl MeasurementRecord {
    pub fn shots(&self) -> usize {
        self.outcomes.len()
    }

    /// Sign of one outcome restricted to a support mask: the parity of
    /// measured |1⟩ bits inside the mask.
    pub fn sign(outcome: u64, support_mask: u64) -> i8 {
        if (outcome & support_mask).count_ones() % 2 == 1 {
            -1
        } else {
            1
        }
    }

    /// Outcome rows as explicit ±1 per qubit.
    pub fn sign_rows(&self) -> Vec<Vec<i8>> {
        let n = self.basis.n_qubits();
        self.outcomes
            .iter()
            .map(|&o| (0..n).map(|q| if o >> q & 1 == 1 { -1 } else { 1 }).collect())
            .collect()
    }

    /// JSON-lines form: basis axis string, group index, ±1 rows.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Dto<'a> {
            basis: &'a str,
            group_index: usize,
            outcomes: Vec<Vec<i8>>,
        }
        serde_json::to_string(&Dto {
            basis: &self.basis.to_axis_string(),
            group_index: self.group_index,
            outcomes: self.sign_rows(),
        })
        .expect("record serializes")
    }
}

/// Rotate a copy of ψ so that a z-basis readout realizes measurement in
/// the given full-support Pauli basis.
fn rotate_into_basis(psi: &StateVector, basis: &PauliString) -> Result<Vec<Complex64>, SimulatorError> {
    assert_eq!(basis.n_qubits(), psi.n_qubits);
    let mut amps = psi.amps.clone();
    for q in 0..psi.n_qubits {
        match basis.axis(q) {
            Axis::Z => {}
            Axis::X => apply_h(&mut amps, q),
            Axis::Y => {
                apply_s_dagger(&mut amps, q);
                apply_h(&mut amps, q);
            }
            Axis::I => return Err(SimulatorError::PartialBasis(q)),
        }
    }
    Ok(amps)
}

fn apply_h(amps: &mut [Complex64], q: usize) {
    let bit = 1usize << q;
    for j in 0..amps.len() {
        if j & bit == 0 {
            let a = amps[j];
            let b = amps[j | bit];
            amps[j] = (a + b) * FRAC_1_SQRT_2;
            amps[j | bit] = (a - b) * FRAC_1_SQRT_2;
        }
    }
}

fn apply_s_dagger(amps: &mut [Complex64], q: usize) {
    let bit = 1usize << q;
    let minus_i = Complex64::new(0.0, -1.0);
    for (j, a) in amps.iter_mut().enumerate() {
        if j & bit != 0 {
            *a *= minus_i;
        }
    }
}

/// Sample `shots` outcomes of a full-support Pauli-basis measurement via
/// inverse CDF over the exact 2^n distribution.
pub fn sample_basis(
    psi: &StateVector,
    basis: &PauliString,
    shots: usize,
    rng: &mut ChaCha12Rng,
) -> Result<MeasurementRecord, SimulatorError> {
    sample_basis_tagged(psi, basis, shots, usize::MAX, rng)
}

pub fn sample_basis_tagged(
    psi: &StateVector,
    basis: &PauliString,
    shots: usize,
    group_index: usize,
    rng: &mut ChaCha12Rng,
) -> Result<MeasurementRecord, SimulatorError> {
    let rotated = rotate_into_basis(psi, basis)?;
    let mut cdf = Vec::with_capacity(rotated.len());
    let mut acc = 0.0;
    for a in &rotated {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    let mut outcomes = Vec::with_capacity(shots);
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc.min(1.0);
        let idx = cdf.partition_point(|&c| c <= u).min(last);
        outcomes.push(idx as u64);
    }
    Ok(MeasurementRecord {
        basis: basis.clone(),
        group_index,
        outcomes,
    })
}

/// Stream seed derivation: one base seed, one documented mix per stream
/// index (splitmix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn seeded_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

/// Execute a shot recipe: one record per group with at least one shot
/// (zero-shot groups produce no circuit). Record α samples from an RNG
/// seeded with `derive_seed(base_seed, α)`, so the output is independent
/// of execution order.
pub fn execute_recipe(
    psi: &StateVector,
    groups: &GroupSet,
    shots: &[usize],
    base_seed: u64,
) -> Result<Vec<MeasurementRecord>, SimulatorError> {
    assert_eq!(shots.len(), groups.n_groups(), "shots per group");
    let mut records = Vec::new();
    for (alpha, &m) in shots.iter().enumerate() {
        if m == 0 {
            continue;
        }
        let mut rng = seeded_rng(derive_seed(base_seed, alpha as u64));
        records.push(sample_basis_tagged(
            psi,
            &groups.group(alpha).basis,
            m,
            alpha,
            &mut rng,
        )?);
    }
    Ok(records)
}
