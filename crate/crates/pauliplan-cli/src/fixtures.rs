//! Generators behind the shipped benchmark fixtures: the imbalanced toy
//! Hamiltonians and seeded few-body random instances with log-uniform
//! coefficient magnitudes (fixtures/ holds the frozen output).

use pauliplan_core::hamiltonian::Hamiltonian;
use pauliplan_core::pauli::{Axis, PauliString};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Seeded random few-body Hamiltonian in the diagonal-dominant shape
/// fermion-to-qubit encodings produce: roughly a third of the `l` terms
/// are pure Z-strings with magnitudes log-uniform in [1e-2, 1], the rest
/// carry X/Y factors with magnitudes log-uniform in [1e-3, 1e-1]. All
/// supports have weight 1–3.
pub fn random_structured_hamiltonian(n: usize, l: usize, seed: u64) -> Hamiltonian {
    assert!(n >= 3, "few-body generator expects n >= 3");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut raw = Vec::with_capacity(l);
    while raw.len() < l {
        let diagonal = rng.random_range(0..100) < 35;
        let weight = match rng.random_range(0..100) {
            0..30 => 1usize,
            30..75 => 2,
            _ => 3,
        };
        let mut axes = vec![Axis::I; n];
        let mut placed = 0;
        while placed < weight {
            let q = rng.random_range(0..n);
            if axes[q] != Axis::I {
                continue;
            }
            axes[q] = if diagonal {
                Axis::Z
            } else {
                match rng.random_range(0..3) {
                    0 => Axis::X,
                    1 => Axis::Y,
                    _ => Axis::Z,
                }
            };
            placed += 1;
        }
        let op = PauliString::from_axes(&axes);
        if !seen.insert(op.to_axis_string()) {
            continue;
        }
        let magnitude = if op.support().iter().all(|&q| op.axis(q) == Axis::Z) {
            10f64.powf(rng.random_range(-2.0..0.0))
        } else {
            10f64.powf(rng.random_range(-3.0..-1.0))
        };
        let sign = if rng.random_range(0..2) == 0 { 1.0 } else { -1.0 };
        raw.push((sign * magnitude, op));
    }
    Hamiltonian::from_terms(n, raw)
}

/// The (n, l, seed) triples behind the shipped random fixtures.
pub const RANDOM_FIXTURES: [(&str, usize, usize, u64); 4] = [
    ("rand_l50_n6", 6, 50, 101),
    ("rand_l50_n8", 8, 50, 102),
    ("rand_l200_n6", 6, 200, 103),
    ("rand_l200_n8", 8, 200, 125),
];

pub fn fixture_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}
