//! Shared helpers for the oracle test suites: seeded random Hamiltonians,
//! an independent dense-matrix build via explicit Kronecker products, a
//! brute-force per-site commutator check, and an exact minimum clique
//! cover by subset dynamic programming.
//!
//! Each test binary compiles this module separately and uses a subset.
#![allow(dead_code)]

use num_complex::Complex64;
use pauliplan_core::grouping::QwcGraph;
use pauliplan_core::hamiltonian::Hamiltonian;
use pauliplan_core::pauli::{Axis, PauliString};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Seeded random Hamiltonian: `l` distinct non-identity strings on `n`
/// qubits with coefficients uniform in [-1, 1] \ {0}. `l` clamps to the
/// number of distinct strings that exist.
pub fn random_hamiltonian(n: usize, l: usize, seed: u64) -> Hamiltonian {
    let available = 4usize.saturating_pow(n as u32).saturating_sub(1);
    let l = l.min(available);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::new();
    let mut raw = Vec::new();
    while raw.len() < l {
        let axes: Vec<Axis> = (0..n)
            .map(|_| match rng.random_range(0..4) {
                0 => Axis::I,
                1 => Axis::X,
                2 => Axis::Y,
                _ => Axis::Z,
            })
            .collect();
        let op = PauliString::from_axes(&axes);
        if op.is_identity() || !seen.insert(op.to_axis_string()) {
            continue;
        }
        let mut a: f64 = rng.random_range(-1.0..1.0);
        if a == 0.0 {
            a = 0.5;
        }
        raw.push((a, op));
    }
    Hamiltonian::from_terms(n, raw)
}

type Mat = Vec<Vec<Complex64>>;

fn single_qubit(axis: Axis) -> Mat {
    let z = Complex64::ZERO;
    let one = Complex64::ONE;
    let i = Complex64::i();
    match axis {
        Axis::I => vec![vec![one, z], vec![z, one]],
        Axis::X => vec![vec![z, one], vec![one, z]],
        Axis::Y => vec![vec![z, -i], vec![i, z]],
        Axis::Z => vec![vec![one, z], vec![z, -one]],
    }
}

fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, ca) = (a.len(), a[0].len());
    let (rb, cb) = (b.len(), b[0].len());
    let mut out = vec![vec![Complex64::ZERO; ca * cb]; ra * rb];
    for ia in 0..ra {
        for ja in 0..ca {
            for ib in 0..rb {
                for jb in 0..cb {
                    out[ia * rb + ib][ja * cb + jb] = a[ia][ja] * b[ib][jb];
                }
            }
        }
    }
    out
}

/// Full 2^n matrix of a Pauli string by Kronecker products, qubit 0 on the
/// least significant bit (highest qubit leftmost in the product).
pub fn pauli_matrix(op: &PauliString) -> Mat {
    let n = op.n_qubits();
    let mut m = single_qubit(op.axis(n - 1));
    for q in (0..n - 1).rev() {
        m = kron(&m, &single_qubit(op.axis(q)));
    }
    m
}

/// Independent dense Hamiltonian matrix (identity offset included).
pub fn hamiltonian_matrix_oracle(h: &Hamiltonian) -> Mat {
    let dim = 1usize << h.n_qubits();
    let mut m = vec![vec![Complex64::ZERO; dim]; dim];
    for (a, op) in h.terms() {
        let pm = pauli_matrix(op);
        for (row, pr) in pm.iter().enumerate() {
            for (col, v) in pr.iter().enumerate() {
                m[row][col] += v * a;
            }
        }
    }
    for (d, row) in m.iter_mut().enumerate() {
        row[d] += Complex64::from(h.identity_offset());
    }
    m
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![Complex64::ZERO; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == Complex64::ZERO {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Brute-force qubit-wise commutation: multiply per-site 2×2 matrices and
/// test each site commutator entrywise.
pub fn qwc_oracle(p: &PauliString, q: &PauliString) -> bool {
    assert_eq!(p.n_qubits(), q.n_qubits());
    for site in 0..p.n_qubits() {
        let a = single_qubit(p.axis(site));
        let b = single_qubit(q.axis(site));
        let ab = mat_mul(&a, &b);
        let ba = mat_mul(&b, &a);
        for i in 0..2 {
            for j in 0..2 {
                if (ab[i][j] - ba[i][j]).norm() > 1e-12 {
                    return false;
                }
            }
        }
    }
    true
}

/// Exact minimum clique cover size by subset DP. Only sensible for
/// n_terms <= ~16.
pub fn exact_min_cover_size(g: &QwcGraph) -> usize {
    let n = g.n_terms();
    assert!(n <= 16);
    let full = (1usize << n) - 1;
    // neighbor mask per node
    let nbr: Vec<usize> = (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| u != v && g.adjacent(v, u))
                .fold(0usize, |m, u| m | 1 << u)
        })
        .collect();
    let mut is_clique = vec![false; full + 1];
    is_clique[0] = true;
    for mask in 1..=full {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & (mask - 1);
        is_clique[mask] = is_clique[rest] && (rest & !nbr[v]) == 0;
    }
    let mut best = vec![u32::MAX; full + 1];
    best[0] = 0;
    for mask in 1..=full {
        let v = mask.trailing_zeros() as usize;
        // Enumerate submasks of mask that contain v.
        let mut sub = mask;
        let mut b = u32::MAX;
        while sub > 0 {
            if sub & (1 << v) != 0 && is_clique[sub] && best[mask ^ sub] != u32::MAX {
                b = b.min(1 + best[mask ^ sub]);
            }
            sub = (sub - 1) & mask;
        }
        best[mask] = b;
    }
    best[full] as usize
}

/// Every structural GroupSet invariant, checked directly.
pub fn check_groupset_invariants(h: &Hamiltonian, gs: &pauliplan_core::grouping::GroupSet) {
    let l = h.n_terms();
    assert_eq!(gs.n_terms(), l);
    let mut covered = vec![false; l];
    let mut core_seen = vec![0usize; l];
    for g in gs.groups() {
        for &t in &g.members {
            covered[t] = true;
            assert!(
                h.operator(t).covered_by(&g.basis).unwrap(),
                "basis {} must cover member {}",
                g.basis,
                h.operator(t)
            );
        }
        for pair in g.members.windows(2) {
            assert!(pair[0] < pair[1], "members sorted and unique");
        }
        for (i, &a) in g.members.iter().enumerate() {
            for &b in &g.members[i + 1..] {
                assert!(
                    h.operator(a).qwc(h.operator(b)).unwrap(),
                    "members {a} and {b} must be QWC"
                );
            }
        }
        for &t in &g.core() {
            core_seen[t] += 1;
        }
        // Added terms come from outside the core.
        for &t in &g.added {
            assert!(g.members.contains(&t));
        }
        // Full-support basis.
        assert_eq!(g.basis.weight(), h.n_qubits());
    }
    assert!(covered.iter().all(|&c| c), "every term in some group");
    assert!(
        core_seen.iter().all(|&c| c == 1),
        "cores partition the term set"
    );
    // Expansion is monotone in the member count.
    let total: usize = gs.groups().iter().map(|g| g.members.len()).sum();
    assert!(total >= l);
}
