//! Independent oracles for the acceptance suite: seeded fuzz instances,
//! structural invariant checks, an exact clique-cover DP, a simplex grid
//! search, and a Kronecker-product dense matrix build.
#![allow(dead_code)]

use num_complex::Complex64;
use pauliplan_core::allocation::{conf_bound, BoundSpec};
use pauliplan_core::grouping::{GroupSet, QwcGraph};
use pauliplan_core::hamiltonian::Hamiltonian;
use pauliplan_core::pauli::{Axis, PauliString};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Random Hamiltonian with distinct non-identity strings and nonzero
/// uniform coefficients; `l` clamps to the strings that exist.
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

/// Every structural GroupSet invariant, checked directly.
pub fn check_groupset_invariants(h: &Hamiltonian, gs: &GroupSet) {
    let l = h.n_terms();
    assert_eq!(gs.n_terms(), l);
    let mut covered = vec![false; l];
    let mut core_seen = vec![0usize; l];
    for g in gs.groups() {
        for &t in &g.members {
            covered[t] = true;
            assert!(
                h.operator(t).covered_by(&g.basis).unwrap(),
                "basis {} does not cover member {}",
                g.basis,
                h.operator(t)
            );
        }
        for (i, &a) in g.members.iter().enumerate() {
            for &b in &g.members[i + 1..] {
                assert!(h.operator(a).qwc(h.operator(b)).unwrap());
            }
        }
        for &t in &g.core() {
            core_seen[t] += 1;
        }
        assert_eq!(g.basis.weight(), h.n_qubits(), "basis must be full support");
    }
    assert!(covered.iter().all(|&c| c), "coverage");
    assert!(core_seen.iter().all(|&c| c == 1), "core partition");
}

/// Exact minimum clique cover size by subset DP (n_terms <= 16).
pub fn exact_min_cover_size(g: &QwcGraph) -> usize {
    let n = g.n_terms();
    assert!(n <= 16);
    let full = (1usize << n) - 1;
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

/// Brute-force minimizer of the bound over the simplex at step 1e-3
/// (instances with at most 3 groups).
pub fn grid_search(spec: &BoundSpec, gs: &GroupSet, h: &Hamiltonian) -> Vec<f64> {
    let a = gs.n_groups();
    let steps = 1000usize;
    let mut best = (f64::INFINITY, vec![0.0; a]);
    match a {
        1 => return vec![1.0],
        2 => {
            for i in 0..=steps {
                let w0 = i as f64 / steps as f64;
                let w = vec![w0, 1.0 - w0];
                let d = conf_bound(spec, gs, h, &w).unwrap();
                if d < best.0 {
                    best = (d, w);
                }
            }
        }
        3 => {
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    let w0 = i as f64 / steps as f64;
                    let w1 = j as f64 / steps as f64;
                    let w = vec![w0, w1, 1.0 - w0 - w1];
                    let d = conf_bound(spec, gs, h, &w).unwrap();
                    if d < best.0 {
                        best = (d, w);
                    }
                }
            }
        }
        _ => panic!("grid oracle only covers <= 3 groups"),
    }
    best.1
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

fn pauli_matrix(op: &PauliString) -> Mat {
    let n = op.n_qubits();
    let mut m = single_qubit(op.axis(n - 1));
    for q in (0..n - 1).rev() {
        m = kron(&m, &single_qubit(op.axis(q)));
    }
    m
}

/// Ground energy from the independently constructed dense matrix
/// (Kronecker products per term, identity offset on the diagonal).
pub fn oracle_ground_energy(h: &Hamiltonian) -> f64 {
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
    let dm = nalgebra::DMatrix::from_fn(dim, dim, |r, c| m[r][c]);
    dm.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}
