//! Overlapped qubit-wise-commuting grouping of Hamiltonian terms.
//!
//! Stage one partitions the terms into disjoint cliques of the QWC graph
//! (greedy largest-degree-first coloring of the complement). Stage two
//! expands every core with the maximum clique of outside terms compatible
//! with the core's measurement basis, keeping the group count fixed while
//! raising per-shot hit rates.

use crate::hamiltonian::Hamiltonian;
use crate::pauli::{Axis, PauliString};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GroupingError {
    #[error("hamiltonian has no non-identity terms")]
    EmptyHamiltonian,
}

/// Candidate sets up to this size get an exact branch-and-bound maximum
/// clique; larger ones fall back to a greedy degeneracy-ordered clique.
pub const MAX_CLIQUE_EXACT_CUTOFF: usize = 40;

/// Symmetric QWC adjacency over term indices, stored as bitset rows.
#[derive(Debug, Clone)]
pub struct QwcGraph {
    n_terms: usize,
    rows: Vec<Vec<u64>>,
}

impl QwcGraph {
    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.rows[i][j / 64] >> (j % 64) & 1 == 1
    }

    pub fn degree(&self, i: usize) -> usize {
        self.rows[i].iter().map(|w| w.count_ones() as usize).sum()
    }

    /// True when `v` is adjacent to every index in `clique`.
    fn adjacent_to_all(&self, v: usize, clique: &[usize]) -> bool {
        clique.iter().all(|&u| self.adjacent(v, u))
    }
}

/// Build the QWC graph: edge (i, j) iff the operators qubit-wise commute.
pub fn build_qwc_graph(h: &Hamiltonian) -> Result<QwcGraph, GroupingError> {
    let n = h.n_terms();
    if n == 0 {
        return Err(GroupingError::EmptyHamiltonian);
    }
    let words = n.div_ceil(64);
    let mut rows = vec![vec![0u64; words]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            // Widths are equal by construction, so the predicate cannot fail.
            if h.operator(i).qwc(h.operator(j)).expect("equal widths") {
                rows[i][j / 64] |= 1 << (j % 64);
                rows[j][i / 64] |= 1 << (i % 64);
            }
        }
    }
    Ok(QwcGraph { n_terms: n, rows })
}

/// Greedy minimum clique cover: color the complement graph largest degree
/// first, ties broken by lowest index. Each color class is a clique of the
/// original graph. Returns disjoint sets covering every node.
pub fn min_clique_cover(g: &QwcGraph) -> Vec<Vec<usize>> {
    let n = g.n_terms;
    let mut order: Vec<usize> = (0..n).collect();
    // Complement degree = (n - 1) - degree; sorting by it descending is
    // sorting by QWC degree ascending.
    order.sort_by_key(|&v| (g.degree(v), v));
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    for v in order {
        match cliques.iter_mut().find(|c| g.adjacent_to_all(v, c)) {
            Some(c) => c.push(v),
            None => cliques.push(vec![v]),
        }
    }
    for c in &mut cliques {
        c.sort_unstable();
    }
    cliques
}

/// Maximum clique among `candidates` (indices into `g`). Exact via branch
/// and bound with a greedy-coloring upper bound up to
/// [`MAX_CLIQUE_EXACT_CUTOFF`] nodes, greedy degeneracy-ordered above.
/// Empty candidates give the empty set.
pub fn max_clique(candidates: &[usize], g: &QwcGraph) -> Vec<usize> {
    let k = candidates.len();
    if k == 0 {
        return Vec::new();
    }
    // Local adjacency over candidate positions.
    let words = k.div_ceil(64);
    let mut adj = vec![vec![0u64; words]; k];
    for a in 0..k {
        for b in (a + 1)..k {
            if g.adjacent(candidates[a], candidates[b]) {
                adj[a][b / 64] |= 1 << (b % 64);
                adj[b][a / 64] |= 1 << (a % 64);
            }
        }
    }
    let local = if k <= MAX_CLIQUE_EXACT_CUTOFF {
        max_clique_exact(k, &adj)
    } else {
        max_clique_greedy(k, &adj)
    };
    let mut out: Vec<usize> = local.into_iter().map(|p| candidates[p]).collect();
    out.sort_unstable();
    out
}

struct BitSet(Vec<u64>);

impl BitSet {
    fn full(k: usize) -> Self {
        let mut v = vec![u64::MAX; k.div_ceil(64)];
        if !k.is_multiple_of(64) {
            *v.last_mut().unwrap() = (1u64 << (k % 64)) - 1;
        }
        BitSet(v)
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn intersect(&self, row: &[u64]) -> BitSet {
        BitSet(self.0.iter().zip(row).map(|(a, b)| a & b).collect())
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            let mut bits = bits;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + b)
            })
        })
    }
}

/// Tomita-style branch and bound. Vertices of each candidate set are
/// greedily colored; the color number is an upper bound on the clique size
/// attainable through that vertex, so branches are explored in descending
/// color order and pruned against the incumbent.
fn max_clique_exact(k: usize, adj: &[Vec<u64>]) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    let all = BitSet::full(k);
    expand(&all, adj, &mut current, &mut best);
    best
}

fn expand(p: &BitSet, adj: &[Vec<u64>], current: &mut Vec<usize>, best: &mut Vec<usize>) {
    // Greedy coloring of p in ascending index order.
    let mut ordered: Vec<(usize, usize)> = Vec::new(); // (vertex, color)
    let mut color_classes: Vec<BitSet> = Vec::new();
    for v in p.iter() {
        let mut c = 0;
        loop {
            if c == color_classes.len() {
                color_classes.push(BitSet(vec![0; adj[v].len()]));
            }
            // v joins the first class with no neighbor of v.
            if color_classes[c].intersect(&adj[v]).is_empty() {
                color_classes[c].0[v / 64] |= 1 << (v % 64);
                ordered.push((v, c + 1));
                break;
            }
            c += 1;
        }
    }
    let mut p = BitSet(p.0.clone());
    for &(v, color) in ordered.iter().rev() {
        if current.len() + color <= best.len() {
            return;
        }
        if !p.contains(v) {
            continue;
        }
        current.push(v);
        let next = p.intersect(&adj[v]);
        if next.is_empty() {
            if current.len() > best.len() {
                best.clone_from(current);
            }
        } else {
            expand(&next, adj, current, best);
        }
        current.pop();
        p.remove(v);
    }
}

/// Greedy fallback: walk a degeneracy ordering in reverse and keep every
/// vertex adjacent to the whole clique so far.
fn max_clique_greedy(k: usize, adj: &[Vec<u64>]) -> Vec<usize> {
    let mut degree: Vec<usize> = (0..k)
        .map(|v| adj[v].iter().map(|w| w.count_ones() as usize).sum())
        .collect();
    let mut removed = vec![false; k];
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let v = (0..k)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("nonempty");
        removed[v] = true;
        order.push(v);
        for u in 0..k {
            if !removed[u] && adj[v][u / 64] >> (u % 64) & 1 == 1 {
                degree[u] -= 1;
            }
        }
    }
    let mut clique: Vec<usize> = Vec::new();
    for &v in order.iter().rev() {
        if clique
            .iter()
            .all(|&u| adj[v][u / 64] >> (u % 64) & 1 == 1)
        {
            clique.push(v);
        }
    }
    clique
}

/// One overlapped measurement group: the disjoint core plus the absorbed
/// clique, with the full-support Pauli basis that measures every member.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementGroup {
    /// All member term indices (core ∪ added), sorted.
    pub members: Vec<usize>,
    /// Indices absorbed from other cores, sorted.
    pub added: Vec<usize>,
    /// Full-support measurement basis.
    pub basis: PauliString,
}

impl MeasurementGroup {
    /// Core members: the disjoint clique this group started from.
    pub fn core(&self) -> Vec<usize> {
        self.members
            .iter()
            .copied()
            .filter(|i| !self.added.contains(i))
            .collect()
    }
}

/// The full grouping output: overlapped groups plus the term-to-group
/// membership map (the indicator matrix, stored sparsely by term).
#[derive(Debug, Clone)]
pub struct GroupSet {
    n_terms: usize,
    groups: Vec<MeasurementGroup>,
    term_groups: Vec<Vec<usize>>,
}

impl GroupSet {
    pub fn from_groups(n_terms: usize, groups: Vec<MeasurementGroup>) -> Self {
        let mut term_groups = vec![Vec::new(); n_terms];
        for (alpha, g) in groups.iter().enumerate() {
            for &t in &g.members {
                term_groups[t].push(alpha);
            }
        }
        GroupSet {
            n_terms,
            groups,
            term_groups,
        }
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn groups(&self) -> &[MeasurementGroup] {
        &self.groups
    }

    pub fn group(&self, alpha: usize) -> &MeasurementGroup {
        &self.groups[alpha]
    }

    /// Groups containing term `t` (the nonzero entries of the indicator
    /// matrix row).
    pub fn groups_of_term(&self, t: usize) -> &[usize] {
        &self.term_groups[t]
    }

    pub fn contains(&self, alpha: usize, term: usize) -> bool {
        self.term_groups[term].contains(&alpha)
    }

    /// Terms that appear in exactly one group.
    pub fn unique_member_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.groups.len()];
        for tg in &self.term_groups {
            if tg.len() == 1 {
                counts[tg[0]] += 1;
            }
        }
        counts
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Dto<'a> {
            n_terms: usize,
            n_groups: usize,
            groups: &'a [MeasurementGroup],
        }
        serde_json::to_string_pretty(&Dto {
            n_terms: self.n_terms,
            n_groups: self.groups.len(),
            groups: &self.groups,
        })
        .expect("GroupSet serializes")
    }
}

/// Basis determined by a member set: per qubit the unique non-identity
/// axis among members, `fill` where no member touches the qubit.
fn basis_for(members: &[usize], h: &Hamiltonian, fill: Option<Axis>) -> PauliString {
    let n = h.n_qubits();
    let mut axes = vec![Axis::I; n];
    for &t in members {
        let op = h.operator(t);
        for q in op.support() {
            axes[q] = op.axis(q);
        }
    }
    if let Some(f) = fill {
        for a in axes.iter_mut() {
            if *a == Axis::I {
                *a = f;
            }
        }
    }
    PauliString::from_axes(&axes)
}

/// Max-Min grouping: minimum-clique-cover cores, each expanded by the
/// maximum clique of outside terms compatible with the core basis.
/// Identity positions of the pre-expansion basis act as wildcards. Qubits
/// still untouched after expansion default to Z in the final basis.
pub fn maxmin_grouping(h: &Hamiltonian) -> Result<GroupSet, GroupingError> {
    let g = build_qwc_graph(h)?;
    let cores = min_clique_cover(&g);
    let mut groups = Vec::with_capacity(cores.len());
    for core in cores {
        let pre_basis = basis_for(&core, h, None);
        let candidates: Vec<usize> = (0..h.n_terms())
            .filter(|&t| !core.contains(&t))
            .filter(|&t| h.operator(t).qwc(&pre_basis).expect("equal widths"))
            .collect();
        let added = max_clique(&candidates, &g);
        let mut members = core.clone();
        members.extend(&added);
        members.sort_unstable();
        let basis = basis_for(&members, h, Some(Axis::Z));
        groups.push(MeasurementGroup {
            members,
            added,
            basis,
        });
    }
    Ok(GroupSet::from_groups(h.n_terms(), groups))
}
