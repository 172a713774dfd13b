//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers (run with `-- --nocapture` to see
//! them). Tolerances and budgets are pinned here, not configurable.

use pauliplan_cli::bench::run_bench;
use pauliplan_cli::fixtures::{fixture_dir, RANDOM_FIXTURES};
use pauliplan_cli::methods::{Instance, Method, MethodOptions};
use pauliplan_core::allocation::{
    conf_bound, naive_epsilon, optimize_weights, overlap_weights, BoundSpec, OverlapWeightRule,
};
use pauliplan_core::estimation::{estimate_energy, median_of_means, EstimatorKind};
use pauliplan_core::grouping::{build_qwc_graph, maxmin_grouping, min_clique_cover};
use pauliplan_core::hamiltonian::{parse_hamiltonian, toy_model, Hamiltonian};
use pauliplan_core::simulator::{derive_seed, execute_recipe, ground_state, seeded_rng};
use rand::Rng;
use std::time::Instant;

mod oracle;

fn load_fixture(name: &str) -> Instance {
    let path = fixture_dir().join(format!("{name}.txt"));
    Instance::load(&path).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

/// The five-instance comparison suite.
const BENCH_SUITE: [&str; 5] = [
    "rand_l50_n6",
    "rand_l50_n8",
    "rand_l200_n6",
    "rand_l200_n8",
    "toy_n4",
];

#[test]
fn criterion_01_grouping_invariants() {
    let start = Instant::now();
    let mut small_total = 0usize;
    let mut small_matches = 0usize;
    for seed in 0..200u64 {
        let n = 1 + (seed as usize) % 8;
        let l = 1 + (seed as usize * 13) % 60;
        let h = oracle::random_hamiltonian(n, l, 52_000 + seed);
        let gs = maxmin_grouping(&h).unwrap();
        oracle::check_groupset_invariants(&h, &gs);
        let g = build_qwc_graph(&h).unwrap();
        let greedy = min_clique_cover(&g).len();
        assert_eq!(greedy, gs.n_groups(), "expansion changed group count");
        if h.n_terms() <= 10 {
            let exact = oracle::exact_min_cover_size(&g);
            assert!(
                greedy >= exact,
                "seed {seed}: greedy {greedy} undercuts exact {exact}"
            );
            small_total += 1;
            if greedy == exact {
                small_matches += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let ratio = small_matches as f64 / small_total as f64;
    assert!(
        ratio >= 0.8,
        "greedy-vs-exact match ratio {ratio:.2} below 0.8 ({small_matches}/{small_total})"
    );
    assert!(elapsed.as_secs() < 60, "criterion 1 took {elapsed:?}");
    println!(
        "criterion 1 (grouping invariants): PASS — 200 instances clean, exact-match {small_matches}/{small_total}, {elapsed:?}"
    );
}

#[test]
fn criterion_02_optimizer_matches_grid_oracle() {
    let start = Instant::now();
    let mut checked = 0usize;
    for n in 3..=6usize {
        let inst = load_fixture(&format!("toy_n{n}"));
        if inst.groups.n_groups() > 3 {
            continue;
        }
        let m = 1000usize;
        let eps = naive_epsilon(&inst.hamiltonian, m, 1.0);
        let spec = BoundSpec::hoeffding_per_operator(eps, m);
        let alloc = optimize_weights(&spec, &inst.groups, &inst.hamiltonian).unwrap();
        let grid = oracle::grid_search(&spec, &inst.groups, &inst.hamiltonian);
        for (alpha, (&w, &g)) in alloc.weights.iter().zip(&grid).enumerate() {
            assert!(
                (w - g).abs() < 2e-3,
                "toy n={n} group {alpha}: solver {w} vs grid {g}"
            );
        }
        checked += 1;
    }
    assert!(checked >= 4);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "criterion 2 took {elapsed:?}");
    println!(
        "criterion 2 (optimizer vs grid oracle): PASS — {checked} instances within 2e-3, {elapsed:?}"
    );
}

#[test]
fn criterion_03_eps2m_invariance() {
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        let n = 2 + (seed as usize) % 5;
        let l = 4 + (seed as usize * 7) % 20;
        let h = oracle::random_hamiltonian(n, l, 61_000 + seed);
        let gs = maxmin_grouping(&h).unwrap();
        let m = 500usize;
        let eps = naive_epsilon(&h, m, 1.0);
        let base =
            optimize_weights(&BoundSpec::hoeffding_per_operator(eps, m), &gs, &h).unwrap();
        for &k in &[2usize, 4, 10] {
            let scaled = optimize_weights(
                &BoundSpec::hoeffding_per_operator(eps / (k as f64).sqrt(), k * m),
                &gs,
                &h,
            )
            .unwrap();
            for (&a, &b) in base.weights.iter().zip(&scaled.weights) {
                worst = worst.max((a - b).abs());
                assert!(
                    (a - b).abs() < 1e-6,
                    "seed {seed} k {k}: weights differ by {}",
                    (a - b).abs()
                );
            }
        }
    }
    println!("criterion 3 (eps^2 M invariance): PASS — worst coordinate gap {worst:.2e}");
}

#[test]
fn criterion_04_theorem_coverage() {
    let start = Instant::now();
    let h = parse_hamiltonian("0.5 ZZ\n0.3 ZI\n0.4 XI").unwrap();
    let gs = maxmin_grouping(&h).unwrap();
    let (_, psi) = ground_state(&h).unwrap();
    let truth = psi.energy(&h);
    let (eps, m) = (0.5f64, 100usize);
    let alloc =
        optimize_weights(&BoundSpec::hoeffding_per_operator(eps, m), &gs, &h).unwrap();
    let delta = alloc.bound_value;
    assert!(
        delta > 0.05 && delta < 0.9,
        "fixture must give a nonvacuous bound, got {delta}"
    );
    let trials = 2000usize;
    let mut exceed = 0usize;
    for rep in 0..trials {
        let records =
            execute_recipe(&psi, &gs, &alloc.shots, derive_seed(0xACCE, rep as u64)).unwrap();
        let est = estimate_energy(&records, &gs, &h, EstimatorKind::Mean).unwrap();
        if (est.value - truth).abs() > eps {
            exceed += 1;
        }
    }
    let rate = exceed as f64 / trials as f64;
    let se = (delta * (1.0 - delta) / trials as f64).sqrt();
    assert!(
        rate <= delta + 3.0 * se,
        "exceedance {rate} above delta {delta} + 3se {se}"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "criterion 4 took {elapsed:?}");
    println!(
        "criterion 4 (theorem coverage): PASS — exceedance {rate:.4} <= delta {delta:.4} + 3se, {elapsed:?}"
    );
}

#[test]
fn criterion_05_mom_tail_bound() {
    let m = 500usize;
    let mu = 0.3f64;
    let sigma2 = 1.0 - mu * mu;
    let eps = 0.5f64;
    let trials = 2000usize;
    let p_plus = (1.0 + mu) / 2.0;
    let mut report = String::new();
    for &k in &[1usize, 5, 25] {
        let bound = (-(k as f64) / 2.0
            * (1.0 - 2.0 * k as f64 * sigma2 / (m as f64 * eps * eps)).powi(2))
        .exp();
        let mut exceed = 0usize;
        let mut rng = seeded_rng(90_000 + k as u64);
        for _ in 0..trials {
            let signs: Vec<i8> = (0..m)
                .map(|_| if rng.random::<f64>() < p_plus { 1 } else { -1 })
                .collect();
            let est = median_of_means(&signs, k).unwrap();
            if (est - mu).abs() > eps {
                exceed += 1;
            }
        }
        let rate = exceed as f64 / trials as f64;
        let p = bound.clamp(1e-9, 1.0 - 1e-9);
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            rate <= bound + 3.0 * se,
            "K={k}: exceedance {rate} above bound {bound} + 3se"
        );
        report.push_str(&format!("K={k}: {rate:.4}<={bound:.4} "));
    }
    println!("criterion 5 (median-of-means tail): PASS — {report}");
}

#[test]
fn criterion_06_support_and_entropy_growth() {
    let inst = load_fixture("toy_n4");
    let eps = 0.2f64;
    let mut supports = Vec::new();
    let mut entropies = Vec::new();
    for &m in &[100usize, 1000, 10_000, 100_000] {
        let alloc = optimize_weights(
            &BoundSpec::hoeffding_per_operator(eps, m),
            &inst.groups,
            &inst.hamiltonian,
        )
        .unwrap();
        supports.push(alloc.support_size);
        let entropy: f64 = alloc
            .weights
            .iter()
            .filter(|&&w| w > 0.0)
            .map(|&w| -w * w.ln())
            .sum();
        entropies.push(entropy);
    }
    for pair in supports.windows(2) {
        assert!(pair[1] >= pair[0], "support sequence {supports:?} not monotone");
    }
    assert!(
        entropies[3] > entropies[0],
        "entropy did not grow: {entropies:?}"
    );
    println!(
        "criterion 6 (budget spreads allocation): PASS — supports {supports:?}, entropy {:.3} -> {:.3}",
        entropies[0], entropies[3]
    );
}

#[test]
fn criterion_07_rogs_naive_vs_even_distribution() {
    let mut wins = 0usize;
    let mut lines = Vec::new();
    for name in BENCH_SUITE {
        let inst = load_fixture(name);
        let rows = run_bench(
            &inst,
            &[Method::RogsNaive, Method::EvenDistribution],
            1000,
            10,
            42,
            &MethodOptions::default(),
            false,
        )
        .unwrap();
        let rogs = rows.iter().find(|r| r.method == "rogs_naive").unwrap();
        let even = rows
            .iter()
            .find(|r| r.method == "even_distribution")
            .unwrap();
        if rogs.rmse <= even.rmse {
            wins += 1;
        }
        lines.push(format!("{name}: {:.4} vs {:.4}", rogs.rmse, even.rmse));
    }
    assert!(
        wins >= 4,
        "rogs_naive beat even_distribution on only {wins}/5: {lines:?}"
    );
    println!(
        "criterion 7 (naive allocation vs even split): PASS — {wins}/5 [{}]",
        lines.join("; ")
    );
}

#[test]
fn criterion_08_circuit_economy() {
    let inst = load_fixture("rand_l200_n8");
    assert_eq!(inst.hamiltonian.n_terms(), 200);
    let m = 1000usize;
    let eps = naive_epsilon(&inst.hamiltonian, m, 1.0);
    let alloc = optimize_weights(
        &BoundSpec::hoeffding_per_operator(eps, m),
        &inst.groups,
        &inst.hamiltonian,
    )
    .unwrap();
    assert!(
        alloc.support_size < inst.groups.n_groups(),
        "n_circuit {} not below n_groups {}",
        alloc.support_size,
        inst.groups.n_groups()
    );
    let unique = inst.groups.unique_member_counts();
    let redundant: Vec<usize> = (0..inst.groups.n_groups())
        .filter(|&a| unique[a] == 0)
        .collect();
    assert!(
        !redundant.is_empty(),
        "fixture must contain a group with no unique member"
    );
    for &alpha in &redundant {
        assert_eq!(
            alloc.shots[alpha], 0,
            "redundant group {alpha} received shots"
        );
    }
    println!(
        "criterion 8 (circuit economy): PASS — n_circuit {} < n_groups {}, redundant groups {redundant:?} got 0 shots",
        alloc.support_size,
        inst.groups.n_groups()
    );
}

#[test]
fn criterion_09_simulator_exactness() {
    let mut names: Vec<String> = RANDOM_FIXTURES.iter().map(|f| f.0.to_string()).collect();
    names.extend((3..=6).map(|n| format!("toy_n{n}")));
    let mut worst_energy_gap: f64 = 0.0;
    for name in &names {
        let inst = load_fixture(name);
        assert!(inst.hamiltonian.n_qubits() <= 8);
        let oracle_e = oracle::oracle_ground_energy(&inst.hamiltonian);
        let gap = (inst.ground_energy - oracle_e).abs();
        worst_energy_gap = worst_energy_gap.max(gap);
        assert!(gap < 1e-10, "{name}: energy gap {gap}");

        // Sample the largest group's basis and check every member's mean.
        let alpha = (0..inst.groups.n_groups())
            .max_by_key(|&a| inst.groups.group(a).members.len())
            .unwrap();
        let mut shots = vec![0usize; inst.groups.n_groups()];
        shots[alpha] = 100_000;
        let records = execute_recipe(&inst.psi, &inst.groups, &shots, 777).unwrap();
        for &t in &inst.groups.group(alpha).members {
            let op = inst.hamiltonian.operator(t);
            let mask = op.support_mask_u64();
            let mean: f64 = records[0]
                .outcomes
                .iter()
                .map(|&o| pauliplan_core::MeasurementRecord::sign(o, mask) as f64)
                .sum::<f64>()
                / 100_000.0;
            let exact = inst.psi.expectation(op);
            let se = ((1.0 - exact * exact).max(0.0) / 100_000.0).sqrt();
            if se < 1e-9 {
                assert!((mean - exact).abs() < 1e-9, "{name} term {t}");
            } else {
                assert!(
                    (mean - exact).abs() <= 5.0 * se,
                    "{name} term {t}: mean {mean} vs exact {exact} (5se {})",
                    5.0 * se
                );
            }
        }
    }
    println!(
        "criterion 9 (simulator exactness): PASS — {} fixtures, worst energy gap {worst_energy_gap:.2e}, means within 5se at 1e5 shots",
        names.len()
    );
}

#[test]
fn criterion_10_toy_model_bound_contrast() {
    let h = toy_model(4);
    let gs = maxmin_grouping(&h).unwrap();
    let z_group = (0..gs.n_groups())
        .find(|&a| gs.group(a).members.contains(&0))
        .unwrap();
    let x_group = 1 - z_group;
    let (eps, m) = (0.25f64, 32usize); // ε²M = 2, the concentrated regime
    let per_op =
        optimize_weights(&BoundSpec::hoeffding_per_operator(eps, m), &gs, &h).unwrap();
    assert!(
        per_op.weights[x_group] > 0.5,
        "per-operator bound gave the X group only {}",
        per_op.weights[x_group]
    );
    let wo = overlap_weights(&gs, &h, OverlapWeightRule::InverseMultiplicity);
    let per_group =
        optimize_weights(&BoundSpec::hoeffding_per_group(eps, m, wo), &gs, &h).unwrap();
    assert!(
        per_group.weights[z_group] > per_op.weights[z_group],
        "per-group bound Z weight {} not above per-operator {}",
        per_group.weights[z_group],
        per_op.weights[z_group]
    );
    println!(
        "criterion 10 (bound contrast on toy model): PASS — per-op X weight {:.3}, Z weight {:.3} -> {:.3} under per-group",
        per_op.weights[x_group], per_op.weights[z_group], per_group.weights[z_group]
    );
}

#[test]
fn criterion_11_bench_csv_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let ham = fixture_dir().join("rand_l50_n6.txt");
    let mut outputs = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("run{run}.csv"));
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_pauliplan"))
            .args([
                "bench",
                "--hamiltonian",
                ham.to_str().unwrap(),
                "--shots",
                "500",
                "--seed",
                "20260810",
                "--repeats",
                "5",
                "--method",
                "rogs_naive,even_distribution,uniform_shadow",
                "--out",
                path.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert!(!outputs[0].is_empty());
    assert_eq!(outputs[0], outputs[1], "CSV outputs differ between runs");
    println!(
        "criterion 11 (bench determinism): PASS — {} identical bytes across two runs",
        outputs[0].len()
    );
}

/// Delta check used by several criteria: conf_bound evaluated at the
/// optimizer's weights equals the recorded bound value.
#[test]
fn bound_value_is_consistent_with_conf_bound() {
    let inst = load_fixture("rand_l50_n6");
    let m = 1000usize;
    let eps = naive_epsilon(&inst.hamiltonian, m, 1.0);
    let spec = BoundSpec::hoeffding_per_operator(eps, m);
    let alloc = optimize_weights(&spec, &inst.groups, &inst.hamiltonian).unwrap();
    let delta = conf_bound(&spec, &inst.groups, &inst.hamiltonian, &alloc.weights).unwrap();
    assert!((delta - alloc.bound_value).abs() <= 1e-12 * delta.max(1.0));
}

fn fixture(name: &str) -> std::path::PathBuf {
    fixture_dir().join(name)
}

#[test]
fn fixture_paths_resolve() {
    assert!(fixture("toy_n3.txt").exists());
    let h: Hamiltonian = parse_hamiltonian(
        &std::fs::read_to_string(fixture("toy_n3.txt")).unwrap(),
    )
    .unwrap();
    assert_eq!(h.n_terms(), 8);
}
