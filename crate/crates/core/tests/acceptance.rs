//! Acceptance suite. Each test covers one release criterion and prints a
//! `criterion N: PASS/FAIL` line with the measured numbers
//! (`cargo test --test acceptance -- --nocapture` to see them all).
//!
//! 1. Critical bounds reproduce the published thresholds.
//! 2. The transcribed 30x30 neighbor-frequency table thresholds into
//!    exactly the published graph (all 435 pairs).
//! 3. Two-block discrimination on a synthetic corpus. KNOWN RED: the
//!    within-block half of the target is unattainable at the stated
//!    map size; see README, "Known-red acceptance check".
//! 4. Exact clique/quasi-clique/decomposition search agrees with
//!    exhaustive subset enumeration.
//! 5. Correspondence-analysis numerics against the chi-square oracle.
//! 6. Stability-matrix invariants and ensemble determinism.
//! 7. Desk-scale throughput of the full pipeline.

#![allow(clippy::needless_range_loop)]

use std::collections::BTreeSet;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use lexistab::cliquegraph::{
    build_graph, glutton_decomposition, is_quasi_clique, max_clique, max_quasi_clique,
    NeighborGraph, QuasiCliquePartition,
};
use lexistab::contingency::ContingencyTable;
use lexistab::fca::decompose;
use lexistab::korresp::{MapGeometry, TrainConfig};
use lexistab::pipeline::{run_pipeline, InputFormat, PipelineConfig};
use lexistab::stability::{
    classify_pair, critical_bounds, run_ensemble, PairClass, StabilityMatrix,
};

fn fixture(name: &str) -> String {
    let path = format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("cannot read {path}: {e}"))
}

#[test]
fn criterion_1_critical_bounds_match_published_thresholds() {
    let bounds = critical_bounds(100, 40).unwrap();
    let upper_ok = (bounds.upper - 0.1787).abs() <= 1e-3;
    let lower_ok = (bounds.lower - 0.0014).abs() <= 5e-4;
    println!(
        "criterion 1: {} — upper {:.6} (target 0.1787 ± 0.001), lower {:.6} (target 0.0014 ± 0.0005)",
        if upper_ok && lower_ok { "PASS" } else { "FAIL" },
        bounds.upper,
        bounds.lower
    );
    assert!(upper_ok && lower_ok);
}

#[test]
fn criterion_2_fixture_graph_matches_published_edges() {
    let geometry = MapGeometry::new(10, 10).unwrap();
    let matrix = StabilityMatrix::from_csv(&fixture("fickle30.csv"), 40, geometry, None).unwrap();
    let bounds = critical_bounds(100, 40).unwrap();
    let graph = build_graph(&matrix, &bounds, None).unwrap();

    let published: BTreeSet<(String, String)> = fixture("reference_edges.csv")
        .lines()
        .map(|l| {
            let (a, b) = l.split_once(';').unwrap();
            (a.to_string(), b.to_string())
        })
        .collect();

    let index = |label: &str| {
        graph
            .labels()
            .iter()
            .position(|l| l == label)
            .unwrap_or_else(|| panic!("missing label {label}"))
    };
    // Hand-checked anchor pairs.
    assert!(graph.has_edge(index("contraire"), index("falloir")));
    assert!((matrix.value(index("contraire"), index("falloir")) - 0.625).abs() < 1e-9);
    assert!(!graph.has_edge(index("contraire"), index("doubler")));
    assert_eq!(matrix.value(index("contraire"), index("doubler")), 0.0);

    let mut agree = 0;
    let mut total = 0;
    for p in 0..graph.n_vertices() {
        for q in (p + 1)..graph.n_vertices() {
            let mut key = (graph.labels()[p].clone(), graph.labels()[q].clone());
            if key.0 > key.1 {
                key = (key.1, key.0);
            }
            total += 1;
            if graph.has_edge(p, q) == published.contains(&key) {
                agree += 1;
            }
        }
    }
    println!(
        "criterion 2: {} — {agree}/{total} pair statuses agree with the published graph",
        if agree == total { "PASS" } else { "FAIL" }
    );
    assert_eq!(agree, total);
}

/// 20 words x 4 documents in two blocks: within-block cells are
/// Poisson(20), cross-block cells Poisson(1).
fn two_block_table(seed: u64) -> ContingencyTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dense = Poisson::new(20.0).unwrap();
    let sparse = Poisson::new(1.0).unwrap();
    let rows: Vec<String> = (0..20).map(|i| format!("w{i:02}")).collect();
    let cols: Vec<String> = (0..4).map(|j| format!("d{j}")).collect();
    let counts: Vec<Vec<u64>> = (0..20)
        .map(|i| {
            (0..4)
                .map(|j| {
                    let same = (i < 10) == (j < 2);
                    if same {
                        dense.sample(&mut rng) as u64
                    } else {
                        sparse.sample(&mut rng) as u64
                    }
                })
                .collect()
        })
        .collect();
    ContingencyTable::new(rows, cols, counts).unwrap()
}

#[test]
fn criterion_3_two_block_discrimination() {
    let normalized = two_block_table(3).validate().unwrap().normalize();
    let geometry = MapGeometry::new(5, 5).unwrap();
    let cfg = TrainConfig::new(geometry, 5000, 0.5, 0.01, 1000).unwrap();
    let matrix = run_ensemble(&normalized, &cfg, 40);
    let bounds = critical_bounds(25, 40).unwrap();

    let mut within = (0usize, 0usize);
    let mut cross = (0usize, 0usize);
    for p in 0..20 {
        for q in (p + 1)..20 {
            let class = classify_pair(matrix.value(p, q), &bounds);
            if (p < 10) == (q < 10) {
                within.1 += 1;
                within.0 += usize::from(class == PairClass::Attract);
            } else {
                cross.1 += 1;
                cross.0 += usize::from(class == PairClass::Repulse);
            }
        }
    }
    let within_rate = within.0 as f64 / within.1 as f64;
    let cross_rate = cross.0 as f64 / cross.1 as f64;
    let pass = within_rate >= 0.9 && cross_rate >= 0.9;
    println!(
        "criterion 3: {} — within-block attract {:.3} (target ≥ 0.9), cross-block repulse {:.3} (target ≥ 0.9)",
        if pass { "PASS" } else { "FAIL" },
        within_rate,
        cross_rate
    );
    assert!(
        cross_rate >= 0.9,
        "cross-block repulse rate {cross_rate:.3} below target"
    );
    // Known red: the map magnifies within-block structure across the
    // block's whole region at 25 units for 24 items, so distant
    // same-block pairs are consistent non-neighbors. Measured ceiling
    // is ~0.56 over seeds, schedules and iteration budgets; see README.
    assert!(
        within_rate >= 0.9,
        "within-block attract rate {within_rate:.3} below target (known red)"
    );
}

fn random_graph(n: usize, probability: f64, seed: u64) -> NeighborGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = (0..n).map(|v| format!("v{v:02}")).collect();
    let mut adj = vec![vec![false; n]; n];
    for p in 0..n {
        for q in (p + 1)..n {
            if rng.random::<f64>() < probability {
                adj[p][q] = true;
                adj[q][p] = true;
            }
        }
    }
    NeighborGraph::from_adjacency(labels, adj).unwrap()
}

fn is_clique(g: &NeighborGraph, vs: &[usize]) -> bool {
    vs.iter()
        .enumerate()
        .all(|(a, &p)| vs[a + 1..].iter().all(|&q| g.has_edge(p, q)))
}

/// Exhaustive search over all vertex subsets with the same
/// (size, lexicographic) preference as the implementation.
fn subsets_best(g: &NeighborGraph, quasi: bool) -> Vec<usize> {
    let n = g.n_vertices();
    let mut best: Vec<usize> = Vec::new();
    for mask in 0u32..(1 << n) {
        let vs: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        let ok = if quasi {
            is_quasi_clique(g, &vs)
        } else {
            is_clique(g, &vs)
        };
        if ok && (vs.len() > best.len() || (vs.len() == best.len() && vs < best)) {
            best = vs;
        }
    }
    best
}

fn glutton_oracle(g: &NeighborGraph) -> QuasiCliquePartition {
    let mut remaining: Vec<usize> = (0..g.n_vertices()).collect();
    let mut parts = Vec::new();
    loop {
        if remaining.len() < 4 {
            break;
        }
        let labels = remaining.iter().map(|&v| format!("s{v}")).collect();
        let adj = remaining
            .iter()
            .map(|&p| remaining.iter().map(|&q| g.has_edge(p, q)).collect())
            .collect();
        let sub = NeighborGraph::from_adjacency(labels, adj).unwrap();
        let local = subsets_best(&sub, true);
        if local.len() < 4 {
            break;
        }
        let part: Vec<usize> = local.iter().map(|&v| remaining[v]).collect();
        remaining.retain(|v| !part.contains(v));
        parts.push(part);
    }
    QuasiCliquePartition {
        parts,
        remainder: remaining,
    }
}

#[test]
fn criterion_4_search_matches_exhaustive_enumeration() {
    let start = Instant::now();
    let mut checked = 0;
    for (round, &p) in [0.3, 0.5, 0.7].iter().cycle().take(50).enumerate() {
        let n = 8 + round % 5; // 8..=12 vertices
        let g = random_graph(n, p, 9000 + round as u64);
        let clique = max_clique(&g);
        assert!(is_clique(&g, &clique));
        assert_eq!(clique.len(), subsets_best(&g, false).len(), "round {round}");
        let quasi = max_quasi_clique(&g);
        assert!(is_quasi_clique(&g, &quasi));
        assert_eq!(quasi.len(), subsets_best(&g, true).len(), "round {round}");
        assert!(quasi.len() >= clique.len());
        checked += 1;
    }
    let mut glutton_checked = 0;
    for round in 0..20u64 {
        let n = 6 + (round as usize) % 4; // 6..=9 vertices
        let g = random_graph(n, 0.55, 500 + round);
        assert_eq!(
            glutton_decomposition(&g),
            glutton_oracle(&g),
            "round {round}"
        );
        glutton_checked += 1;
    }
    println!(
        "criterion 4: PASS — {checked} clique/quasi-clique instances and {glutton_checked} \
         decompositions match exhaustive enumeration in {:.1} s",
        start.elapsed().as_secs_f64()
    );
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

fn random_table(rng: &mut ChaCha8Rng) -> ContingencyTable {
    let n_rows = rng.random_range(3..12);
    let n_cols = rng.random_range(2..7);
    let mut counts: Vec<Vec<u64>> = (0..n_rows)
        .map(|_| (0..n_cols).map(|_| rng.random_range(0..40)).collect())
        .collect();
    // Pin every marginal above zero.
    for (i, row) in counts.iter_mut().enumerate() {
        row[i % n_cols] += 1;
    }
    for j in 0..n_cols {
        counts[j % n_rows][j] += 1;
    }
    let rows = (0..n_rows).map(|i| format!("w{i}")).collect();
    let cols = (0..n_cols).map(|j| format!("d{j}")).collect();
    ContingencyTable::new(rows, cols, counts).unwrap()
}

fn chi_square_over_n(t: &ContingencyTable) -> f64 {
    let total: u64 = t.row_sums().iter().sum();
    let total = total as f64;
    let row_masses: Vec<f64> = t.row_sums().iter().map(|&s| s as f64 / total).collect();
    let col_masses: Vec<f64> = t.col_sums().iter().map(|&s| s as f64 / total).collect();
    let mut chi = 0.0;
    for (i, row) in t.counts().iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            let p = c as f64 / total;
            let expected = row_masses[i] * col_masses[j];
            chi += (p - expected) * (p - expected) / expected;
        }
    }
    chi
}

#[test]
fn criterion_5_fca_numerics() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_inertia: f64 = 0.0;
    let mut worst_reconstruction: f64 = 0.0;
    for _ in 0..100 {
        let table = random_table(&mut rng);
        let oracle = chi_square_over_n(&table);
        let normalized = table.validate().unwrap().normalize();
        let model = decompose(&normalized).unwrap();
        worst_inertia = worst_inertia.max((model.total_inertia() - oracle).abs());
        if model.rank() > 0 {
            let share_sum: f64 = model.inertia_shares().iter().sum();
            assert!((share_sum - 1.0).abs() < 1e-10);
        }
        let rebuilt = model.reconstruct();
        for i in 0..normalized.n_rows() {
            for j in 0..normalized.n_cols() {
                worst_reconstruction =
                    worst_reconstruction.max((rebuilt[i][j] - normalized.values()[i][j]).abs());
            }
        }
    }
    // Exact independence: counts of the form a_i * b_j.
    let a = [2u64, 5, 1, 3];
    let b = [3u64, 1, 4];
    let counts: Vec<Vec<u64>> = a
        .iter()
        .map(|&x| b.iter().map(|&y| x * y).collect())
        .collect();
    let independent = ContingencyTable::new(
        (0..4).map(|i| format!("w{i}")).collect(),
        (0..3).map(|j| format!("d{j}")).collect(),
        counts,
    )
    .unwrap();
    let independent_model = decompose(&independent.validate().unwrap().normalize()).unwrap();

    let pass = worst_inertia < 1e-8
        && worst_reconstruction < 1e-10
        && independent_model.total_inertia() < 1e-12;
    println!(
        "criterion 5: {} — max |inertia - chi2/n| {:.2e} (target < 1e-8), max reconstruction \
         error {:.2e} (target < 1e-10), independence inertia {:.2e} (target < 1e-12)",
        if pass { "PASS" } else { "FAIL" },
        worst_inertia,
        worst_reconstruction,
        independent_model.total_inertia()
    );
    assert!(pass);
}

#[test]
fn criterion_6_stability_matrix_invariants() {
    let normalized = two_block_table(3).validate().unwrap().normalize();
    let geometry = MapGeometry::new(5, 5).unwrap();
    let cfg = TrainConfig::new(geometry, 600, 0.5, 0.01, 11).unwrap();
    let runs = 7;
    let first = run_ensemble(&normalized, &cfg, runs);
    let second = run_ensemble(&normalized, &cfg, runs);
    for p in 0..first.n_items() {
        assert_eq!(first.value(p, p), 1.0, "unit diagonal");
        for q in 0..first.n_items() {
            assert_eq!(first.value(p, q), first.value(q, p), "symmetry");
            let scaled = first.value(p, q) * runs as f64;
            assert!((scaled - scaled.round()).abs() < 1e-9, "1/L lattice");
        }
    }
    let identical = first.to_csv() == second.to_csv();
    println!(
        "criterion 6: {} — symmetry, unit diagonal, 1/{} lattice, byte-identical reruns",
        if identical { "PASS" } else { "FAIL" },
        runs
    );
    assert!(identical);
}

#[test]
fn criterion_7_desk_scale_throughput() {
    let mut rng = ChaCha8Rng::seed_from_u64(219);
    let rows: Vec<String> = (0..219).map(|i| format!("w{i:03}")).collect();
    let cols: Vec<String> = (0..8).map(|j| format!("d{j}")).collect();
    let counts: Vec<Vec<u64>> = (0..219)
        .map(|_| (0..8).map(|_| 1 + rng.random_range(0..80)).collect())
        .collect();
    let table = ContingencyTable::new(rows, cols, counts).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.csv");
    std::fs::write(&input, table.to_matrix_csv().unwrap()).unwrap();
    let cfg = PipelineConfig::new(input, InputFormat::Matrix, dir.path().join("out"));

    let start = Instant::now();
    let manifest = run_pipeline(&cfg).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let pass = elapsed < 120.0;
    println!(
        "criterion 7: {} — full pipeline on a 219x8 table in {elapsed:.1} s (target < 120 s), \
         {} artifacts",
        if pass { "PASS" } else { "FAIL" },
        manifest.files.len()
    );
    for file in &manifest.files {
        assert!(dir.path().join("out").join(&file.name).exists());
    }
    assert!(pass);
}
