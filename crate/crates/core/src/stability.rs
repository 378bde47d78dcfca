//! Neighbor-stability analysis over an ensemble of independent map runs.
//!
//! Two items are neighbors in one run when their assigned units are at
//! Chebyshev distance at most 1. Averaging the indicator over `L` runs
//! gives the stability index of every pair, which a binomial test splits
//! into attracting, fickle and repulsing pairs: under the null
//! hypothesis the neighbor probability is `9/U`, so the two-sided band
//! at level 5% is `9/U ± 1.96 sqrt((9/U)(1 - 9/U)/L)`.

use rayon::prelude::*;
use std::collections::BTreeMap;

use crate::contingency::NormalizedTable;
use crate::error::{Error, Result};
use crate::fca::ItemKind;
use crate::korresp::{assign_all, train, Assignment, MapGeometry, TrainConfig};

/// Neighbor frequencies of every item pair over `L` runs. Items are the
/// table rows followed by the table columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMatrix {
    runs: u32,
    geometry: MapGeometry,
    labels: Vec<String>,
    n_words: usize,
    values: Vec<Vec<f64>>,
}

/// Acceptance band of the binomial neighborhood test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CriticalBounds {
    /// Null neighbor probability 9/U.
    pub a: f64,
    /// Half-width of the acceptance band.
    pub b: f64,
    pub lower: f64,
    pub upper: f64,
    pub z: f64,
}

/// Outcome of the pair test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairClass {
    Attract,
    Fickle,
    Repulse,
}

impl std::fmt::Display for PairClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PairClass::Attract => write!(f, "attract"),
            PairClass::Fickle => write!(f, "fickle"),
            PairClass::Repulse => write!(f, "repulse"),
        }
    }
}

/// How fickle items are selected from the per-item counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FickleSelection {
    /// Items with at least this many fickle pairs.
    Threshold(usize),
    /// The `k` items with the largest counts, ties toward the
    /// lexicographically smaller label.
    TopK(usize),
}

/// Fickle-item report: per-item fickle-pair counts over all `I + J - 1`
/// partners, the effective threshold and the selected labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FickleReport {
    /// Effective threshold: the requested one, or in top-k mode the
    /// smallest selected count.
    pub theta: usize,
    /// Counts for every item, keyed by label.
    pub counts: BTreeMap<String, usize>,
    /// Selected fickle items, sorted.
    pub fickle: Vec<String>,
    /// Whether text items were excluded from selection.
    pub words_only: bool,
}

/// True when the two items sit on the same or adjacent units.
pub fn neighbor_indicator(a: &Assignment, g: &MapGeometry, p: usize, q: usize) -> bool {
    g.chebyshev(a.unit_of_item(p), a.unit_of_item(q)) <= 1
}

/// Trains `L` independent maps (run `l` is seeded with `base seed + l`),
/// assigns all items on each and averages the neighbor indicator.
pub fn run_ensemble(n: &NormalizedTable, base_cfg: &TrainConfig, runs: u32) -> StabilityMatrix {
    let items = n.n_rows() + n.n_cols();
    let counts: Vec<u32> = (0..runs)
        .into_par_iter()
        .map(|l| {
            let cfg = TrainConfig {
                seed: base_cfg.seed.wrapping_add(l as u64),
                ..*base_cfg
            };
            let cb = train(n, &cfg);
            let assignment = assign_all(&cb, n);
            let mut local = vec![0u32; items * items];
            for p in 0..items {
                for q in p..items {
                    if neighbor_indicator(&assignment, &cfg.geometry, p, q) {
                        local[p * items + q] = 1;
                        local[q * items + p] = 1;
                    }
                }
            }
            local
        })
        .reduce(
            || vec![0u32; items * items],
            |mut acc, local| {
                for (a, b) in acc.iter_mut().zip(local) {
                    *a += b;
                }
                acc
            },
        );

    let values = (0..items)
        .map(|p| {
            (0..items)
                .map(|q| counts[p * items + q] as f64 / runs as f64)
                .collect()
        })
        .collect();
    let mut labels = n.row_labels().to_vec();
    labels.extend_from_slice(n.col_labels());
    StabilityMatrix {
        runs,
        geometry: base_cfg.geometry,
        labels,
        n_words: n.n_rows(),
        values,
    }
}

impl StabilityMatrix {
    pub fn runs(&self) -> u32 {
        self.runs
    }

    pub fn geometry(&self) -> MapGeometry {
        self.geometry
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_items(&self) -> usize {
        self.labels.len()
    }

    pub fn n_words(&self) -> usize {
        self.n_words
    }

    pub fn item_kind(&self, p: usize) -> ItemKind {
        if p < self.n_words {
            ItemKind::Word
        } else {
            ItemKind::Text
        }
    }

    pub fn value(&self, p: usize, q: usize) -> f64 {
        self.values[p][q]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// CSV serialization: a label header, then one row per item with the
    /// frequencies printed with six digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("item");
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (p, label) in self.labels.iter().enumerate() {
            out.push_str(label);
            for q in 0..self.labels.len() {
                out.push_str(&format!(",{:.6}", self.values[p][q]));
            }
            out.push('\n');
        }
        out
    }

    /// Reads the CSV form back. `n_words` marks how many leading items
    /// are words; the rest are texts.
    pub fn from_csv(
        text: &str,
        runs: u32,
        geometry: MapGeometry,
        n_words: Option<usize>,
    ) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or(Error::EmptyInput)?;
        let labels: Vec<String> = header
            .split(',')
            .skip(1)
            .map(|s| s.trim().to_string())
            .collect();
        if labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut values = Vec::with_capacity(labels.len());
        for (p, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != labels.len() + 1 {
                return Err(Error::RaggedRow {
                    line: p + 2,
                    expected: labels.len() + 1,
                    got: fields.len(),
                });
            }
            if fields[0].trim() != labels[p] {
                return Err(Error::CsvFormat {
                    line: p + 2,
                    reason: format!(
                        "row label {:?} does not match column label {:?}",
                        fields[0].trim(),
                        labels[p]
                    ),
                });
            }
            let row: std::result::Result<Vec<f64>, _> = fields[1..]
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect();
            let row = row.map_err(|e| Error::CsvFormat {
                line: p + 2,
                reason: e.to_string(),
            })?;
            values.push(row);
        }
        if values.len() != labels.len() {
            return Err(Error::CsvFormat {
                line: values.len() + 1,
                reason: format!("expected {} rows, got {}", labels.len(), values.len()),
            });
        }
        for p in 0..labels.len() {
            for q in 0..labels.len() {
                let v = values[p][q];
                if !(0.0..=1.0).contains(&v) || (values[q][p] - v).abs() > 1e-9 {
                    return Err(Error::CsvFormat {
                        line: p + 2,
                        reason: format!("cell ({p},{q}) is not a symmetric frequency: {v}"),
                    });
                }
            }
        }
        let n_words = n_words.unwrap_or(labels.len());
        if n_words > labels.len() {
            return Err(Error::InvalidConfig {
                reason: format!("{n_words} words exceed {} items", labels.len()),
            });
        }
        Ok(StabilityMatrix {
            runs,
            geometry,
            labels,
            n_words,
            values,
        })
    }
}

/// Critical bounds with the paper's fixed 5% two-sided level.
pub fn critical_bounds(units: usize, runs: u32) -> Result<CriticalBounds> {
    critical_bounds_with_z(units, runs, 1.96)
}

/// Critical bounds with an explicit normal quantile.
pub fn critical_bounds_with_z(units: usize, runs: u32, z: f64) -> Result<CriticalBounds> {
    if units < 9 {
        return Err(Error::UnitCountTooSmall { units });
    }
    if runs == 0 {
        return Err(Error::InvalidConfig {
            reason: "need at least one run".to_string(),
        });
    }
    let a = 9.0 / units as f64;
    let b = z * (a * (1.0 - a) / runs as f64).sqrt();
    Ok(CriticalBounds {
        a,
        b,
        lower: a - b,
        upper: a + b,
        z,
    })
}

/// Applies the decision rule to one stability index. Band edges count as
/// fickle.
pub fn classify_pair(m: f64, bounds: &CriticalBounds) -> PairClass {
    if m > bounds.upper {
        PairClass::Attract
    } else if m < bounds.lower {
        PairClass::Repulse
    } else {
        PairClass::Fickle
    }
}

/// For every item, the number of partners classified fickle.
pub fn fickleness_counts(m: &StabilityMatrix, bounds: &CriticalBounds) -> Vec<usize> {
    let items = m.n_items();
    (0..items)
        .map(|p| {
            (0..items)
                .filter(|&q| q != p && classify_pair(m.value(p, q), bounds) == PairClass::Fickle)
                .count()
        })
        .collect()
}

/// Selects fickle items from the counts. With `words_only`, text items
/// keep their counts in the report but are never selected.
pub fn fickle_words(
    m: &StabilityMatrix,
    counts: &[usize],
    selection: FickleSelection,
    words_only: bool,
) -> FickleReport {
    debug_assert_eq!(counts.len(), m.n_items());
    let eligible: Vec<usize> = (0..m.n_items())
        .filter(|&p| !words_only || p < m.n_words())
        .collect();
    let (theta, mut fickle) = match selection {
        FickleSelection::Threshold(theta) => {
            let picked: Vec<String> = eligible
                .iter()
                .filter(|&&p| counts[p] >= theta)
                .map(|&p| m.labels()[p].clone())
                .collect();
            (theta, picked)
        }
        FickleSelection::TopK(k) => {
            let mut order = eligible.clone();
            order.sort_by(|&a, &b| {
                counts[b]
                    .cmp(&counts[a])
                    .then_with(|| m.labels()[a].cmp(&m.labels()[b]))
            });
            order.truncate(k);
            let theta = order.iter().map(|&p| counts[p]).min().unwrap_or(0);
            let picked = order.iter().map(|&p| m.labels()[p].clone()).collect();
            (theta, picked)
        }
    };
    fickle.sort();
    let counts_map = m
        .labels()
        .iter()
        .cloned()
        .zip(counts.iter().copied())
        .collect();
    FickleReport {
        theta,
        counts: counts_map,
        fickle,
        words_only,
    }
}

impl FickleReport {
    pub fn is_fickle(&self, label: &str) -> bool {
        self.fickle
            .binary_search_by(|l| l.as_str().cmp(label))
            .is_ok()
    }

    /// JSON form `{theta, counts, fickle}`.
    pub fn to_json(&self) -> String {
        #[derive(serde::Serialize)]
        struct Repr<'a> {
            theta: usize,
            counts: &'a BTreeMap<String, usize>,
            fickle: &'a [String],
        }
        serde_json::to_string_pretty(&Repr {
            theta: self.theta,
            counts: &self.counts,
            fickle: &self.fickle,
        })
        .expect("report serialization cannot fail")
    }
}

/// One map cell of a rendered layout.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct MapItem {
    pub label: String,
    pub kind: ItemKind,
    pub fickle: bool,
}

/// Grid layout with fickle items flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct MapLayout {
    pub geometry: MapGeometry,
    /// Indexed by unit; items keep the row-then-column order.
    pub cells: Vec<Vec<MapItem>>,
}

/// Builds the robust map layout: placements are untouched, fickle items
/// are flagged for graying out.
pub fn robust_map(
    a: &Assignment,
    report: &FickleReport,
    row_labels: &[String],
    col_labels: &[String],
    geometry: MapGeometry,
) -> Result<MapLayout> {
    if a.row_units.len() != row_labels.len() || a.col_units.len() != col_labels.len() {
        return Err(Error::ItemSetMismatch {
            reason: format!(
                "assignment covers {}+{} items, labels give {}+{}",
                a.row_units.len(),
                a.col_units.len(),
                row_labels.len(),
                col_labels.len()
            ),
        });
    }
    let mut expected = report.counts.keys();
    let mut sorted_labels: Vec<&String> = row_labels.iter().chain(col_labels.iter()).collect();
    sorted_labels.sort();
    for label in sorted_labels {
        match expected.next() {
            Some(l) if l == label => {}
            _ => {
                return Err(Error::ItemSetMismatch {
                    reason: format!("report does not cover item {label:?}"),
                });
            }
        }
    }
    if expected.next().is_some() {
        return Err(Error::ItemSetMismatch {
            reason: "report covers items absent from the assignment".to_string(),
        });
    }

    let mut cells = vec![Vec::new(); geometry.unit_count()];
    for (i, label) in row_labels.iter().enumerate() {
        cells[a.row_units[i]].push(MapItem {
            label: label.clone(),
            kind: ItemKind::Word,
            fickle: report.is_fickle(label),
        });
    }
    for (j, label) in col_labels.iter().enumerate() {
        cells[a.col_units[j]].push(MapItem {
            label: label.clone(),
            kind: ItemKind::Text,
            fickle: report.is_fickle(label),
        });
    }
    Ok(MapLayout { geometry, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contingency::ContingencyTable;

    fn normalized(counts: &[&[u64]]) -> NormalizedTable {
        let rows: Vec<String> = (0..counts.len()).map(|i| format!("w{i}")).collect();
        let cols: Vec<String> = (0..counts[0].len()).map(|j| format!("d{j}")).collect();
        ContingencyTable::new(rows, cols, counts.iter().map(|r| r.to_vec()).collect())
            .unwrap()
            .validate()
            .unwrap()
            .normalize()
    }

    fn geometry(w: usize, h: usize) -> MapGeometry {
        MapGeometry::new(w, h).unwrap()
    }

    fn config(g: MapGeometry, iterations: usize, seed: u64) -> TrainConfig {
        TrainConfig::new(g, iterations, 0.5, 0.01, seed).unwrap()
    }

    #[test]
    fn indicator_counts_same_and_adjacent_units() {
        let g = geometry(10, 10);
        let a = Assignment {
            row_units: vec![g.unit_at(2, 2), g.unit_at(3, 1), g.unit_at(0, 0)],
            col_units: vec![g.unit_at(4, 4), g.unit_at(2, 2)],
        };
        assert!(neighbor_indicator(&a, &g, 0, 4)); // same unit
        assert!(neighbor_indicator(&a, &g, 0, 1)); // diagonal
        assert!(!neighbor_indicator(&a, &g, 2, 3)); // (0,0) vs (4,4)
        assert!(neighbor_indicator(&a, &g, 0, 0)); // self
    }

    #[test]
    fn single_run_matrix_is_binary() {
        let n = normalized(&[&[9, 1], &[1, 9], &[5, 5]]);
        let m = run_ensemble(&n, &config(geometry(3, 3), 100, 1), 1);
        for row in m.values() {
            for &v in row {
                assert!(v == 0.0 || v == 1.0);
            }
        }
    }

    #[test]
    fn ensemble_is_deterministic() {
        let n = normalized(&[&[9, 1], &[1, 9], &[5, 5]]);
        let cfg = config(geometry(3, 3), 80, 17);
        assert_eq!(run_ensemble(&n, &cfg, 4), run_ensemble(&n, &cfg, 4));
    }

    #[test]
    fn ensemble_is_the_mean_of_single_runs() {
        let n = normalized(&[&[9, 1], &[1, 9], &[5, 5], &[2, 8]]);
        let cfg = config(geometry(3, 3), 60, 5);
        let combined = run_ensemble(&n, &cfg, 3);
        let singles: Vec<StabilityMatrix> = (0..3)
            .map(|l| {
                let single = TrainConfig {
                    seed: cfg.seed + l,
                    ..cfg
                };
                run_ensemble(&n, &single, 1)
            })
            .collect();
        for p in 0..combined.n_items() {
            for q in 0..combined.n_items() {
                let mean: f64 = singles.iter().map(|s| s.value(p, q)).sum::<f64>() / 3.0;
                assert!((combined.value(p, q) - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matrix_invariants_hold() {
        let n = normalized(&[&[9, 1], &[1, 9], &[5, 5]]);
        let m = run_ensemble(&n, &config(geometry(3, 3), 100, 2), 7);
        for p in 0..m.n_items() {
            assert_eq!(m.value(p, p), 1.0);
            for q in 0..m.n_items() {
                assert_eq!(m.value(p, q), m.value(q, p));
                let scaled = m.value(p, q) * 7.0;
                assert!((scaled - scaled.round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn paper_scale_bounds() {
        let b = critical_bounds(100, 40).unwrap();
        assert!((b.upper - 0.1787).abs() < 1e-3);
        assert!((b.lower - 0.0013).abs() < 5e-4);
    }

    #[test]
    fn nine_unit_map_degenerates() {
        let b = critical_bounds(9, 40).unwrap();
        assert_eq!(b.a, 1.0);
        assert_eq!(b.b, 0.0);
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
    }

    #[test]
    fn closed_form_bounds() {
        let b = critical_bounds(36, 100).unwrap();
        assert!((b.a - 0.25).abs() < 1e-15);
        assert!((b.b - 0.084_870_489_57).abs() < 1e-9);
    }

    #[test]
    fn small_map_is_rejected() {
        assert!(matches!(
            critical_bounds(8, 40),
            Err(Error::UnitCountTooSmall { units: 8 })
        ));
    }

    #[test]
    fn classification_rule() {
        let b = critical_bounds(100, 40).unwrap();
        assert_eq!(classify_pair(0.5, &b), PairClass::Attract);
        assert_eq!(classify_pair(0.09, &b), PairClass::Fickle);
        assert_eq!(classify_pair(0.0, &b), PairClass::Repulse);
        // Band edges are inclusive.
        assert_eq!(classify_pair(b.upper, &b), PairClass::Fickle);
        assert_eq!(classify_pair(b.lower, &b), PairClass::Fickle);
        // The diagonal always attracts while the band stays below 1.
        assert!(b.upper < 1.0);
        assert_eq!(classify_pair(1.0, &b), PairClass::Attract);
    }

    fn hand_matrix(values: Vec<Vec<f64>>, n_words: usize) -> StabilityMatrix {
        let labels = (0..values.len()).map(|p| format!("x{p}")).collect();
        StabilityMatrix {
            runs: 40,
            geometry: geometry(6, 6),
            labels,
            n_words,
            values,
        }
    }

    #[test]
    fn fickleness_counts_hand_cases() {
        // U=36, L=40: lower ~ 0.1158, upper ~ 0.3842.
        let b = critical_bounds(36, 40).unwrap();
        let m = hand_matrix(
            vec![
                vec![1.0, 0.2, 0.3, 0.9],
                vec![0.2, 1.0, 0.9, 0.9],
                vec![0.3, 0.9, 1.0, 0.05],
                vec![0.9, 0.9, 0.05, 1.0],
            ],
            4,
        );
        let counts = fickleness_counts(&m, &b);
        assert_eq!(counts, vec![2, 1, 1, 0]);
    }

    #[test]
    fn all_attract_means_no_fickle_pairs() {
        let b = critical_bounds(36, 40).unwrap();
        let m = hand_matrix(
            vec![
                vec![1.0, 1.0, 1.0],
                vec![1.0, 1.0, 1.0],
                vec![1.0, 1.0, 1.0],
            ],
            3,
        );
        assert_eq!(fickleness_counts(&m, &b), vec![0, 0, 0]);
    }

    #[test]
    fn all_at_a_means_everything_is_fickle() {
        let b = critical_bounds(36, 40).unwrap();
        let a = b.a;
        let mut values = vec![vec![a; 3]; 3];
        for (p, row) in values.iter_mut().enumerate() {
            row[p] = 1.0;
        }
        let m = hand_matrix(values, 3);
        assert_eq!(fickleness_counts(&m, &b), vec![2, 2, 2]);
    }

    #[test]
    fn threshold_selection_monotone_in_theta() {
        let b = critical_bounds(36, 40).unwrap();
        let m = hand_matrix(
            vec![
                vec![1.0, 0.2, 0.3, 0.9],
                vec![0.2, 1.0, 0.9, 0.9],
                vec![0.3, 0.9, 1.0, 0.05],
                vec![0.9, 0.9, 0.05, 1.0],
            ],
            4,
        );
        let counts = fickleness_counts(&m, &b);
        let all = fickle_words(&m, &counts, FickleSelection::Threshold(0), false);
        assert_eq!(all.fickle.len(), 4);
        let none = fickle_words(&m, &counts, FickleSelection::Threshold(4), false);
        assert!(none.fickle.is_empty());
        let mut previous = usize::MAX;
        for theta in 0..4 {
            let picked = fickle_words(&m, &counts, FickleSelection::Threshold(theta), false);
            assert!(picked.fickle.len() <= previous);
            previous = picked.fickle.len();
        }
    }

    #[test]
    fn top_k_breaks_ties_by_label() {
        let b = critical_bounds(36, 40).unwrap();
        let m = hand_matrix(
            vec![
                vec![1.0, 0.2, 0.2],
                vec![0.2, 1.0, 0.9],
                vec![0.2, 0.9, 1.0],
            ],
            3,
        );
        let counts = fickleness_counts(&m, &b);
        assert_eq!(counts, vec![2, 1, 1]);
        let report = fickle_words(&m, &counts, FickleSelection::TopK(2), false);
        assert_eq!(report.fickle, vec!["x0", "x1"]);
        assert_eq!(report.theta, 1);
    }

    #[test]
    fn words_only_excludes_texts() {
        let b = critical_bounds(36, 40).unwrap();
        let m = hand_matrix(
            vec![
                vec![1.0, 0.2, 0.2],
                vec![0.2, 1.0, 0.9],
                vec![0.2, 0.9, 1.0],
            ],
            1,
        );
        let counts = fickleness_counts(&m, &b);
        let report = fickle_words(&m, &counts, FickleSelection::Threshold(0), true);
        assert_eq!(report.fickle, vec!["x0"]);
        assert_eq!(report.counts.len(), 3);
    }

    fn toy_report(labels: &[&str], fickle: &[&str]) -> FickleReport {
        let mut fickle: Vec<String> = fickle.iter().map(|l| l.to_string()).collect();
        fickle.sort();
        FickleReport {
            theta: 1,
            counts: labels.iter().map(|l| (l.to_string(), 1)).collect(),
            fickle,
            words_only: false,
        }
    }

    #[test]
    fn robust_map_flags_exactly_the_fickle_items() {
        let g = geometry(2, 2);
        let a = Assignment {
            row_units: vec![0, 1, 3],
            col_units: vec![0, 2],
        };
        let rows: Vec<String> = vec!["w0".into(), "w1".into(), "w2".into()];
        let cols: Vec<String> = vec!["d0".into(), "d1".into()];
        let report = toy_report(&["d0", "d1", "w0", "w1", "w2"], &["w1", "d1"]);
        let layout = robust_map(&a, &report, &rows, &cols, g).unwrap();
        let flagged: Vec<&str> = layout
            .cells
            .iter()
            .flatten()
            .filter(|item| item.fickle)
            .map(|item| item.label.as_str())
            .collect();
        assert_eq!(flagged, vec!["w1", "d1"]);
        let placed: usize = layout.cells.iter().map(|c| c.len()).sum();
        assert_eq!(placed, 5);
    }

    #[test]
    fn robust_map_with_empty_fickle_set_changes_nothing() {
        let g = geometry(2, 1);
        let a = Assignment {
            row_units: vec![0],
            col_units: vec![1],
        };
        let report = toy_report(&["d0", "w0"], &[]);
        let layout = robust_map(&a, &report, &["w0".into()], &["d0".into()], g).unwrap();
        assert!(layout.cells.iter().flatten().all(|item| !item.fickle));
    }

    #[test]
    fn robust_map_rejects_mismatched_item_sets() {
        let g = geometry(2, 1);
        let a = Assignment {
            row_units: vec![0],
            col_units: vec![1],
        };
        let report = toy_report(&["d0", "w0", "extra"], &[]);
        let err = robust_map(&a, &report, &["w0".into()], &["d0".into()], g).unwrap_err();
        assert!(matches!(err, Error::ItemSetMismatch { .. }));
    }

    #[test]
    fn csv_round_trip() {
        let n = normalized(&[&[9, 1], &[1, 9], &[5, 5]]);
        let m = run_ensemble(&n, &config(geometry(3, 3), 60, 9), 4);
        let csv = m.to_csv();
        let back = StabilityMatrix::from_csv(&csv, 4, m.geometry(), Some(m.n_words())).unwrap();
        assert_eq!(back.labels(), m.labels());
        for p in 0..m.n_items() {
            for q in 0..m.n_items() {
                assert!((back.value(p, q) - m.value(p, q)).abs() <= 5e-7);
            }
        }
    }
}
