//! End-to-end pipeline: ingest, normalize, factor analysis, stability
//! ensemble, fickle report, robust map, neighbor graph, decomposition,
//! and all file exports under one output directory with a hash manifest.
//!
//! Given the same configuration and input the pipeline writes byte-
//! identical files: every stage is deterministic and the manifest
//! records a sha256 per artifact so reruns are checkable.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::cliquegraph::{build_graph, glutton_decomposition};
use crate::contingency::{load_long_csv, load_matrix_csv, ContingencyTable};
use crate::error::{Error, Result};
use crate::fca::decompose;
use crate::korresp::{assign_all, train, MapGeometry, TrainConfig};
use crate::report;
use crate::stability::{
    critical_bounds_with_z, fickle_words, fickleness_counts, robust_map, run_ensemble,
    FickleSelection,
};

/// Input CSV layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Matrix,
    Long,
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matrix" => Ok(InputFormat::Matrix),
            "long" => Ok(InputFormat::Long),
            other => Err(Error::InvalidConfig {
                reason: format!("unknown input format {other:?} (expected matrix or long)"),
            }),
        }
    }
}

/// Fickle-item selection rule, serialized into the manifest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FickleRule {
    Theta(usize),
    TopFickle(usize),
}

/// Full pipeline configuration. Every default is echoed into the
/// manifest so paper-silent parameters stay auditable.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    pub top_k: Option<usize>,
    pub grid_width: usize,
    pub grid_height: usize,
    /// Training iterations; `None` means `50 * (rows + cols)`.
    pub iterations: Option<usize>,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Ensemble size L.
    pub runs: u32,
    pub seed: u64,
    pub fickle_rule: FickleRule,
    pub z: f64,
    pub out_dir: PathBuf,
}

impl PipelineConfig {
    /// Defaults: 10x10 grid, L = 40 runs, geometric epsilon 0.5 to 0.01,
    /// top 30 fickle words, z = 1.96.
    pub fn new(input: PathBuf, format: InputFormat, out_dir: PathBuf) -> Self {
        PipelineConfig {
            input,
            format,
            top_k: None,
            grid_width: 10,
            grid_height: 10,
            iterations: None,
            epsilon_start: 0.5,
            epsilon_end: 0.01,
            runs: 40,
            seed: 42,
            fickle_rule: FickleRule::TopFickle(30),
            z: 1.96,
            out_dir,
        }
    }
}

/// One exported artifact.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ManifestFile {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Summary numbers of a pipeline run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RunStats {
    pub rows: usize,
    pub cols: usize,
    pub factors: usize,
    pub total_inertia: f64,
    pub inertia_shares: Vec<f64>,
    pub bound_lower: f64,
    pub bound_upper: f64,
    pub fickle_items: usize,
    pub graph_vertices: usize,
    pub graph_edges: usize,
    pub quasi_cliques: usize,
    /// Pearson correlation between fickleness and squared distance to
    /// the factor-space origin; absent when undefined.
    pub fickleness_distance_correlation: Option<f64>,
    pub correlation_note: Option<String>,
}

/// Manifest of a pipeline run: resolved configuration, run statistics
/// and the hash of every written file.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Manifest {
    pub config: PipelineConfig,
    pub stats: RunStats,
    pub files: Vec<ManifestFile>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<ManifestFile> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(ManifestFile {
        name: name.to_string(),
        sha256: sha256_hex(content.as_bytes()),
        bytes: content.len(),
    })
}

/// Loads the input table for `cfg` without running the pipeline.
pub fn load_input(cfg: &PipelineConfig) -> Result<ContingencyTable> {
    let table = match cfg.format {
        InputFormat::Matrix => load_matrix_csv(&cfg.input)?,
        InputFormat::Long => load_long_csv(&cfg.input)?,
    };
    Ok(match cfg.top_k {
        Some(k) => table.top_k_filter(k),
        None => table,
    })
}

/// Runs the whole pipeline and writes every artifact plus the manifest
/// into `cfg.out_dir`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Manifest> {
    let table = load_input(cfg).map_err(|e| e.at_stage("ingest"))?;
    let validated = table.validate().map_err(|e| e.at_stage("validate"))?;
    let normalized = validated.normalize();

    let geometry =
        MapGeometry::new(cfg.grid_width, cfg.grid_height).map_err(|e| e.at_stage("config"))?;
    // The null model needs at least a 3x3 neighborhood's worth of units;
    // checked before the expensive ensemble.
    let bounds = critical_bounds_with_z(geometry.unit_count(), cfg.runs, cfg.z)
        .map_err(|e| e.at_stage("bounds"))?;

    let model = decompose(&normalized).map_err(|e| e.at_stage("fca"))?;

    let iterations = cfg.iterations.unwrap_or_else(|| {
        TrainConfig::default_iterations(normalized.n_rows(), normalized.n_cols())
    });
    let train_cfg = TrainConfig::new(
        geometry,
        iterations,
        cfg.epsilon_start,
        cfg.epsilon_end,
        cfg.seed,
    )
    .map_err(|e| e.at_stage("config"))?;

    let matrix = run_ensemble(&normalized, &train_cfg, cfg.runs);
    let counts = fickleness_counts(&matrix, &bounds);
    let selection = match cfg.fickle_rule {
        FickleRule::Theta(theta) => FickleSelection::Threshold(theta),
        FickleRule::TopFickle(k) => FickleSelection::TopK(k),
    };
    let fickle_report = fickle_words(&matrix, &counts, selection, true);
    let fickle_set: BTreeSet<String> = fickle_report.fickle.iter().cloned().collect();

    // Reference map: the ensemble's first run (seed + 0).
    let codebook = train(&normalized, &train_cfg);
    let assignment = assign_all(&codebook, &normalized);
    let layout = robust_map(
        &assignment,
        &fickle_report,
        normalized.row_labels(),
        normalized.col_labels(),
        geometry,
    )
    .map_err(|e| e.at_stage("robust-map"))?;

    let graph = build_graph(&matrix, &bounds, Some(&fickle_report.fickle))
        .map_err(|e| e.at_stage("graph"))?;
    let partition = glutton_decomposition(&graph);

    let distance_report = report::fickleness_distance_report(&model, &fickle_report.counts)
        .map_err(|e| e.at_stage("report"))?;

    let plane = if model.rank() >= 2 { (0, 1) } else { (0, 0) };
    let factors_svg =
        report::export_factors_svg(&model, plane, &fickle_set).map_err(|e| e.at_stage("report"))?;

    std::fs::create_dir_all(&cfg.out_dir).map_err(|source| Error::Io {
        path: cfg.out_dir.display().to_string(),
        source,
    })?;
    let dir = cfg.out_dir.as_path();
    let files = vec![
        write_file(dir, "factors.csv", &report::factors_csv(&model))?,
        write_file(dir, "factors.svg", &factors_svg)?,
        write_file(dir, "stability.csv", &matrix.to_csv())?,
        write_file(
            dir,
            "pairs.csv",
            &report::pair_classes_csv(&matrix, &bounds),
        )?,
        write_file(dir, "fickle.json", &fickle_report.to_json())?,
        write_file(dir, "map.txt", &report::export_map_text(&layout))?,
        write_file(dir, "map.json", &report::export_map_json(&layout))?,
        write_file(dir, "graph.dot", &report::export_dot(&graph, &fickle_set))?,
        write_file(dir, "partition.json", &partition.to_json(&graph))?,
        write_file(dir, "fickle_distance.csv", &distance_report.csv)?,
        write_file(dir, "fickle_distance.svg", &distance_report.svg)?,
    ];

    let stats = RunStats {
        rows: normalized.n_rows(),
        cols: normalized.n_cols(),
        factors: model.rank(),
        total_inertia: model.total_inertia(),
        inertia_shares: model.inertia_shares().to_vec(),
        bound_lower: bounds.lower,
        bound_upper: bounds.upper,
        fickle_items: fickle_report.fickle.len(),
        graph_vertices: graph.n_vertices(),
        graph_edges: graph.n_edges(),
        quasi_cliques: partition.parts.len(),
        fickleness_distance_correlation: if distance_report.correlation.is_nan() {
            None
        } else {
            Some(distance_report.correlation)
        },
        correlation_note: distance_report.note.clone(),
    };
    let manifest = Manifest {
        config: cfg.clone(),
        stats,
        files,
    };
    let manifest_json =
        serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail");
    write_file(dir, MANIFEST_NAME, &manifest_json)?;
    Ok(manifest)
}
