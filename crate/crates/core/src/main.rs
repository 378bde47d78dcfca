//! Command-line interface: ingest, fca, train, stability, graph, run.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error,
//! 4 numeric failure.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use lexistab::cliquegraph::{build_graph, glutton_decomposition};
use lexistab::contingency::{load_long_csv, load_matrix_csv, ContingencyTable, ValidatedTable};
use lexistab::error::{Error, Result};
use lexistab::fca::decompose;
use lexistab::korresp::{assign_all, train, MapGeometry, TrainConfig};
use lexistab::pipeline::{run_pipeline, FickleRule, InputFormat, PipelineConfig};
use lexistab::report;
use lexistab::stability::{
    critical_bounds_with_z, fickle_words, fickleness_counts, robust_map, run_ensemble,
    FickleReport, FickleSelection, StabilityMatrix,
};

#[derive(Parser)]
#[command(
    name = "lexistab",
    version,
    about = "Robust lexicometric analysis of word-by-document count tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Input CSV file.
    #[arg(long)]
    input: PathBuf,
    /// Input layout: matrix or long.
    #[arg(long, default_value = "matrix")]
    format: String,
    /// Keep only the k most frequent words before analysis.
    #[arg(long)]
    top_k: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    /// Map grid as WxH.
    #[arg(long, default_value = "10x10")]
    grid: String,
    /// Training iterations; defaults to 50 * (rows + cols).
    #[arg(long)]
    iterations: Option<usize>,
    /// Initial adaptation step.
    #[arg(long, default_value_t = 0.5)]
    eps_start: f64,
    /// Final adaptation step.
    #[arg(long, default_value_t = 0.01)]
    eps_end: f64,
    /// Base RNG seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct FickleArgs {
    /// Fickle-word threshold on the pair count.
    #[arg(long, conflicts_with = "top_fickle")]
    theta: Option<usize>,
    /// Select the k words with the most fickle pairs (default 30).
    #[arg(long)]
    top_fickle: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Load, filter and validate a table; print corpus statistics.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        /// Also write the validated table as matrix CSV into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Correspondence analysis: factor coordinates and a plane SVG.
    Fca {
        #[command(flatten)]
        input: InputArgs,
        /// Factor plane to draw, e.g. 1,2 (1-based).
        #[arg(long, default_value = "1,2")]
        axes: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// One KORRESP training run; exports the map grid.
    Train {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        train: TrainArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Stability ensemble: neighbor-frequency matrix, pair classes,
    /// fickle report.
    Stability {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        train: TrainArgs,
        /// Number of independent runs L.
        #[arg(long, default_value_t = 40)]
        runs: u32,
        /// Normal quantile of the test band.
        #[arg(long, default_value_t = 1.96)]
        z: f64,
        #[command(flatten)]
        fickle: FickleArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Threshold a stored stability matrix into the significant-
    /// neighborhood graph and its quasi-clique decomposition.
    Graph {
        /// Stability matrix CSV (as written by the stability command).
        #[arg(long)]
        matrix: PathBuf,
        /// Ensemble size the matrix was built with.
        #[arg(long)]
        runs: u32,
        /// Map grid the matrix was built with, as WxH.
        #[arg(long, default_value = "10x10")]
        grid: String,
        /// How many leading items are words (default: all).
        #[arg(long)]
        words: Option<usize>,
        #[arg(long, default_value_t = 1.96)]
        z: f64,
        /// Restrict the graph to the fickle items chosen by this rule.
        #[command(flatten)]
        fickle: FickleArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Full pipeline with a hash manifest.
    Run {
        /// Flat key=value configuration file; CLI flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        eps_start: Option<f64>,
        #[arg(long)]
        eps_end: Option<f64>,
        #[arg(long)]
        runs: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, conflicts_with = "top_fickle")]
        theta: Option<usize>,
        #[arg(long)]
        top_fickle: Option<usize>,
        #[arg(long)]
        z: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_grid(s: &str) -> Result<MapGeometry> {
    let parts: Vec<&str> = s.split('x').collect();
    let bad = || Error::InvalidConfig {
        reason: format!("grid must look like 10x10, got {s:?}"),
    };
    if parts.len() != 2 {
        return Err(bad());
    }
    let width: usize = parts[0].trim().parse().map_err(|_| bad())?;
    let height: usize = parts[1].trim().parse().map_err(|_| bad())?;
    MapGeometry::new(width, height)
}

fn parse_axes(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidConfig {
        reason: format!("axes must look like 1,2 (1-based), got {s:?}"),
    };
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(bad());
    }
    let a: usize = parts[0].trim().parse().map_err(|_| bad())?;
    let b: usize = parts[1].trim().parse().map_err(|_| bad())?;
    if a == 0 || b == 0 {
        return Err(bad());
    }
    Ok((a - 1, b - 1))
}

fn load_table(input: &InputArgs) -> Result<ContingencyTable> {
    let format: InputFormat = input.format.parse()?;
    let table = match format {
        InputFormat::Matrix => load_matrix_csv(&input.input)?,
        InputFormat::Long => load_long_csv(&input.input)?,
    };
    Ok(match input.top_k {
        Some(k) => table.top_k_filter(k),
        None => table,
    })
}

fn load_validated(input: &InputArgs) -> Result<ValidatedTable> {
    load_table(input)?.validate()
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

fn selection_from(fickle: &FickleArgs) -> FickleSelection {
    match (fickle.theta, fickle.top_fickle) {
        (Some(theta), _) => FickleSelection::Threshold(theta),
        (None, Some(k)) => FickleSelection::TopK(k),
        (None, None) => FickleSelection::TopK(30),
    }
}

fn cmd_ingest(input: &InputArgs, out: Option<&Path>) -> Result<()> {
    let validated = load_validated(input)?;
    let stats = validated.table().corpus_stats();
    println!(
        "{} words x {} documents",
        validated.table().n_rows(),
        validated.table().n_cols()
    );
    println!("document          occurrences  distinct  hapax");
    for d in &stats.documents {
        println!(
            "{:<18}{:>11}{:>10}{:>7}",
            d.label, d.occurrences, d.distinct_words, d.hapax
        );
    }
    if let Some(dir) = out {
        write_out(dir, "matrix.csv", &validated.table().to_matrix_csv()?)?;
        write_out(dir, "corpus_stats.csv", &report::corpus_stats_csv(&stats))?;
    }
    Ok(())
}

fn cmd_fca(input: &InputArgs, axes: &str, out: &Path) -> Result<()> {
    let axes = parse_axes(axes)?;
    let normalized = load_validated(input)?.normalize();
    let model = decompose(&normalized)?;
    println!("total inertia {:.6}", model.total_inertia());
    for (k, share) in model.inertia_shares().iter().enumerate() {
        println!("factor {} share {:.2}%", k + 1, 100.0 * share);
    }
    write_out(out, "factors.csv", &report::factors_csv(&model))?;
    let svg = report::export_factors_svg(&model, axes, &BTreeSet::new())?;
    write_out(out, "factors.svg", &svg)
}

fn empty_report(labels: impl Iterator<Item = String>) -> FickleReport {
    FickleReport {
        theta: 0,
        counts: labels.map(|l| (l, 0)).collect(),
        fickle: Vec::new(),
        words_only: true,
    }
}

fn cmd_train(input: &InputArgs, args: &TrainArgs, out: &Path) -> Result<()> {
    let geometry = parse_grid(&args.grid)?;
    let normalized = load_validated(input)?.normalize();
    let iterations = args.iterations.unwrap_or_else(|| {
        TrainConfig::default_iterations(normalized.n_rows(), normalized.n_cols())
    });
    let cfg = TrainConfig::new(
        geometry,
        iterations,
        args.eps_start,
        args.eps_end,
        args.seed,
    )?;
    let codebook = train(&normalized, &cfg);
    let assignment = assign_all(&codebook, &normalized);
    let report_stub = empty_report(
        normalized
            .row_labels()
            .iter()
            .chain(normalized.col_labels())
            .cloned(),
    );
    let layout = robust_map(
        &assignment,
        &report_stub,
        normalized.row_labels(),
        normalized.col_labels(),
        geometry,
    )?;
    write_out(out, "map.txt", &report::export_map_text(&layout))?;
    write_out(out, "map.json", &report::export_map_json(&layout))
}

#[allow(clippy::too_many_arguments)]
fn cmd_stability(
    input: &InputArgs,
    args: &TrainArgs,
    runs: u32,
    z: f64,
    fickle: &FickleArgs,
    out: &Path,
) -> Result<()> {
    let geometry = parse_grid(&args.grid)?;
    let normalized = load_validated(input)?.normalize();
    let iterations = args.iterations.unwrap_or_else(|| {
        TrainConfig::default_iterations(normalized.n_rows(), normalized.n_cols())
    });
    let cfg = TrainConfig::new(
        geometry,
        iterations,
        args.eps_start,
        args.eps_end,
        args.seed,
    )?;
    let bounds = critical_bounds_with_z(geometry.unit_count(), runs, z)?;
    let matrix = run_ensemble(&normalized, &cfg, runs);
    let counts = fickleness_counts(&matrix, &bounds);
    let report_fickle = fickle_words(&matrix, &counts, selection_from(fickle), true);
    println!(
        "bounds [{:.4}, {:.4}], {} fickle items",
        bounds.lower,
        bounds.upper,
        report_fickle.fickle.len()
    );
    write_out(out, "stability.csv", &matrix.to_csv())?;
    write_out(
        out,
        "pairs.csv",
        &report::pair_classes_csv(&matrix, &bounds),
    )?;
    write_out(out, "fickle.json", &report_fickle.to_json())
}

#[allow(clippy::too_many_arguments)]
fn cmd_graph(
    matrix_path: &Path,
    runs: u32,
    grid: &str,
    words: Option<usize>,
    z: f64,
    fickle: &FickleArgs,
    out: &Path,
) -> Result<()> {
    let geometry = parse_grid(grid)?;
    let text = std::fs::read_to_string(matrix_path).map_err(|source| Error::Io {
        path: matrix_path.display().to_string(),
        source,
    })?;
    let matrix = StabilityMatrix::from_csv(&text, runs, geometry, words)?;
    let bounds = critical_bounds_with_z(geometry.unit_count(), runs, z)?;
    // Without an explicit rule the graph covers the whole matrix.
    let (subset, fickle_set): (Option<Vec<String>>, BTreeSet<String>) =
        if fickle.theta.is_none() && fickle.top_fickle.is_none() {
            (None, BTreeSet::new())
        } else {
            let counts = fickleness_counts(&matrix, &bounds);
            let report_fickle = fickle_words(&matrix, &counts, selection_from(fickle), true);
            let set = report_fickle.fickle.iter().cloned().collect();
            (Some(report_fickle.fickle), set)
        };
    let graph = build_graph(&matrix, &bounds, subset.as_deref())?;
    let partition = glutton_decomposition(&graph);
    println!(
        "graph: {} vertices, {} edges, {} quasi-cliques",
        graph.n_vertices(),
        graph.n_edges(),
        partition.parts.len()
    );
    write_out(out, "graph.dot", &report::export_dot(&graph, &fickle_set))?;
    write_out(out, "partition.json", &partition.to_json(&graph))
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::InvalidConfig {
            reason: format!("config line {} is not key=value: {raw:?}", idx + 1),
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn config_parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidConfig {
        reason: format!("config key {key} has invalid value {value:?}"),
    })
}

#[allow(clippy::too_many_arguments)]
fn resolve_run_config(
    config: Option<&Path>,
    input: Option<PathBuf>,
    format: Option<String>,
    top_k: Option<usize>,
    grid: Option<String>,
    iterations: Option<usize>,
    eps_start: Option<f64>,
    eps_end: Option<f64>,
    runs: Option<u32>,
    seed: Option<u64>,
    theta: Option<usize>,
    top_fickle: Option<usize>,
    z: Option<f64>,
    out: Option<PathBuf>,
) -> Result<PipelineConfig> {
    let file = match config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    for key in file.keys() {
        const KNOWN: &[&str] = &[
            "input",
            "format",
            "top_k",
            "grid",
            "iterations",
            "epsilon_start",
            "epsilon_end",
            "runs",
            "seed",
            "theta",
            "top_fickle",
            "z",
            "out",
        ];
        if !KNOWN.contains(&key.as_str()) {
            return Err(Error::InvalidConfig {
                reason: format!("unknown config key {key:?}"),
            });
        }
    }

    let input = input
        .or_else(|| file.get("input").map(PathBuf::from))
        .ok_or_else(|| Error::InvalidConfig {
            reason: "no input file given (flag --input or config key input)".to_string(),
        })?;
    let out_dir = out
        .or_else(|| file.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let format_str = format
        .or_else(|| file.get("format").cloned())
        .unwrap_or_else(|| "matrix".to_string());
    let mut cfg = PipelineConfig::new(input, format_str.parse()?, out_dir);

    if let Some(k) = top_k {
        cfg.top_k = Some(k);
    } else if let Some(v) = file.get("top_k") {
        cfg.top_k = Some(config_parse("top_k", v)?);
    }
    let grid_str = grid.or_else(|| file.get("grid").cloned());
    if let Some(g) = grid_str {
        let geometry = parse_grid(&g)?;
        cfg.grid_width = geometry.width();
        cfg.grid_height = geometry.height();
    }
    if let Some(t) = iterations {
        cfg.iterations = Some(t);
    } else if let Some(v) = file.get("iterations") {
        cfg.iterations = Some(config_parse("iterations", v)?);
    }
    if let Some(e) = eps_start {
        cfg.epsilon_start = e;
    } else if let Some(v) = file.get("epsilon_start") {
        cfg.epsilon_start = config_parse("epsilon_start", v)?;
    }
    if let Some(e) = eps_end {
        cfg.epsilon_end = e;
    } else if let Some(v) = file.get("epsilon_end") {
        cfg.epsilon_end = config_parse("epsilon_end", v)?;
    }
    if let Some(l) = runs {
        cfg.runs = l;
    } else if let Some(v) = file.get("runs") {
        cfg.runs = config_parse("runs", v)?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    } else if let Some(v) = file.get("seed") {
        cfg.seed = config_parse("seed", v)?;
    }
    if let Some(zv) = z {
        cfg.z = zv;
    } else if let Some(v) = file.get("z") {
        cfg.z = config_parse("z", v)?;
    }
    if file.contains_key("theta") && file.contains_key("top_fickle") {
        return Err(Error::InvalidConfig {
            reason: "config sets both theta and top_fickle".to_string(),
        });
    }
    cfg.fickle_rule = match (theta, top_fickle) {
        (Some(t), _) => FickleRule::Theta(t),
        (None, Some(k)) => FickleRule::TopFickle(k),
        (None, None) => {
            if let Some(v) = file.get("theta") {
                FickleRule::Theta(config_parse("theta", v)?)
            } else if let Some(v) = file.get("top_fickle") {
                FickleRule::TopFickle(config_parse("top_fickle", v)?)
            } else {
                FickleRule::TopFickle(30)
            }
        }
    };
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { input, out } => cmd_ingest(&input, out.as_deref()),
        Command::Fca { input, axes, out } => cmd_fca(&input, &axes, &out),
        Command::Train { input, train, out } => cmd_train(&input, &train, &out),
        Command::Stability {
            input,
            train,
            runs,
            z,
            fickle,
            out,
        } => cmd_stability(&input, &train, runs, z, &fickle, &out),
        Command::Graph {
            matrix,
            runs,
            grid,
            words,
            z,
            fickle,
            out,
        } => cmd_graph(&matrix, runs, &grid, words, z, &fickle, &out),
        Command::Run {
            config,
            input,
            format,
            top_k,
            grid,
            iterations,
            eps_start,
            eps_end,
            runs,
            seed,
            theta,
            top_fickle,
            z,
            out,
        } => {
            let cfg = resolve_run_config(
                config.as_deref(),
                input,
                format,
                top_k,
                grid,
                iterations,
                eps_start,
                eps_end,
                runs,
                seed,
                theta,
                top_fickle,
                z,
                out,
            )?;
            let manifest = run_pipeline(&cfg)?;
            println!(
                "pipeline done: {} words x {} texts, {} factors, {} fickle items, \
                 {} quasi-cliques",
                manifest.stats.rows,
                manifest.stats.cols,
                manifest.stats.factors,
                manifest.stats.fickle_items,
                manifest.stats.quasi_cliques
            );
            println!(
                "manifest {}",
                cfg.out_dir
                    .join(lexistab::pipeline::MANIFEST_NAME)
                    .display()
            );
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err}");
        let mut source = std::error::Error::source(&err);
        while let Some(cause) = source {
            eprintln!("  caused by: {cause}");
            source = cause.source();
        }
        std::process::exit(err.exit_code());
    }
}
