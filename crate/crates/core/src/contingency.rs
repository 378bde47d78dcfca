//! Contingency-table ingestion, validation and normalization.
//!
//! Two input layouts are supported, both plain UTF-8 CSV with a comma
//! separator and no quoting:
//!
//! * matrix layout: first row holds the column labels, the first field of
//!   every following row is the row label, the rest are counts;
//! * long layout: one `word,doc,count` record per line, duplicate
//!   (word, doc) records summed.
//!
//! Normalization divides every count by the geometric mean scale
//! `sqrt(rowsum * colsum)` of its margins, the shared input of both the
//! factorial analysis and the map training.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Axis, Error, Result};

/// Raw counts of words (rows) against documents (columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    counts: Vec<Vec<u64>>,
}

/// A [`ContingencyTable`] certified to have no zero row or column sum,
/// so the normalization denominators are all positive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedTable {
    inner: ContingencyTable,
}

/// Real-valued table `counts[i][j] / sqrt(rowsum_i * colsum_j)` with the
/// margins of the source table carried along.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedTable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    values: Vec<Vec<f64>>,
    row_sums: Vec<u64>,
    col_sums: Vec<u64>,
    grand_total: u64,
}

/// Per-document summary: total occurrences, distinct words, hapax count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentStats {
    pub label: String,
    pub occurrences: u64,
    pub distinct_words: usize,
    pub hapax: usize,
}

/// Per-document statistics for the whole corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    pub documents: Vec<DocumentStats>,
}

fn check_unique(labels: &[String], axis: Axis) -> Result<()> {
    let mut seen = HashMap::new();
    for label in labels {
        if seen.insert(label.as_str(), ()).is_some() {
            return Err(Error::DuplicateLabel {
                axis,
                label: label.clone(),
            });
        }
    }
    Ok(())
}

fn parse_count(field: &str, line: usize) -> Result<u64> {
    let trimmed = field.trim();
    if trimmed.starts_with('-') {
        return Err(Error::NegativeCount {
            line,
            value: trimmed.to_string(),
        });
    }
    trimmed.parse::<u64>().map_err(|_| Error::CsvFormat {
        line,
        reason: format!("expected a nonnegative integer, got {trimmed:?}"),
    })
}

impl ContingencyTable {
    /// Builds a table from parts, checking shape and label uniqueness.
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        counts: Vec<Vec<u64>>,
    ) -> Result<Self> {
        check_unique(&row_labels, Axis::Row)?;
        check_unique(&col_labels, Axis::Col)?;
        if counts.len() != row_labels.len() {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "count matrix has {} rows but {} row labels",
                    counts.len(),
                    row_labels.len()
                ),
            });
        }
        for (i, row) in counts.iter().enumerate() {
            if row.len() != col_labels.len() {
                return Err(Error::RaggedRow {
                    line: i + 2,
                    expected: col_labels.len(),
                    got: row.len(),
                });
            }
        }
        Ok(ContingencyTable {
            row_labels,
            col_labels,
            counts,
        })
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.n_cols()];
        for row in &self.counts {
            for (j, &c) in row.iter().enumerate() {
                sums[j] += c;
            }
        }
        sums
    }

    /// Keeps the `k` rows with the largest total count. Ties break toward
    /// the lexicographically smaller label; the result is ordered by
    /// descending total, then label. Columns are unchanged.
    pub fn top_k_filter(&self, k: usize) -> ContingencyTable {
        let totals = self.row_sums();
        let mut order: Vec<usize> = (0..self.n_rows()).collect();
        order.sort_by(|&a, &b| {
            totals[b]
                .cmp(&totals[a])
                .then_with(|| self.row_labels[a].cmp(&self.row_labels[b]))
        });
        order.truncate(k);
        ContingencyTable {
            row_labels: order.iter().map(|&i| self.row_labels[i].clone()).collect(),
            col_labels: self.col_labels.clone(),
            counts: order.iter().map(|&i| self.counts[i].clone()).collect(),
        }
    }

    /// Certifies that every row and column sum is positive.
    pub fn validate(self) -> Result<ValidatedTable> {
        for (i, sum) in self.row_sums().iter().enumerate() {
            if *sum == 0 {
                return Err(Error::ZeroMarginal {
                    axis: Axis::Row,
                    label: self.row_labels[i].clone(),
                });
            }
        }
        for (j, sum) in self.col_sums().iter().enumerate() {
            if *sum == 0 {
                return Err(Error::ZeroMarginal {
                    axis: Axis::Col,
                    label: self.col_labels[j].clone(),
                });
            }
        }
        Ok(ValidatedTable { inner: self })
    }

    /// Per-column occurrence, distinct-word and hapax counts.
    pub fn corpus_stats(&self) -> CorpusStats {
        let documents = self
            .col_labels
            .iter()
            .enumerate()
            .map(|(j, label)| {
                let mut occurrences = 0u64;
                let mut distinct = 0usize;
                let mut hapax = 0usize;
                for row in &self.counts {
                    let c = row[j];
                    occurrences += c;
                    if c > 0 {
                        distinct += 1;
                    }
                    if c == 1 {
                        hapax += 1;
                    }
                }
                DocumentStats {
                    label: label.clone(),
                    occurrences,
                    distinct_words: distinct,
                    hapax,
                }
            })
            .collect();
        CorpusStats { documents }
    }

    /// Serializes to the matrix CSV layout. Labels that contain the
    /// separator or line breaks are rejected rather than quoted.
    pub fn to_matrix_csv(&self) -> Result<String> {
        let check = |label: &str| -> Result<()> {
            if label.contains(',') || label.contains('\n') || label.contains('\r') {
                return Err(Error::UnwritableLabel {
                    label: label.to_string(),
                    reason: "contains a comma or line break (quoting is not supported)".to_string(),
                });
            }
            Ok(())
        };
        let mut out = String::new();
        out.push_str("word");
        for label in &self.col_labels {
            check(label)?;
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for (i, label) in self.row_labels.iter().enumerate() {
            check(label)?;
            out.push_str(label);
            for &c in &self.counts[i] {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        Ok(out)
    }
}

impl ValidatedTable {
    pub fn table(&self) -> &ContingencyTable {
        &self.inner
    }

    pub fn into_table(self) -> ContingencyTable {
        self.inner
    }

    /// Divides every count by `sqrt(rowsum * colsum)`.
    pub fn normalize(&self) -> NormalizedTable {
        let t = &self.inner;
        let row_sums = t.row_sums();
        let col_sums = t.col_sums();
        let values = t
            .counts
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &c)| c as f64 / ((row_sums[i] as f64) * (col_sums[j] as f64)).sqrt())
                    .collect()
            })
            .collect();
        NormalizedTable {
            row_labels: t.row_labels.clone(),
            col_labels: t.col_labels.clone(),
            values,
            grand_total: row_sums.iter().sum(),
            row_sums,
            col_sums,
        }
    }
}

impl std::ops::Deref for ValidatedTable {
    type Target = ContingencyTable;

    fn deref(&self) -> &ContingencyTable {
        &self.inner
    }
}

impl NormalizedTable {
    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.col_sums
    }

    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parses the matrix CSV layout from a string. Line numbers in errors are
/// 1-based, counting the header.
pub fn parse_matrix_csv(text: &str) -> Result<ContingencyTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::EmptyInput)?;
    let header_fields: Vec<&str> = header.split(',').collect();
    if header_fields.len() < 2 {
        return Err(Error::CsvFormat {
            line: 1,
            reason: "header must name at least one document column".to_string(),
        });
    }
    let col_labels: Vec<String> = header_fields[1..]
        .iter()
        .map(|s| s.trim().to_string())
        .collect();

    let mut row_labels = Vec::new();
    let mut counts = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != col_labels.len() + 1 {
            return Err(Error::RaggedRow {
                line: line_no,
                expected: col_labels.len() + 1,
                got: fields.len(),
            });
        }
        row_labels.push(fields[0].trim().to_string());
        let row: Result<Vec<u64>> = fields[1..]
            .iter()
            .map(|f| parse_count(f, line_no))
            .collect();
        counts.push(row?);
    }
    if row_labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    ContingencyTable::new(row_labels, col_labels, counts)
}

/// Loads the matrix CSV layout from a file.
pub fn load_matrix_csv(path: &Path) -> Result<ContingencyTable> {
    parse_matrix_csv(&read_to_string(path)?)
}

/// Parses `word,doc,count` records. Labels are ordered by first
/// appearance; duplicate (word, doc) records are summed.
pub fn parse_long_csv(text: &str) -> Result<ContingencyTable> {
    let mut row_labels: Vec<String> = Vec::new();
    let mut col_labels: Vec<String> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut cells: HashMap<(usize, usize), u64> = HashMap::new();

    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::CsvFormat {
                line: line_no,
                reason: format!("expected word,doc,count, got {} fields", fields.len()),
            });
        }
        let word = fields[0].trim().to_string();
        let doc = fields[1].trim().to_string();
        let count = parse_count(fields[2], line_no)?;
        let i = *row_index.entry(word.clone()).or_insert_with(|| {
            row_labels.push(word);
            row_labels.len() - 1
        });
        let j = *col_index.entry(doc.clone()).or_insert_with(|| {
            col_labels.push(doc);
            col_labels.len() - 1
        });
        *cells.entry((i, j)).or_insert(0) += count;
    }
    if row_labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = vec![vec![0u64; col_labels.len()]; row_labels.len()];
    for ((i, j), c) in cells {
        counts[i][j] = c;
    }
    ContingencyTable::new(row_labels, col_labels, counts)
}

/// Loads the long CSV layout from a file.
pub fn load_long_csv(path: &Path) -> Result<ContingencyTable> {
    parse_long_csv(&read_to_string(path)?)
}
