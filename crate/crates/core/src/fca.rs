//! Factorial correspondence analysis over the normalized table.
//!
//! The normalized table always carries the trivial singular triple
//! `(1, sqrt(row masses), sqrt(col masses))`. It is subtracted
//! analytically before the eigen-solve, which keeps the decomposition
//! well defined even when a non-trivial factor is also at 1 (perfectly
//! diagonal tables). The remaining spectrum comes from a Jacobi
//! eigendecomposition of the smaller cross-product matrix, and row and
//! column principal coordinates share axes so both clouds superpose.

use crate::contingency::NormalizedTable;
use crate::error::{Error, Result};
use crate::jacobi::eigen_symmetric;

const EIGEN_TOL: f64 = 1e-14;
/// Eigenvalues below this are numerical noise: reported as zero and
/// excluded from the factor set and the inertia shares.
const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Kind of an item in the joint row/column cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemKind {
    Word,
    Text,
}

/// Result of the correspondence analysis: non-trivial eigenvalues in
/// descending order and principal coordinates for both clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    eigenvalues: Vec<f64>,
    inertia_shares: Vec<f64>,
    total_inertia: f64,
    /// I x r principal coordinates of the rows.
    row_coords: Vec<Vec<f64>>,
    /// J x r principal coordinates of the columns.
    col_coords: Vec<Vec<f64>>,
    row_masses: Vec<f64>,
    col_masses: Vec<f64>,
}

/// One point of a planar projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanePoint {
    pub label: String,
    pub kind: ItemKind,
    pub x: f64,
    pub y: f64,
}

fn transpose_product(s: &[Vec<f64>]) -> Vec<Vec<f64>> {
    // S^T S for an I x J matrix held row-major.
    let cols = s[0].len();
    let mut k = vec![vec![0.0; cols]; cols];
    for row in s {
        for p in 0..cols {
            if row[p] == 0.0 {
                continue;
            }
            for q in p..cols {
                k[p][q] += row[p] * row[q];
            }
        }
    }
    for p in 0..cols {
        for q in 0..p {
            k[p][q] = k[q][p];
        }
    }
    k
}

fn product_transpose(s: &[Vec<f64>]) -> Vec<Vec<f64>> {
    // S S^T for an I x J matrix held row-major.
    let rows = s.len();
    let mut k = vec![vec![0.0; rows]; rows];
    for p in 0..rows {
        for q in p..rows {
            let dot = s[p].iter().zip(&s[q]).map(|(a, b)| a * b).sum();
            k[p][q] = dot;
            k[q][p] = dot;
        }
    }
    k
}

/// Decomposes a normalized table into its non-trivial factors.
pub fn decompose(n: &NormalizedTable) -> Result<FactorModel> {
    let i_len = n.n_rows();
    let j_len = n.n_cols();
    let total = n.grand_total() as f64;
    let row_masses: Vec<f64> = n.row_sums().iter().map(|&s| s as f64 / total).collect();
    let col_masses: Vec<f64> = n.col_sums().iter().map(|&s| s as f64 / total).collect();
    let trivial_u: Vec<f64> = row_masses.iter().map(|&m| m.sqrt()).collect();
    let trivial_v: Vec<f64> = col_masses.iter().map(|&m| m.sqrt()).collect();

    // Residual after removing the trivial triple.
    let residual: Vec<Vec<f64>> = (0..i_len)
        .map(|i| {
            (0..j_len)
                .map(|j| n.values()[i][j] - trivial_u[i] * trivial_v[j])
                .collect()
        })
        .collect();

    // Eigen-solve the smaller cross-product side, then transfer.
    let (eigenvalues_raw, vectors_raw, small_side_is_cols) = if j_len <= i_len {
        let (vals, vecs) = eigen_symmetric(&transpose_product(&residual), EIGEN_TOL)?;
        (vals, vecs, true)
    } else {
        let (vals, vecs) = eigen_symmetric(&product_transpose(&residual), EIGEN_TOL)?;
        (vals, vecs, false)
    };

    let mut order: Vec<usize> = (0..eigenvalues_raw.len()).collect();
    order.sort_by(|&a, &b| eigenvalues_raw[b].partial_cmp(&eigenvalues_raw[a]).unwrap());
    let max_rank = i_len.min(j_len).saturating_sub(1);
    let retained: Vec<usize> = order
        .into_iter()
        .filter(|&k| eigenvalues_raw[k] > EIGENVALUE_FLOOR)
        .take(max_rank)
        .collect();

    let mut eigenvalues = Vec::with_capacity(retained.len());
    let mut row_coords = vec![Vec::with_capacity(retained.len()); i_len];
    let mut col_coords = vec![Vec::with_capacity(retained.len()); j_len];

    for &k in &retained {
        let lambda = eigenvalues_raw[k];
        let sigma = lambda.sqrt();
        let (u, v): (Vec<f64>, Vec<f64>) = if small_side_is_cols {
            let v = vectors_raw[k].clone();
            let u = residual
                .iter()
                .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / sigma)
                .collect();
            (u, v)
        } else {
            let u = vectors_raw[k].clone();
            let v = (0..j_len)
                .map(|j| (0..i_len).map(|i| residual[i][j] * u[i]).sum::<f64>() / sigma)
                .collect();
            (u, v)
        };

        let mut row_col: Vec<f64> = (0..i_len).map(|i| sigma * u[i] / trivial_u[i]).collect();
        let mut col_col: Vec<f64> = (0..j_len).map(|j| sigma * v[j] / trivial_v[j]).collect();

        // Sign convention: the coordinate of largest absolute value over
        // rows then columns is made positive.
        let mut extreme = 0.0f64;
        for &c in row_col.iter().chain(col_col.iter()) {
            if c.abs() > extreme.abs() {
                extreme = c;
            }
        }
        if extreme < 0.0 {
            for c in row_col.iter_mut().chain(col_col.iter_mut()) {
                *c = -*c;
            }
        }

        eigenvalues.push(lambda);
        for (i, c) in row_col.into_iter().enumerate() {
            row_coords[i].push(c);
        }
        for (j, c) in col_col.into_iter().enumerate() {
            col_coords[j].push(c);
        }
    }

    let total_inertia: f64 = eigenvalues.iter().sum();
    let inertia_shares = if total_inertia > 0.0 {
        eigenvalues.iter().map(|&l| l / total_inertia).collect()
    } else {
        Vec::new()
    };

    Ok(FactorModel {
        row_labels: n.row_labels().to_vec(),
        col_labels: n.col_labels().to_vec(),
        eigenvalues,
        inertia_shares,
        total_inertia,
        row_coords,
        col_coords,
        row_masses,
        col_masses,
    })
}

/// Axis selector for per-item diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudAxis {
    Rows,
    Cols,
}

impl FactorModel {
    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    /// Non-trivial eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn inertia_shares(&self) -> &[f64] {
        &self.inertia_shares
    }

    pub fn total_inertia(&self) -> f64 {
        self.total_inertia
    }

    /// Number of retained factors.
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn row_coords(&self) -> &[Vec<f64>] {
        &self.row_coords
    }

    pub fn col_coords(&self) -> &[Vec<f64>] {
        &self.col_coords
    }

    pub fn row_masses(&self) -> &[f64] {
        &self.row_masses
    }

    pub fn col_masses(&self) -> &[f64] {
        &self.col_masses
    }

    /// Squared Euclidean distance to the origin over all retained factors.
    pub fn center_distances(&self, axis: CloudAxis) -> Vec<f64> {
        let coords = match axis {
            CloudAxis::Rows => &self.row_coords,
            CloudAxis::Cols => &self.col_coords,
        };
        coords
            .iter()
            .map(|cs| cs.iter().map(|c| c * c).sum())
            .collect()
    }

    /// Planar projection: the two requested coordinate columns for rows
    /// and columns jointly.
    pub fn project(&self, axes: (usize, usize)) -> Result<Vec<PlanePoint>> {
        for axis in [axes.0, axes.1] {
            if axis >= self.rank() {
                return Err(Error::AxisOutOfRange {
                    axis,
                    available: self.rank(),
                });
            }
        }
        let mut points = Vec::with_capacity(self.row_labels.len() + self.col_labels.len());
        for (i, label) in self.row_labels.iter().enumerate() {
            points.push(PlanePoint {
                label: label.clone(),
                kind: ItemKind::Word,
                x: self.row_coords[i][axes.0],
                y: self.row_coords[i][axes.1],
            });
        }
        for (j, label) in self.col_labels.iter().enumerate() {
            points.push(PlanePoint {
                label: label.clone(),
                kind: ItemKind::Text,
                x: self.col_coords[j][axes.0],
                y: self.col_coords[j][axes.1],
            });
        }
        Ok(points)
    }

    /// Rebuilds the normalized table from the trivial triple plus the
    /// retained factors. Exposed for verification.
    pub fn reconstruct(&self) -> Vec<Vec<f64>> {
        let i_len = self.row_labels.len();
        let j_len = self.col_labels.len();
        let mut out = vec![vec![0.0; j_len]; i_len];
        for (i, row) in out.iter_mut().enumerate() {
            let su_i = self.row_masses[i].sqrt();
            for (j, cell) in row.iter_mut().enumerate() {
                let sv_j = self.col_masses[j].sqrt();
                let mut value = su_i * sv_j;
                for (k, &lambda) in self.eigenvalues.iter().enumerate() {
                    // sigma * u_ik * v_jk recovered from principal coords.
                    value +=
                        self.row_coords[i][k] * su_i * self.col_coords[j][k] * sv_j / lambda.sqrt();
                }
                *cell = value;
            }
        }
        out
    }
}
