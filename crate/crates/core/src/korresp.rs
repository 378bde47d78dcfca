//! KORRESP: simultaneous self-organizing classification of the rows and
//! columns of a normalized contingency table.
//!
//! Each map unit carries a code-vector of dimension `J + I`: the first
//! `J` components live in the row-profile space (indexed by documents),
//! the last `I` in the column-profile space (indexed by words). Training
//! alternates between drawing a row, extending it with its most probable
//! column and competing on the first `J` components, and drawing a
//! column, extending it with its most probable row and competing on the
//! last `I` components. The winning unit and its Moore neighbors move
//! toward the extended vector by the usual Kohonen law.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::contingency::NormalizedTable;
use crate::error::{Error, Result};

/// Rectangular map grid, units indexed row-major from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct MapGeometry {
    width: usize,
    height: usize,
}

impl MapGeometry {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig {
                reason: format!("map grid must be nonempty, got {width}x{height}"),
            });
        }
        Ok(MapGeometry { width, height })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn unit_count(&self) -> usize {
        self.width * self.height
    }

    /// Grid coordinates (x, y) of a unit index.
    pub fn coords(&self, unit: usize) -> (usize, usize) {
        (unit % self.width, unit / self.width)
    }

    pub fn unit_at(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    /// Chebyshev distance between two units on the grid.
    pub fn chebyshev(&self, a: usize, b: usize) -> usize {
        let (ax, ay) = self.coords(a);
        let (bx, by) = self.coords(b);
        ax.abs_diff(bx).max(ay.abs_diff(by))
    }
}

/// Which slice of a code-vector a distance is restricted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorPart {
    /// The first `J` components (row-profile space).
    FirstJ,
    /// The last `I` components (column-profile space).
    LastI,
}

/// Map code-vectors, dimension `J + I` each.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    geometry: MapGeometry,
    doc_len: usize,
    word_len: usize,
    vectors: Vec<Vec<f64>>,
}

impl Codebook {
    pub fn geometry(&self) -> MapGeometry {
        self.geometry
    }

    /// J: length of the first part.
    pub fn doc_len(&self) -> usize {
        self.doc_len
    }

    /// I: length of the last part.
    pub fn word_len(&self) -> usize {
        self.word_len
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    fn part_range(&self, part: VectorPart) -> std::ops::Range<usize> {
        match part {
            VectorPart::FirstJ => 0..self.doc_len,
            VectorPart::LastI => self.doc_len..self.doc_len + self.word_len,
        }
    }
}

/// Training parameters. The adaptation step decays geometrically from
/// `epsilon_start` to `epsilon_end` over `iterations` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub geometry: MapGeometry,
    pub iterations: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(
        geometry: MapGeometry,
        iterations: usize,
        epsilon_start: f64,
        epsilon_end: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(epsilon_end > 0.0 && epsilon_end <= epsilon_start && epsilon_start <= 1.0) {
            return Err(Error::InvalidConfig {
                reason: format!(
                    "need 0 < epsilon_end <= epsilon_start <= 1, got start={epsilon_start}, end={epsilon_end}"
                ),
            });
        }
        Ok(TrainConfig {
            geometry,
            iterations,
            epsilon_start,
            epsilon_end,
            seed,
        })
    }

    /// Default iteration budget: several visits per item.
    pub fn default_iterations(n_rows: usize, n_cols: usize) -> usize {
        50 * (n_rows + n_cols)
    }

    fn epsilon_at(&self, t: usize) -> f64 {
        if self.iterations <= 1 {
            return self.epsilon_start;
        }
        let progress = t as f64 / (self.iterations - 1) as f64;
        self.epsilon_start * (self.epsilon_end / self.epsilon_start).powf(progress)
    }
}

/// Unit index assigned to every row and every column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub row_units: Vec<usize>,
    pub col_units: Vec<usize>,
}

impl Assignment {
    /// Unit of joint item `p` (rows first, then columns).
    pub fn unit_of_item(&self, p: usize) -> usize {
        if p < self.row_units.len() {
            self.row_units[p]
        } else {
            self.col_units[p - self.row_units.len()]
        }
    }

    pub fn item_count(&self) -> usize {
        self.row_units.len() + self.col_units.len()
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (idx, v) in values.enumerate() {
        if v > best_value {
            best_value = v;
            best = idx;
        }
    }
    best
}

/// Column maximizing the conditional probability of the document given
/// row `i`; ties break toward the smaller index.
pub fn associate_row(n: &NormalizedTable, i: usize) -> usize {
    argmax(n.row(i).iter().copied())
}

/// Row maximizing the conditional probability of the word given column
/// `j`; ties break toward the smaller index.
pub fn associate_col(n: &NormalizedTable, j: usize) -> usize {
    argmax(n.values().iter().map(|row| row[j]))
}

/// Extended input for row `i`: the row profile followed by the profile
/// of its associated column.
pub fn extend_row(n: &NormalizedTable, i: usize) -> Vec<f64> {
    let j = associate_row(n, i);
    let mut v = Vec::with_capacity(n.n_cols() + n.n_rows());
    v.extend_from_slice(n.row(i));
    v.extend(n.column(j));
    v
}

/// Extended input for column `j`: the profile of its associated row
/// followed by the column profile.
pub fn extend_col(n: &NormalizedTable, j: usize) -> Vec<f64> {
    let i = associate_col(n, j);
    let mut v = Vec::with_capacity(n.n_cols() + n.n_rows());
    v.extend_from_slice(n.row(i));
    v.extend(n.column(j));
    v
}

/// Unit whose code-vector is closest to `v` in squared Euclidean
/// distance restricted to `part`; ties break toward the smaller index.
pub fn winner(cb: &Codebook, v: &[f64], part: VectorPart) -> usize {
    let range = cb.part_range(part);
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (u, code) in cb.vectors.iter().enumerate() {
        let mut dist = 0.0;
        for k in range.clone() {
            let d = v[k] - code[k];
            dist += d * d;
        }
        if dist < best_dist {
            best_dist = dist;
            best = u;
        }
    }
    best
}

/// Moore neighborhood function: 1 within Chebyshev distance 1 (the unit
/// itself and its up-to-eight grid neighbors), 0 elsewhere.
pub fn neighborhood_sigma(g: &MapGeometry, u: usize, u0: usize) -> f64 {
    if g.chebyshev(u, u0) <= 1 {
        1.0
    } else {
        0.0
    }
}

fn update_in_place(cb: &mut Codebook, v: &[f64], u0: usize, eps: f64) {
    let g = cb.geometry;
    let (x0, y0) = g.coords(u0);
    let x_lo = x0.saturating_sub(1);
    let x_hi = (x0 + 1).min(g.width() - 1);
    let y_lo = y0.saturating_sub(1);
    let y_hi = (y0 + 1).min(g.height() - 1);
    for y in y_lo..=y_hi {
        for x in x_lo..=x_hi {
            let code = &mut cb.vectors[g.unit_at(x, y)];
            for (c, &target) in code.iter_mut().zip(v) {
                *c += eps * (target - *c);
            }
        }
    }
}

/// One Kohonen update: every unit in the winner's neighborhood moves
/// toward `v` over the full `J + I` vector.
pub fn update_step(cb: &Codebook, v: &[f64], u0: usize, eps: f64) -> Codebook {
    let mut out = cb.clone();
    update_in_place(&mut out, v, u0, eps);
    out
}

fn init_with_rng(n: &NormalizedTable, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Codebook {
    let i_len = n.n_rows();
    let j_len = n.n_cols();
    let units = cfg.geometry.unit_count();
    let mut vectors = Vec::with_capacity(units);
    for _ in 0..units {
        let r1 = rng.random_range(0..i_len);
        let r2 = rng.random_range(0..i_len);
        let a = rng.random::<f64>();
        let c1 = rng.random_range(0..j_len);
        let c2 = rng.random_range(0..j_len);
        let b = rng.random::<f64>();
        let mut v = Vec::with_capacity(j_len + i_len);
        for j in 0..j_len {
            v.push(a * n.values()[r1][j] + (1.0 - a) * n.values()[r2][j]);
        }
        for i in 0..i_len {
            v.push(b * n.values()[i][c1] + (1.0 - b) * n.values()[i][c2]);
        }
        vectors.push(v);
    }
    Codebook {
        geometry: cfg.geometry,
        doc_len: j_len,
        word_len: i_len,
        vectors,
    }
}

/// Seeds each code-vector with a random convex combination of two data
/// rows (first part) and two data columns (last part).
pub fn init_codebook(n: &NormalizedTable, cfg: &TrainConfig) -> Codebook {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    init_with_rng(n, cfg, &mut rng)
}

/// Runs the alternating row/column training loop. Even iterations draw a
/// row, odd iterations draw a column; all randomness comes from
/// `cfg.seed`, so the result is a pure function of its inputs.
pub fn train(n: &NormalizedTable, cfg: &TrainConfig) -> Codebook {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cb = init_with_rng(n, cfg, &mut rng);
    let i_len = n.n_rows();
    let j_len = n.n_cols();
    let row_inputs: Vec<Vec<f64>> = (0..i_len).map(|i| extend_row(n, i)).collect();
    let col_inputs: Vec<Vec<f64>> = (0..j_len).map(|j| extend_col(n, j)).collect();
    for t in 0..cfg.iterations {
        let eps = cfg.epsilon_at(t);
        if t % 2 == 0 {
            let i = rng.random_range(0..i_len);
            let x = &row_inputs[i];
            let u0 = winner(&cb, x, VectorPart::FirstJ);
            update_in_place(&mut cb, x, u0, eps);
        } else {
            let j = rng.random_range(0..j_len);
            let y = &col_inputs[j];
            let u0 = winner(&cb, y, VectorPart::LastI);
            update_in_place(&mut cb, y, u0, eps);
        }
    }
    cb
}

/// Classifies every row on the first part and every column on the last
/// part of the trained codebook.
pub fn assign_all(cb: &Codebook, n: &NormalizedTable) -> Assignment {
    let row_units = (0..n.n_rows())
        .map(|i| winner(cb, &extend_row(n, i), VectorPart::FirstJ))
        .collect();
    let col_units = (0..n.n_cols())
        .map(|j| winner(cb, &extend_col(n, j), VectorPart::LastI))
        .collect();
    Assignment {
        row_units,
        col_units,
    }
}
