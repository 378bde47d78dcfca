//! Significant-neighborhood graph, exact maximum clique and quasi-clique
//! search, glutton decomposition, and spectral (Bertin) seriation.
//!
//! A quasi-clique here is a vertex set whose induced subgraph misses at
//! most one edge from being complete. The maximum quasi-clique reduces
//! to a quadratic number of maximum-clique problems: any quasi-clique
//! missing the pair `(u, v)` is a clique once that edge is added. The
//! clique solver is an exact branch-and-bound with greedy-coloring
//! bounds; thresholded stability graphs stay small, so exact search is
//! cheap. All tie-breaks pick the lexicographically smallest vertex set,
//! which makes every partition reproducible.

use crate::error::{Error, Result};
use crate::jacobi::eigen_symmetric;
use crate::stability::{CriticalBounds, StabilityMatrix};

/// Undirected graph over labeled vertices with the stability weights
/// kept for export.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    labels: Vec<String>,
    adj: Vec<Vec<bool>>,
    weights: Vec<Vec<f64>>,
}

/// Result of the glutton decomposition: extracted quasi-cliques in
/// extraction order, and the vertices left over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiCliquePartition {
    /// Vertex indices of each extracted quasi-clique, ascending.
    pub parts: Vec<Vec<usize>>,
    /// Vertices in no part, ascending.
    pub remainder: Vec<usize>,
}

impl NeighborGraph {
    /// Builds a graph from an explicit adjacency matrix.
    pub fn from_adjacency(labels: Vec<String>, adj: Vec<Vec<bool>>) -> Result<Self> {
        let n = labels.len();
        if adj.len() != n || adj.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidConfig {
                reason: "adjacency matrix shape does not match the labels".to_string(),
            });
        }
        for p in 0..n {
            if adj[p][p] {
                return Err(Error::InvalidConfig {
                    reason: format!("self-loop on vertex {p}"),
                });
            }
            for q in 0..p {
                if adj[p][q] != adj[q][p] {
                    return Err(Error::InvalidConfig {
                        reason: format!("adjacency not symmetric at ({p},{q})"),
                    });
                }
            }
        }
        let weights = adj
            .iter()
            .map(|row| row.iter().map(|&e| if e { 1.0 } else { 0.0 }).collect())
            .collect();
        Ok(NeighborGraph {
            labels,
            adj,
            weights,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn has_edge(&self, p: usize, q: usize) -> bool {
        self.adj[p][q]
    }

    pub fn weight(&self, p: usize, q: usize) -> f64 {
        self.weights[p][q]
    }

    pub fn n_edges(&self) -> usize {
        let mut count = 0;
        for p in 0..self.n_vertices() {
            for q in (p + 1)..self.n_vertices() {
                if self.adj[p][q] {
                    count += 1;
                }
            }
        }
        count
    }

    /// Edges as index pairs `(p, q)` with `p < q`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for p in 0..self.n_vertices() {
            for q in (p + 1)..self.n_vertices() {
                if self.adj[p][q] {
                    out.push((p, q));
                }
            }
        }
        out
    }

    /// Induced subgraph on `vertices` (ascending original indices).
    fn induced(&self, vertices: &[usize]) -> NeighborGraph {
        let labels = vertices.iter().map(|&v| self.labels[v].clone()).collect();
        let adj = vertices
            .iter()
            .map(|&p| vertices.iter().map(|&q| self.adj[p][q]).collect())
            .collect();
        let weights = vertices
            .iter()
            .map(|&p| vertices.iter().map(|&q| self.weights[p][q]).collect())
            .collect();
        NeighborGraph {
            labels,
            adj,
            weights,
        }
    }
}

/// Thresholds the stability matrix into the graph of significant
/// neighborhood relations: an edge wherever `M > upper`, strictly.
pub fn build_graph(
    m: &StabilityMatrix,
    bounds: &CriticalBounds,
    subset: Option<&[String]>,
) -> Result<NeighborGraph> {
    let indices: Vec<usize> = match subset {
        None => (0..m.n_items()).collect(),
        Some(wanted) => {
            let mut indices = Vec::with_capacity(wanted.len());
            for label in wanted {
                let idx = m.labels().iter().position(|l| l == label).ok_or_else(|| {
                    Error::UnknownLabel {
                        label: label.clone(),
                    }
                })?;
                if indices.contains(&idx) {
                    return Err(Error::InvalidConfig {
                        reason: format!("label {label:?} listed twice in the graph subset"),
                    });
                }
                indices.push(idx);
            }
            indices
        }
    };
    let labels = indices.iter().map(|&p| m.labels()[p].clone()).collect();
    let n = indices.len();
    let mut adj = vec![vec![false; n]; n];
    let mut weights = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            weights[a][b] = m.value(indices[a], indices[b]);
            adj[a][b] = a != b && weights[a][b] > bounds.upper;
        }
    }
    Ok(NeighborGraph {
        labels,
        adj,
        weights,
    })
}

/// True when the induced subgraph misses at most one internal edge.
pub fn is_quasi_clique(g: &NeighborGraph, vertices: &[usize]) -> bool {
    let k = vertices.len() as i64;
    let mut edges = 0i64;
    for (a, &p) in vertices.iter().enumerate() {
        for &q in &vertices[a + 1..] {
            if g.adj[p][q] {
                edges += 1;
            }
        }
    }
    edges >= k * (k - 1) / 2 - 1
}

// --- exact clique search on bit-packed adjacency ---

#[derive(Clone, PartialEq)]
struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn empty(n: usize) -> Self {
        Bits {
            words: vec![0; n.div_ceil(64)],
        }
    }

    fn full(n: usize) -> Self {
        let mut bits = Bits::empty(n);
        for i in 0..n {
            bits.set(i);
        }
        bits
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1u64 << (i % 64);
    }

    fn clear(&mut self, i: usize) {
        self.words[i / 64] &= !(1u64 << (i % 64));
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    fn and_not_assign(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    /// Zeroes every bit below `k`.
    fn clear_below(&mut self, k: usize) {
        let word = k / 64;
        for w in self.words.iter_mut().take(word) {
            *w = 0;
        }
        if word < self.words.len() && k % 64 != 0 {
            self.words[word] &= !((1u64 << (k % 64)) - 1);
        }
    }

    fn first_one(&self) -> Option<usize> {
        for (idx, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(idx * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(idx, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    None
                } else {
                    let bit = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some(idx * 64 + bit)
                }
            })
        })
    }
}

struct BitAdj {
    n: usize,
    neighbors: Vec<Bits>,
}

impl BitAdj {
    fn from_graph(g: &NeighborGraph) -> Self {
        let n = g.n_vertices();
        let neighbors = (0..n)
            .map(|p| {
                let mut bits = Bits::empty(n);
                for q in 0..n {
                    if g.adj[p][q] {
                        bits.set(q);
                    }
                }
                bits
            })
            .collect();
        BitAdj { n, neighbors }
    }

    fn with_edge(&self, u: usize, v: usize) -> BitAdj {
        let mut neighbors = self.neighbors.clone();
        neighbors[u].set(v);
        neighbors[v].set(u);
        BitAdj {
            n: self.n,
            neighbors,
        }
    }
}

/// Greedy coloring of the candidate set; returns `(vertex, color)` pairs
/// with colors ascending from 1. The color of a vertex bounds the size
/// of any clique inside it and the vertices listed before it.
fn color_order(adj: &BitAdj, p: &Bits) -> Vec<(usize, usize)> {
    let mut order = Vec::with_capacity(p.count());
    let mut remaining = p.clone();
    let mut color = 0;
    while !remaining.is_empty() {
        color += 1;
        let mut class_candidates = remaining.clone();
        while let Some(v) = class_candidates.first_one() {
            order.push((v, color));
            remaining.clear(v);
            class_candidates.clear(v);
            class_candidates.and_not_assign(&adj.neighbors[v]);
        }
    }
    order
}

/// Branch-and-bound search. Returns true once `target` (if any) has been
/// reached, which stops the whole search.
fn search(adj: &BitAdj, depth: usize, p: Bits, best: &mut usize, target: Option<usize>) -> bool {
    if p.is_empty() {
        if depth > *best {
            *best = depth;
        }
        return target.is_some_and(|t| *best >= t);
    }
    let order = color_order(adj, &p);
    let mut p = p;
    for &(v, color) in order.iter().rev() {
        if depth + color <= *best {
            return false;
        }
        let np = p.and(&adj.neighbors[v]);
        if search(adj, depth + 1, np, best, target) {
            return true;
        }
        p.clear(v);
    }
    false
}

fn max_clique_size(adj: &BitAdj) -> usize {
    if adj.n == 0 {
        return 0;
    }
    let mut best = 0;
    search(adj, 0, Bits::full(adj.n), &mut best, None);
    best
}

fn has_clique_of_size(adj: &BitAdj, allowed: &Bits, size: usize) -> bool {
    if size == 0 {
        return true;
    }
    if allowed.count() < size {
        return false;
    }
    let mut best = size - 1;
    search(adj, 0, allowed.clone(), &mut best, Some(size))
}

/// The lexicographically smallest clique of exactly `size` vertices.
/// Assumes one exists.
fn lex_smallest_clique_of_size(adj: &BitAdj, size: usize) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(size);
    let mut allowed = Bits::full(adj.n);
    for needed in (1..=size).rev() {
        let picked = allowed.iter_ones().find(|&v| {
            let mut next = allowed.and(&adj.neighbors[v]);
            next.clear_below(v + 1);
            has_clique_of_size(adj, &next, needed - 1)
        });
        let v = picked.expect("a clique of the requested size exists");
        let mut next = allowed.and(&adj.neighbors[v]);
        next.clear_below(v + 1);
        chosen.push(v);
        allowed = next;
    }
    chosen
}

fn max_clique_of(adj: &BitAdj) -> Vec<usize> {
    let size = max_clique_size(adj);
    if size == 0 {
        return Vec::new();
    }
    lex_smallest_clique_of_size(adj, size)
}

/// A maximum clique; among maximum cliques, the lexicographically
/// smallest vertex set.
pub fn max_clique(g: &NeighborGraph) -> Vec<usize> {
    max_clique_of(&BitAdj::from_graph(g))
}

fn prefer(candidate: Vec<usize>, best: &mut Vec<usize>) {
    if candidate.len() > best.len() || (candidate.len() == best.len() && candidate < *best) {
        *best = candidate;
    }
}

/// A maximum quasi-clique, found by solving the clique problem on the
/// graph itself and on every graph obtained by adding one missing edge.
pub fn max_quasi_clique(g: &NeighborGraph) -> Vec<usize> {
    let adj = BitAdj::from_graph(g);
    let mut best = max_clique_of(&adj);
    for u in 0..g.n_vertices() {
        for v in (u + 1)..g.n_vertices() {
            if !g.adj[u][v] {
                prefer(max_clique_of(&adj.with_edge(u, v)), &mut best);
            }
        }
    }
    best
}

/// Repeatedly extracts a maximum quasi-clique of size at least 4 from
/// the remaining induced subgraph. Quasi-cliqueness is judged within the
/// residual graph at extraction time; smaller quasi-cliques are paths or
/// single edges and are left in the remainder.
pub fn glutton_decomposition(g: &NeighborGraph) -> QuasiCliquePartition {
    let mut remaining: Vec<usize> = (0..g.n_vertices()).collect();
    let mut parts = Vec::new();
    loop {
        if remaining.len() < 4 {
            break;
        }
        let sub = g.induced(&remaining);
        let local = max_quasi_clique(&sub);
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

impl QuasiCliquePartition {
    /// JSON form `{parts: [[labels]], remainder: [labels]}`.
    pub fn to_json(&self, g: &NeighborGraph) -> String {
        #[derive(serde::Serialize)]
        struct Repr {
            parts: Vec<Vec<String>>,
            remainder: Vec<String>,
        }
        let repr = Repr {
            parts: self
                .parts
                .iter()
                .map(|part| part.iter().map(|&v| g.labels()[v].clone()).collect())
                .collect(),
            remainder: self
                .remainder
                .iter()
                .map(|&v| g.labels()[v].clone())
                .collect(),
        };
        serde_json::to_string_pretty(&repr).expect("partition serialization cannot fail")
    }
}

/// Orders the items of a symmetric nonnegative matrix so that strongly
/// connected blocks become contiguous: connected components first (by
/// their smallest label), then the Fiedler-vector order within each
/// component, ties by label. Returns the permutation as original indices
/// in display order.
pub fn bertin_seriation(labels: &[String], values: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = labels.len();
    if values.len() != n || values.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidConfig {
            reason: "seriation needs a square matrix matching the labels".to_string(),
        });
    }
    for p in 0..n {
        for q in 0..p {
            if (values[p][q] - values[q][p]).abs() > 1e-9 {
                return Err(Error::InvalidConfig {
                    reason: format!("seriation matrix not symmetric at ({p},{q})"),
                });
            }
        }
    }
    if n <= 1 {
        return Ok((0..n).collect());
    }

    // Connected components over positive off-diagonal weights.
    let mut component = vec![usize::MAX; n];
    let mut n_components = 0;
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = n_components;
        n_components += 1;
        let mut stack = vec![start];
        component[start] = id;
        while let Some(p) = stack.pop() {
            for q in 0..n {
                if q != p && component[q] == usize::MAX && values[p][q] > 0.0 {
                    component[q] = id;
                    stack.push(q);
                }
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_components];
    for (v, &c) in component.iter().enumerate() {
        groups[c].push(v);
    }
    groups.sort_by(|a, b| {
        let la = a.iter().map(|&v| &labels[v]).min().unwrap();
        let lb = b.iter().map(|&v| &labels[v]).min().unwrap();
        la.cmp(lb)
    });

    let mut permutation = Vec::with_capacity(n);
    for group in groups {
        if group.len() <= 2 {
            let mut g = group;
            g.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
            permutation.extend(g);
            continue;
        }
        // Laplacian of the induced weighted subgraph.
        let k = group.len();
        let mut lap = vec![vec![0.0; k]; k];
        for a in 0..k {
            let mut degree = 0.0;
            for b in 0..k {
                if a != b {
                    let w = values[group[a]][group[b]];
                    lap[a][b] = -w;
                    degree += w;
                }
            }
            lap[a][a] = degree;
        }
        let scale: f64 = lap
            .iter()
            .flatten()
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
            .max(1.0);
        let (eigenvalues, eigenvectors) = eigen_symmetric(&lap, 1e-12 * scale)?;
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eigenvalues[a].partial_cmp(&eigenvalues[b]).unwrap());
        let mut fiedler = eigenvectors[order[1]].clone();
        let mut extreme = 0.0f64;
        for &c in &fiedler {
            if c.abs() > extreme.abs() {
                extreme = c;
            }
        }
        if extreme < 0.0 {
            for c in fiedler.iter_mut() {
                *c = -*c;
            }
        }
        let mut local: Vec<usize> = (0..k).collect();
        local.sort_by(|&a, &b| {
            fiedler[a]
                .partial_cmp(&fiedler[b])
                .unwrap()
                .then_with(|| labels[group[a]].cmp(&labels[group[b]]))
        });
        permutation.extend(local.into_iter().map(|a| group[a]));
    }
    Ok(permutation)
}
