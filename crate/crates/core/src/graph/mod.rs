//! Immutable simple undirected graphs with degree caches, vertex bitsets,
//! summary statistics and pairwise edge counting.
//!
//! Adjacency is stored CSR-style as sorted neighbor lists: the spectral and
//! simulation layers need fast neighbor iteration, and dense matrices are only
//! materialized inside the spectral module. Isolated vertices are permitted;
//! only the edgeless graph (mean degree zero) is rejected at construction.

mod generators;
mod io;

pub use generators::{gen_erdos_renyi, gen_erdos_renyi_with_retries, gen_named, gen_random_regular, gen_random_regular_sample, NamedKind, RegularSample};
pub use io::{read_edge_list, read_edge_list_file, write_edge_list, write_edge_list_file};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {index} out of range for {n} vertices")]
    VertexOutOfRange { index: usize, n: usize },
    #[error("graph has no edges; positive mean degree is required")]
    NoEdges,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("generator gave up after {attempts} attempts: {reason}")]
    RetryBudgetExceeded { attempts: u32, reason: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("edge list parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Simple undirected graph on vertices `0..n`, no self-loops, no multi-edges.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    degrees: Vec<u32>,
    total_degree: u64,
}

impl Graph {
    /// Builds a graph from an undirected edge list (each edge listed once,
    /// either orientation). Rejects self-loops, duplicates, out-of-range
    /// endpoints, fewer than two vertices, and edgeless graphs.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewVertices(n));
        }
        if edges.is_empty() {
            return Err(GraphError::NoEdges);
        }
        let mut normalized: Vec<(u32, u32)> = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u as usize >= n {
                return Err(GraphError::VertexOutOfRange { index: u as usize, n });
            }
            if v as usize >= n {
                return Err(GraphError::VertexOutOfRange { index: v as usize, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u as usize));
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        for w in normalized.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge(w[0].0 as usize, w[0].1 as usize));
            }
        }

        let mut degrees = vec![0u32; n];
        for &(u, v) in &normalized {
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degrees[i] as usize;
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0u32; 2 * normalized.len()];
        for &(u, v) in &normalized {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        let total_degree = 2 * normalized.len() as u64;
        Ok(Graph { n, offsets, neighbors, degrees, total_degree })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i] as usize
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Number of undirected edges.
    pub fn edge_total(&self) -> u64 {
        self.total_degree / 2
    }

    /// Sum of all degrees, `N·d̄` (the volume of the full vertex set).
    pub fn total_degree(&self) -> u64 {
        self.total_degree
    }

    pub fn mean_degree(&self) -> f64 {
        self.total_degree as f64 / self.n as f64
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let (a, b) = if self.degree(i) <= self.degree(j) { (i, j) } else { (j, i) };
        self.neighbors(a).binary_search(&(b as u32)).is_ok()
    }

    /// Volume of a set: sum of (whole-graph) degrees over its members.
    pub fn volume(&self, set: &VertexSet) -> u64 {
        assert_eq!(set.n(), self.n, "vertex set does not match graph order");
        set.iter().map(|i| self.degrees[i] as u64).sum()
    }

    /// Neighbor bitmask per vertex; only available for `n <= 64`.
    pub fn adjacency_masks(&self) -> Option<Vec<u64>> {
        if self.n > 64 {
            return None;
        }
        let mut masks = vec![0u64; self.n];
        for i in 0..self.n {
            for &j in self.neighbors(i) {
                masks[i] |= 1u64 << j;
            }
        }
        Some(masks)
    }
}

/// Subset of `[N]` with bitset semantics and a cached popcount.
#[derive(Clone, PartialEq, Eq)]
pub struct VertexSet {
    n: usize,
    words: Vec<u64>,
    len: usize,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet { n, words: vec![0; n.div_ceil(64)], len: 0 }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, indices: I) -> Result<Self, GraphError> {
        let mut s = Self::empty(n);
        for i in indices {
            if i >= n {
                return Err(GraphError::VertexOutOfRange { index: i, n });
            }
            s.insert(i);
        }
        Ok(s)
    }

    /// Interprets the low `n` bits of `mask` as membership (vertex `i` = bit `i`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64);
        let mask = if n == 64 { mask } else { mask & ((1u64 << n) - 1) };
        VertexSet { n, words: vec![mask], len: mask.count_ones() as usize }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.n, "vertex {i} out of range for {}", self.n);
        let w = &mut self.words[i / 64];
        let bit = 1u64 << (i % 64);
        if *w & bit == 0 {
            *w |= bit;
            self.len += 1;
        }
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.n);
        let w = &mut self.words[i / 64];
        let bit = 1u64 << (i % 64);
        if *w & bit != 0 {
            *w &= !bit;
            self.len -= 1;
        }
    }

    pub fn complement(&self) -> Self {
        let mut out = Self::empty(self.n);
        for i in 0..self.n {
            if !self.contains(i) {
                out.insert(i);
            }
        }
        out
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&i| self.contains(i))
    }

    /// Sorted member indices, the canonical serialization of a witness set.
    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl std::fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "VertexSet{:?}", self.indices())
    }
}

/// Summary statistics; `theta` is the fraction of vertices outside a largest
/// connected component, and the two `alpha` fields are lower bounds on the
/// independence number (degree-sum and mean-degree forms).
#[derive(Clone, Debug, Serialize)]
pub struct GraphStats {
    pub n: usize,
    pub mean_degree: f64,
    pub theta: f64,
    pub alpha_lower_caro_wei: f64,
    pub alpha_lower_turan: f64,
    pub is_bipartite: bool,
}

/// Connected components as sorted vertex lists, ordered by ascending size
/// (ties by smallest member).
pub fn connected_components(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = vec![start];
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                let w = w as usize;
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                    queue.push_back(w);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    components.sort_by_key(|c| (c.len(), c[0]));
    components
}

fn bipartite_by_two_coloring(g: &Graph) -> bool {
    let n = g.n();
    let mut color = vec![u8::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if color[start] != u8::MAX {
            continue;
        }
        color[start] = 0;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                let w = w as usize;
                if color[w] == u8::MAX {
                    color[w] = 1 - color[v];
                    queue.push_back(w);
                } else if color[w] == color[v] {
                    return false;
                }
            }
        }
    }
    true
}

/// 2-coloring classes when the graph is bipartite (class of vertex 0's
/// component side first, merged across components).
pub fn bipartition_classes(g: &Graph) -> Option<(VertexSet, VertexSet)> {
    let n = g.n();
    let mut color = vec![u8::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    for start in 0..n {
        if color[start] != u8::MAX {
            continue;
        }
        color[start] = 0;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                let w = w as usize;
                if color[w] == u8::MAX {
                    color[w] = 1 - color[v];
                    queue.push_back(w);
                } else if color[w] == color[v] {
                    return None;
                }
            }
        }
    }
    let mut a = VertexSet::empty(n);
    let mut b = VertexSet::empty(n);
    for i in 0..n {
        if color[i] == 0 {
            a.insert(i);
        } else {
            b.insert(i);
        }
    }
    Some((a, b))
}

pub fn graph_stats(g: &Graph) -> GraphStats {
    let n = g.n();
    let largest = connected_components(g).iter().map(|c| c.len()).max().unwrap_or(0);
    let caro_wei: f64 = (0..n).map(|i| 1.0 / (g.degree(i) as f64 + 1.0)).sum();
    GraphStats {
        n,
        mean_degree: g.mean_degree(),
        theta: 1.0 - largest as f64 / n as f64,
        alpha_lower_caro_wei: caro_wei,
        alpha_lower_turan: n as f64 / (g.mean_degree() + 1.0),
        is_bipartite: bipartite_by_two_coloring(g),
    }
}

/// `e(A,B) = Σ_{i∈A} Σ_{j∈B} a_ij`; edges inside `A∩B` count twice because the
/// sum runs over ordered pairs.
pub fn edge_count(g: &Graph, a: &VertexSet, b: &VertexSet) -> u64 {
    assert_eq!(a.n(), g.n(), "set A does not match graph order");
    assert_eq!(b.n(), g.n(), "set B does not match graph order");
    let mut count = 0u64;
    for i in a.iter() {
        for &j in g.neighbors(i) {
            if b.contains(j as usize) {
                count += 1;
            }
        }
    }
    count
}

/// Greedy min-degree independent set: repeatedly take a vertex of minimum
/// remaining degree (smallest index on ties) and delete its neighborhood.
/// The result always has at least `Σ 1/(d(i)+1)` vertices.
pub fn greedy_independent_set(g: &Graph) -> VertexSet {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut deg: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let mut remaining = n;
    let mut out = VertexSet::empty(n);
    while remaining > 0 {
        let mut best = usize::MAX;
        let mut best_deg = usize::MAX;
        for i in 0..n {
            if alive[i] && deg[i] < best_deg {
                best = i;
                best_deg = deg[i];
            }
        }
        out.insert(best);
        let mut kill = vec![best];
        for &j in g.neighbors(best) {
            if alive[j as usize] {
                kill.push(j as usize);
            }
        }
        for v in kill {
            if alive[v] {
                alive[v] = false;
                remaining -= 1;
                for &w in g.neighbors(v) {
                    if alive[w as usize] {
                        deg[w as usize] -= 1;
                    }
                }
            }
        }
    }
    out
}
