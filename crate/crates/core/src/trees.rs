//! Labeled trees and the generators used by the experiments.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("a tree needs at least one vertex")]
    Empty,
    #[error("max degree {0} is too small for this construction")]
    DegreeTooSmall(usize),
    #[error("{n} vertices need {expected} edges, got {got}")]
    EdgeCount { n: usize, expected: usize, got: usize },
    #[error("edge ({0}, {1}) is a loop or uses a vertex out of range")]
    BadEdge(usize, usize),
    #[error("edges do not connect all vertices")]
    Disconnected,
    #[error("Prüfer entry {0} out of range for {1} vertices")]
    BadPrufer(usize, usize),
    #[error("malformed edge csv: {0}")]
    Parse(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, TreeError>;

/// An unrooted tree on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    adj: Vec<Vec<usize>>,
}

impl Tree {
    /// Validates that `edges` form a spanning tree of `0..n`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if edges.len() != n - 1 {
            return Err(TreeError::EdgeCount { n, expected: n - 1, got: edges.len() });
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u == v || u >= n || v >= n {
                return Err(TreeError::BadEdge(u, v));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let tree = Self { adj };
        if tree.distances_from(0).contains(&usize::MAX) {
            return Err(TreeError::Disconnected);
        }
        Ok(tree)
    }

    pub fn single() -> Self {
        Self { adj: vec![Vec::new()] }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<_> = self
            .adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect();
        e.sort_unstable();
        e
    }

    /// BFS distances; `usize::MAX` marks unreachable vertices.
    pub fn distances_from(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.len()];
        let mut q = VecDeque::from([src]);
        dist[src] = 0;
        while let Some(u) = q.pop_front() {
            for &v in &self.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    q.push_back(v);
                }
            }
        }
        dist
    }

    /// Largest distance from `v`.
    pub fn height_from(&self, v: usize) -> usize {
        self.distances_from(v).into_iter().max().unwrap_or(0)
    }

    /// Largest number of vertices at a common distance from `v`.
    pub fn width_from(&self, v: usize) -> usize {
        let dist = self.distances_from(v);
        let mut per_level = vec![0usize; self.len()];
        for d in dist {
            per_level[d] += 1;
        }
        per_level.into_iter().max().unwrap_or(0)
    }

    /// `u,v` edge list with a header row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["u", "v"])?;
        for (u, v) in self.edges() {
            out.write_record([u.to_string(), v.to_string()])?;
        }
        out.flush().map_err(|e| TreeError::Parse(e.to_string()))?;
        Ok(())
    }

    /// Reads an edge list written by [`Tree::write_csv`]; `n` is one more
    /// than the largest vertex id (a lone vertex has an empty list).
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut edges = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |s: &str| s.trim().parse::<usize>().map_err(|_| TreeError::Parse(s.to_string()));
            edges.push((parse(&rec[0])?, parse(&rec[1])?));
        }
        let n = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(1);
        Tree::from_edges(n, &edges)
    }
}

/// The `h` with `sum_{i<h} (delta-1)^i < n <= sum_{i<=h} (delta-1)^i`.
pub fn height_h(n: usize, delta: usize) -> Result<usize> {
    if n == 0 {
        return Err(TreeError::Empty);
    }
    if delta < 3 {
        return Err(TreeError::DegreeTooSmall(delta));
    }
    let b = (delta - 1) as u128;
    let (mut h, mut level, mut upto) = (0usize, 1u128, 1u128);
    while (n as u128) > upto {
        h += 1;
        level *= b;
        upto += level;
    }
    Ok(h)
}

/// Rooted tree with `(delta-1)^i` vertices at depth `i < h` and the rest at
/// depth `h`, filled left to right. Vertex ids follow BFS order from the
/// root `0`, and vertex `v > 0` hangs below `(v - 1) / (delta - 1)`.
pub fn truncated_regular_tree(n: usize, delta: usize) -> Result<Tree> {
    height_h(n, delta)?;
    let edges: Vec<_> = (1..n).map(|v| ((v - 1) / (delta - 1), v)).collect();
    Tree::from_edges(n, &edges)
}

/// Decodes a Prüfer sequence of length `n - 2`.
pub fn prufer_decode(seq: &[usize], n: usize) -> Result<Tree> {
    if n == 0 {
        return Err(TreeError::Empty);
    }
    if n == 1 {
        return Ok(Tree::single());
    }
    if seq.len() != n - 2 {
        return Err(TreeError::EdgeCount { n, expected: n - 1, got: seq.len() + 1 });
    }
    let mut degree = vec![1usize; n];
    for &x in seq {
        if x >= n {
            return Err(TreeError::BadPrufer(x, n));
        }
        degree[x] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &x in seq {
        let Reverse(leaf) = leaves.pop().expect("a leaf always exists");
        edges.push((leaf, x));
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.push(Reverse(x));
        }
    }
    let Reverse(a) = leaves.pop().expect("two leaves remain");
    let Reverse(b) = leaves.pop().expect("two leaves remain");
    edges.push((a, b));
    Tree::from_edges(n, &edges)
}

/// Uniform labeled tree via a uniform Prüfer sequence.
pub fn uniform_random_tree(n: usize, seed: u64) -> Result<Tree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n <= 2 {
        return prufer_decode(&[], n);
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    prufer_decode(&seq, n)
}

/// Each new vertex attaches to a uniformly chosen earlier vertex that still
/// has degree below `delta`. Not uniform over bounded-degree trees.
pub fn random_bounded_degree_tree(n: usize, delta: usize, seed: u64) -> Result<Tree> {
    if n == 0 {
        return Err(TreeError::Empty);
    }
    if delta < 2 && n > 2 {
        return Err(TreeError::DegreeTooSmall(delta));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut degree = vec![0usize; n];
    let mut open = vec![0usize];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    for v in 1..n {
        let slot = rng.gen_range(0..open.len());
        let u = open[slot];
        edges.push((u, v));
        degree[u] += 1;
        degree[v] += 1;
        if degree[u] >= delta {
            open.swap_remove(slot);
        }
        if degree[v] < delta {
            open.push(v);
        }
    }
    Tree::from_edges(n, &edges)
}

pub fn path(n: usize) -> Result<Tree> {
    let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
    Tree::from_edges(n, &edges)
}

pub fn star(leaves: usize) -> Result<Tree> {
    let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
    Tree::from_edges(leaves + 1, &edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeStats {
    pub max_degree: usize,
    pub diameter: usize,
}

/// Max degree and diameter, the latter by a double BFS (exact on trees).
pub fn tree_stats(tree: &Tree) -> TreeStats {
    let first = tree.distances_from(0);
    let (far, _) = first.iter().enumerate().max_by_key(|&(i, &d)| (d, Reverse(i))).unwrap();
    TreeStats { max_degree: tree.max_degree(), diameter: tree.height_from(far) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heights() {
        assert_eq!(height_h(7, 3).unwrap(), 2);
        assert_eq!(height_h(5, 4).unwrap(), 2);
        assert_eq!(height_h(2, 3).unwrap(), 1);
        assert_eq!(height_h(30_000, 3).unwrap(), 14);
        assert!(height_h(10, 2).is_err());
    }

    #[test]
    fn binary_tree_of_seven() {
        let t = truncated_regular_tree(7, 3).unwrap();
        let dist = t.distances_from(0);
        let mut levels = [0; 3];
        for d in dist {
            levels[d] += 1;
        }
        assert_eq!(levels, [1, 2, 4]);
        assert_eq!(tree_stats(&t).diameter, 4);
        assert_eq!(truncated_regular_tree(2, 3).unwrap().edges(), vec![(0, 1)]);
    }

    #[test]
    fn prufer_star() {
        let t = prufer_decode(&[1, 1], 4).unwrap();
        assert_eq!(t.degree(1), 3);
        assert_eq!(t.edges(), vec![(0, 1), (1, 2), (1, 3)]);
    }

    #[test]
    fn bounded_path_when_delta_two() {
        for seed in 0..20 {
            let t = random_bounded_degree_tree(30, 2, seed).unwrap();
            assert!(t.max_degree() <= 2);
            assert_eq!(tree_stats(&t).diameter, 29);
        }
    }

    #[test]
    fn bounded_is_reproducible() {
        let a = random_bounded_degree_tree(5, 3, 42).unwrap();
        assert_eq!(a, random_bounded_degree_tree(5, 3, 42).unwrap());
    }

    #[test]
    fn stats_of_simple_families() {
        let p = path(5).unwrap();
        assert_eq!(tree_stats(&p), TreeStats { max_degree: 2, diameter: 4 });
        let s = star(4).unwrap();
        assert_eq!(tree_stats(&s), TreeStats { max_degree: 4, diameter: 2 });
    }

    #[test]
    fn rejects_non_trees() {
        assert!(matches!(Tree::from_edges(3, &[(0, 1)]), Err(TreeError::EdgeCount { .. })));
        assert!(matches!(Tree::from_edges(4, &[(0, 1), (1, 0), (2, 3)]), Err(TreeError::Disconnected)));
        assert!(matches!(Tree::from_edges(2, &[(1, 1)]), Err(TreeError::BadEdge(1, 1))));
    }

    #[test]
    fn edge_csv_round_trip() {
        let t = uniform_random_tree(25, 3).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = Tree::read_csv(&buf[..]).unwrap();
        assert_eq!(back.edges(), t.edges());
    }
}
