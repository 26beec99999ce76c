//! Splitting a bounded-degree tree into connected parts of comparable weight.
//!
//! With `m0 = m / (delta + 1)`, every vertex weight in `(0, m0]` and total
//! weight at least `m0`, [`split_tree`] returns parts whose weights all lie
//! in `[m0, m]`. A part heavier than `m` is cut at the edge joining its
//! weighted centroid `v` to the heaviest component of `T - v`; both sides
//! then weigh at least `m0` and the procedure recurses on them.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::trees::Tree;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("vertex {vertex} has weight {weight}, outside (0, m0 = {m0}]")]
    WeightOutOfRange { vertex: usize, weight: f64, m0: f64 },
    #[error("total weight {total} is below m0 = {m0}")]
    TotalTooSmall { total: f64, m0: f64 },
    #[error("vertex {vertex} has degree {degree} > delta = {delta}")]
    DegreeExceeded { vertex: usize, degree: usize, delta: usize },
    #[error("part size m must be positive and finite, got {0}")]
    BadPartSize(f64),
    #[error("delta must be at least 1")]
    ZeroDelta,
}

pub type Result<T> = std::result::Result<T, DecomposeError>;

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    /// Vertex sets, each inducing a subtree.
    pub parts: Vec<Vec<usize>>,
    /// Index into `parts` for every vertex.
    pub part_of: Vec<usize>,
    /// Tree edges joining different parts, as `(min, max)`.
    pub cut_edges: Vec<(usize, usize)>,
    /// Endpoints of cut edges, sorted.
    pub anchors: Vec<usize>,
    /// Distance to the nearest anchor inside the vertex's part.
    pub levels: Vec<usize>,
    /// Per part, vertices in multi-source BFS order from its anchors.
    pub orders: Vec<Vec<usize>>,
}

impl Decomposition {
    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn is_anchor(&self, v: usize) -> bool {
        self.anchors.binary_search(&v).is_ok()
    }
}

/// Working forest: the tree minus the edges cut so far.
struct Forest {
    adj: Vec<Vec<usize>>,
}

struct Component {
    order: Vec<usize>,
    total: f64,
}

const NONE: usize = usize::MAX;

impl Forest {
    fn cut(&mut self, u: usize, v: usize) {
        self.adj[u].retain(|&x| x != v);
        self.adj[v].retain(|&x| x != u);
    }

    /// DFS preorder of the component of `root` with subtree weights.
    fn component(&self, root: usize, w: &[f64], parent: &mut [usize], sub: &mut [f64]) -> Component {
        let mut order = Vec::new();
        let mut stack = vec![root];
        parent[root] = NONE;
        while let Some(u) = stack.pop() {
            order.push(u);
            for &v in &self.adj[u] {
                if v != parent[u] {
                    parent[v] = u;
                    stack.push(v);
                }
            }
        }
        for &u in order.iter().rev() {
            sub[u] = w[u];
        }
        for &u in order.iter().rev() {
            if parent[u] != NONE {
                let s = sub[u];
                sub[parent[u]] += s;
            }
        }
        let total = sub[root];
        Component { order, total }
    }
}

/// Vertex minimising the heaviest component left after removing it, with
/// that weight. Ties go to the smallest vertex id.
pub fn weighted_centroid(tree: &Tree, w: &[f64]) -> (usize, f64) {
    let forest = Forest { adj: (0..tree.len()).map(|v| tree.neighbors(v).to_vec()).collect() };
    let mut parent = vec![NONE; tree.len()];
    let mut sub = vec![0.0; tree.len()];
    let comp = forest.component(0, w, &mut parent, &mut sub);
    let (v, obj, _) = centroid_of(&forest, &comp, &sub, &parent);
    (v, obj)
}

/// Returns `(centroid, objective, neighbour rooting the heaviest component)`.
fn centroid_of(forest: &Forest, comp: &Component, sub: &[f64], parent: &[usize]) -> (usize, f64, usize) {
    let mut best: Option<(usize, f64, usize)> = None;
    for &v in &comp.order {
        // (weight, root) of the heaviest component of T - v
        let mut heavy: Option<(f64, usize)> = None;
        let mut consider = |wt: f64, root: usize| match heavy {
            Some((hw, hr)) if hw > wt || (hw == wt && hr < root) => {}
            _ => heavy = Some((wt, root)),
        };
        for &c in &forest.adj[v] {
            if c == parent[v] {
                consider(comp.total - sub[v], c);
            } else {
                consider(sub[c], c);
            }
        }
        let (obj, root) = heavy.unwrap_or((0.0, NONE));
        match best {
            Some((bv, bo, _)) if bo < obj || (bo == obj && bv < v) => {}
            _ => best = Some((v, obj, root)),
        }
    }
    best.expect("component is never empty")
}

/// Splits `tree` into parts of weight in `[m/(delta+1), m]`.
pub fn split_tree(tree: &Tree, w: &[f64], m: f64, delta: usize) -> Result<Decomposition> {
    let n = tree.len();
    if w.len() != n {
        return Err(DecomposeError::WeightCount { expected: n, got: w.len() });
    }
    if !(m > 0.0) || !m.is_finite() {
        return Err(DecomposeError::BadPartSize(m));
    }
    if delta == 0 {
        return Err(DecomposeError::ZeroDelta);
    }
    let m0 = m / (delta as f64 + 1.0);
    for (v, &wv) in w.iter().enumerate() {
        if tree.degree(v) > delta {
            return Err(DecomposeError::DegreeExceeded { vertex: v, degree: tree.degree(v), delta });
        }
        if !(wv > 0.0 && wv <= m0) {
            return Err(DecomposeError::WeightOutOfRange { vertex: v, weight: wv, m0 });
        }
    }
    let total: f64 = w.iter().sum();
    if total < m0 {
        return Err(DecomposeError::TotalTooSmall { total, m0 });
    }

    let mut forest = Forest { adj: (0..n).map(|v| tree.neighbors(v).to_vec()).collect() };
    let mut parent = vec![NONE; n];
    let mut sub = vec![0.0; n];
    let mut parts = Vec::new();
    let mut cut_edges = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(root) = queue.pop_front() {
        let comp = forest.component(root, w, &mut parent, &mut sub);
        if comp.total <= m {
            let mut part = comp.order;
            part.sort_unstable();
            parts.push(part);
            continue;
        }
        let (v, _, u) = centroid_of(&forest, &comp, &sub, &parent);
        forest.cut(u, v);
        cut_edges.push((u.min(v), u.max(v)));
        queue.push_back(u);
        queue.push_back(v);
    }

    let mut part_of = vec![0; n];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            part_of[v] = i;
        }
    }
    let mut anchors: Vec<usize> = cut_edges.iter().flat_map(|&(a, b)| [a, b]).collect();
    anchors.sort_unstable();
    anchors.dedup();
    cut_edges.sort_unstable();
    let mut dec = Decomposition { parts, part_of, cut_edges, anchors, levels: Vec::new(), orders: Vec::new() };
    let (levels, orders) = compute_levels(&dec, tree);
    dec.levels = levels;
    dec.orders = orders;
    Ok(dec)
}

/// Per-vertex levels (multi-source BFS from each part's anchors, staying in
/// the part) and the BFS order of every part. Parts without anchors get
/// level 0 everywhere and ascending id order.
pub fn compute_levels(dec: &Decomposition, tree: &Tree) -> (Vec<usize>, Vec<Vec<usize>>) {
    let n = tree.len();
    let mut levels = vec![usize::MAX; n];
    let mut orders = Vec::with_capacity(dec.parts.len());
    let mut part_anchors: Vec<Vec<usize>> = vec![Vec::new(); dec.parts.len()];
    for &a in &dec.anchors {
        part_anchors[dec.part_of[a]].push(a);
    }
    for (i, part) in dec.parts.iter().enumerate() {
        if part_anchors[i].is_empty() {
            for &v in part {
                levels[v] = 0;
            }
            orders.push(part.clone());
            continue;
        }
        let mut order = Vec::with_capacity(part.len());
        let mut q: VecDeque<usize> = part_anchors[i].iter().copied().collect();
        for &a in &part_anchors[i] {
            levels[a] = 0;
        }
        while let Some(u) = q.pop_front() {
            order.push(u);
            for &v in tree.neighbors(u) {
                if dec.part_of[v] == i && levels[v] == usize::MAX {
                    levels[v] = levels[u] + 1;
                    q.push_back(v);
                }
            }
        }
        orders.push(order);
    }
    (levels, orders)
}
