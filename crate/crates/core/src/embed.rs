//! The two-step embedding of a bounded-degree spanning tree into `G_d(n, r)`.
//!
//! The tree is split into parts of at most `m` vertices. Parts are embedded
//! one at a time. Each part targets the earliest cell, in the tessellation
//! ordering, that still has a free point:
//!
//! * if that is the central cell, the whole part goes there;
//! * otherwise level `j <= eta` vertices take red points of transit ball
//!   `B_j` (step 1), and deeper vertices take free points of the target cell,
//!   then blue points of its adjacent successor (step 2).
//!
//! Running out of points is reported as a [`FailureInfo`], not an error.
//! Vertices are handled in BFS order from the anchors and points are taken
//! in ascending id order, so runs are reproducible.

use std::io::Write;

use serde::Serialize;
use thiserror::Error;

use crate::decompose::{split_tree, DecomposeError};
use crate::geometry::{within, BallAtlas, Tessellation};
use crate::rgg::{ColorAssignment, GeometricGraph, PointSet};
use crate::trees::Tree;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("tree has {vertices} vertices but the graph has {points} points")]
    SizeMismatch { vertices: usize, points: usize },
    #[error("{colors} colors for {points} points")]
    ColorMismatch { colors: usize, points: usize },
    #[error("tessellation is {tess}-dimensional, points are {points}-dimensional")]
    DimensionMismatch { tess: usize, points: usize },
    #[error("greedy line embedding needs d = 1, got d = {0}")]
    NotOneDimensional(usize),
    #[error("no transit balls for cell {0}")]
    MissingBalls(usize),
    #[error("tree decomposition precondition: {0}")]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, EmbedError>;

/// Point ids of every tessellation cell, ascending.
#[derive(Debug, Clone)]
pub struct CellPoints {
    start: Vec<usize>,
    ids: Vec<usize>,
}

impl CellPoints {
    pub fn build(points: &PointSet, tess: &Tessellation) -> Self {
        let cells = tess.cell_count();
        let cell_of: Vec<usize> = points.iter().map(|p| tess.cell_of_point(p)).collect();
        let mut start = vec![0usize; cells + 1];
        for &c in &cell_of {
            start[c + 1] += 1;
        }
        for i in 0..cells {
            start[i + 1] += start[i];
        }
        let mut fill = start.clone();
        let mut ids = vec![0; cell_of.len()];
        for (i, &c) in cell_of.iter().enumerate() {
            ids[fill[c]] = i;
            fill[c] += 1;
        }
        Self { start, ids }
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.ids[self.start[c]..self.start[c + 1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BallWitness {
    pub target: usize,
    pub j: usize,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CellWitness {
    pub cell: usize,
    pub count: usize,
}

/// Red-point counts in transit balls and blue-point counts in cells against
/// the thresholds the analysis conditions on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventAReport {
    pub a1_ok: bool,
    /// `d^{-d/2} (eps / (2^d 10 s))^d n / 4`
    pub a1_threshold: f64,
    pub min_red_in_ball: Option<usize>,
    pub a1_witness: Option<BallWitness>,
    pub a2_ok: bool,
    /// `(3/8) s^{-d} n`
    pub a2_threshold: f64,
    pub min_blue_in_cell: Option<usize>,
    pub a2_witness: Option<CellWitness>,
}

impl EventAReport {
    pub fn holds(&self) -> bool {
        self.a1_ok && self.a2_ok
    }
}

fn red_in_ball(points: &PointSet, colors: &ColorAssignment, cells: &CellPoints, ball: &crate::geometry::Ball) -> usize {
    cells
        .cell(ball.cell)
        .iter()
        .filter(|&&p| colors.is_red(p) && ball.contains(points.point(p)))
        .count()
}

/// Checks every ball `B_{j,i}` with `1 <= j <= eta` over non-central targets
/// `i`, and every cell. Witnesses are the first violations in cell order.
/// An empty point set fails both properties.
pub fn check_event_a(graph: &GeometricGraph, colors: &ColorAssignment, tess: &Tessellation, atlas: &BallAtlas) -> EventAReport {
    let points = graph.points();
    let n = points.len() as f64;
    let d = tess.dim() as f64;
    let s = tess.side_count() as f64;
    let a1_threshold = d.powf(-d / 2.0) * (atlas.epsilon / (2f64.powf(d) * 10.0 * s)).powf(d) * n / 4.0;
    let a2_threshold = 3.0 / 8.0 * s.powf(-d) * n;
    let cells = CellPoints::build(points, tess);
    let empty = points.is_empty();

    let mut min_red = None::<usize>;
    let mut a1_witness = None;
    for &target in tess.ordering() {
        let Some(tb) = atlas.for_target(target) else { continue };
        for (j, ball) in tb.balls.iter().enumerate().skip(1) {
            let count = red_in_ball(points, colors, &cells, ball);
            min_red = Some(min_red.map_or(count, |m| m.min(count)));
            if a1_witness.is_none() && (empty || (count as f64) < a1_threshold) {
                a1_witness = Some(BallWitness { target, j, count });
            }
        }
    }

    let mut min_blue = None::<usize>;
    let mut a2_witness = None;
    for &cell in tess.ordering() {
        let count = cells.cell(cell).iter().filter(|&&p| colors.is_blue(p)).count();
        min_blue = Some(min_blue.map_or(count, |m| m.min(count)));
        if a2_witness.is_none() && (empty || (count as f64) < a2_threshold) {
            a2_witness = Some(CellWitness { cell, count });
        }
    }

    EventAReport {
        a1_ok: a1_witness.is_none() && !empty,
        a1_threshold,
        min_red_in_ball: min_red,
        a1_witness,
        a2_ok: a2_witness.is_none() && !empty,
        a2_threshold,
        min_blue_in_cell: min_blue,
        a2_witness,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    /// Whole part into the central cell.
    Central,
    /// Step 1: levels `0..=eta` into transit balls.
    Transit,
    /// Step 2: deeper levels into the target cell and its successor.
    Fill,
    /// Greedy line embedding.
    Greedy,
}

impl Step {
    pub fn as_str(self) -> &'static str {
        match self {
            Step::Central => "central",
            Step::Transit => "step1",
            Step::Fill => "step2",
            Step::Greedy => "greedy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Resource {
    Ball { target: usize, j: usize },
    Cell { cell: usize },
    TargetAndSuccessor { target: usize, successor: usize },
    Neighbourhood { point: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureInfo {
    /// 1-based part index (or BFS position for the greedy embedder).
    pub iteration: usize,
    pub step: Step,
    pub resource: Resource,
    pub demanded: usize,
    pub available: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbedDiagnostics {
    pub k: usize,
    pub anchors: usize,
    pub m: f64,
    /// Ordering position of the target cell of every processed part.
    pub target_positions: Vec<usize>,
    /// `n / m0`; equals `8 d (delta + 1) s^d` when `m = s^-d n / (8 d)`.
    pub part_bound: f64,
    pub part_bound_ok: bool,
    /// Largest number of step-2 vertices placed on blue points of one cell.
    pub max_successor_overflow: usize,
    /// `2 d m`
    pub overflow_bound: f64,
    pub overflow_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Embedding {
    /// Point of every vertex; complete on success.
    pub map: Vec<Option<usize>>,
    pub failure: Option<FailureInfo>,
    pub diagnostics: Option<EmbedDiagnostics>,
}

impl Embedding {
    pub fn is_success(&self) -> bool {
        self.failure.is_none()
    }

    /// The vertex-to-point map when every vertex is placed.
    pub fn total_map(&self) -> Option<Vec<usize>> {
        self.map.iter().copied().collect()
    }

    pub fn occupied(&self) -> usize {
        self.map.iter().filter(|p| p.is_some()).count()
    }

    /// `vertex,point,x0..x{d-1}` for every placed vertex.
    pub fn write_csv<W: Write>(&self, w: W, points: &PointSet) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["vertex".to_string(), "point".to_string()];
        header.extend((0..points.dim()).map(|k| format!("x{k}")));
        out.write_record(&header)?;
        for (v, p) in self.map.iter().enumerate() {
            if let Some(p) = *p {
                let mut row = vec![v.to_string(), p.to_string()];
                row.extend(points.point(p).iter().map(|x| format!("{x:?}")));
                out.write_record(&row)?;
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Failure and diagnostics as a JSON object.
    pub fn diagnostics_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            success: bool,
            failure: &'a Option<FailureInfo>,
            diagnostics: &'a Option<EmbedDiagnostics>,
        }
        serde_json::to_string(&Report { success: self.is_success(), failure: &self.failure, diagnostics: &self.diagnostics })
            .expect("plain data serialises")
    }
}

/// Free points of one cell, scanned in id order with a cursor that only moves
/// forward (occupancy never decreases).
struct Occupancy {
    taken: Vec<bool>,
    cursor: Vec<usize>,
}

impl Occupancy {
    fn has_free(&mut self, cells: &CellPoints, c: usize) -> bool {
        let list = cells.cell(c);
        while self.cursor[c] < list.len() && self.taken[list[self.cursor[c]]] {
            self.cursor[c] += 1;
        }
        self.cursor[c] < list.len()
    }

    fn free_in<'a>(&'a self, cells: &'a CellPoints, c: usize) -> impl Iterator<Item = usize> + 'a {
        cells.cell(c)[self.cursor[c]..].iter().copied().filter(|&p| !self.taken[p])
    }
}

/// Runs the embedding algorithm with parts of at most `m` vertices.
#[allow(clippy::too_many_arguments)]
pub fn embed_tree(
    tree: &Tree,
    graph: &GeometricGraph,
    colors: &ColorAssignment,
    tess: &Tessellation,
    atlas: &BallAtlas,
    m: f64,
    delta: usize,
) -> Result<Embedding> {
    let points = graph.points();
    let n = tree.len();
    if points.len() != n {
        return Err(EmbedError::SizeMismatch { vertices: n, points: points.len() });
    }
    if colors.len() != n {
        return Err(EmbedError::ColorMismatch { colors: colors.len(), points: n });
    }
    if tess.dim() != points.dim() {
        return Err(EmbedError::DimensionMismatch { tess: tess.dim(), points: points.dim() });
    }
    if n == 1 {
        return Ok(Embedding { map: vec![Some(0)], failure: None, diagnostics: None });
    }

    let dec = split_tree(tree, &vec![1.0; n], m, delta)?;
    let eta = tess.eta();
    let d = tess.dim();
    let m0 = m / (delta as f64 + 1.0);
    let cells = CellPoints::build(points, tess);
    let ordering = tess.ordering();
    let central = tess.central_cell();

    let mut occ = Occupancy { taken: vec![false; n], cursor: vec![0; tess.cell_count()] };
    let mut map: Vec<Option<usize>> = vec![None; n];
    let mut overflow = vec![0usize; tess.cell_count()];
    let mut targets = Vec::with_capacity(dec.k());
    let mut pos = 0usize;
    let mut failure = None;

    let mut place = |v: usize, p: usize, occ: &mut Occupancy| {
        debug_assert!(!occ.taken[p]);
        occ.taken[p] = true;
        map[v] = Some(p);
    };

    'parts: for (t, order) in dec.orders.iter().enumerate() {
        while pos < ordering.len() && !occ.has_free(&cells, ordering[pos]) {
            pos += 1;
        }
        // Points and vertices are equinumerous, so a free point remains.
        let target = ordering[pos];
        targets.push(pos);

        if target == central {
            let free: Vec<usize> = occ.free_in(&cells, central).take(order.len()).collect();
            if free.len() < order.len() {
                failure = Some(FailureInfo {
                    iteration: t + 1,
                    step: Step::Central,
                    resource: Resource::Cell { cell: central },
                    demanded: order.len(),
                    available: free.len(),
                });
                break;
            }
            for (&v, &p) in order.iter().zip(&free) {
                place(v, p, &mut occ);
            }
            continue;
        }

        let balls = atlas.for_target(target).ok_or(EmbedError::MissingBalls(target))?;
        // BFS order lists levels in non-decreasing order.
        let split = order.partition_point(|&v| dec.levels[v] <= eta);
        let (transit, deep) = order.split_at(split);

        let mut rest = transit;
        for (j, ball) in balls.balls.iter().enumerate() {
            let len = rest.partition_point(|&v| dec.levels[v] == j);
            let (layer, tail) = rest.split_at(len);
            rest = tail;
            if layer.is_empty() {
                continue;
            }
            let free: Vec<usize> = cells
                .cell(ball.cell)
                .iter()
                .copied()
                .filter(|&p| !occ.taken[p] && colors.is_red(p) && ball.contains(points.point(p)))
                .collect();
            if free.len() < layer.len() {
                failure = Some(FailureInfo {
                    iteration: t + 1,
                    step: Step::Transit,
                    resource: Resource::Ball { target, j },
                    demanded: layer.len(),
                    available: free.len(),
                });
                break 'parts;
            }
            for (&v, &p) in layer.iter().zip(&free) {
                place(v, p, &mut occ);
            }
        }
        debug_assert!(rest.is_empty());

        if deep.is_empty() {
            continue;
        }
        let succ = tess.successor(target).expect("non-central target");
        let own: Vec<usize> = occ.free_in(&cells, target).take(deep.len()).collect();
        let spill: Vec<usize> = if own.len() < deep.len() {
            occ.free_in(&cells, succ).filter(|&p| colors.is_blue(p)).take(deep.len() - own.len()).collect()
        } else {
            Vec::new()
        };
        if own.len() + spill.len() < deep.len() {
            failure = Some(FailureInfo {
                iteration: t + 1,
                step: Step::Fill,
                resource: Resource::TargetAndSuccessor { target, successor: succ },
                demanded: deep.len(),
                available: own.len() + spill.len(),
            });
            break;
        }
        overflow[succ] += spill.len();
        for (&v, &p) in deep.iter().zip(own.iter().chain(&spill)) {
            place(v, p, &mut occ);
        }
    }

    let part_bound = n as f64 / m0;
    let overflow_bound = 2.0 * d as f64 * m;
    let max_overflow = overflow.iter().copied().max().unwrap_or(0);
    let diagnostics = EmbedDiagnostics {
        k: dec.k(),
        anchors: dec.anchors.len(),
        m,
        target_positions: targets,
        part_bound,
        part_bound_ok: dec.k() as f64 <= part_bound,
        max_successor_overflow: max_overflow,
        overflow_bound,
        overflow_ok: max_overflow as f64 <= overflow_bound,
    };
    Ok(Embedding { map, failure, diagnostics: Some(diagnostics) })
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    #[error("map has {got} entries for {expected} vertices")]
    Length { expected: usize, got: usize },
    #[error("vertex {vertex} is not placed")]
    Unplaced { vertex: usize },
    #[error("vertex {vertex} is mapped to missing point {point}")]
    NoSuchPoint { vertex: usize, point: usize },
    #[error("vertices {first} and {second} share point {point}")]
    Shared { point: usize, first: usize, second: usize },
    #[error("edge ({u}, {v}) spans {distance}, more than r = {r}")]
    LongEdge { u: usize, v: usize, distance: f64, r: f64 },
}

/// Checks that the embedding is total and injective and that every tree edge
/// joins points within distance `r`, by direct distance computation.
pub fn verify_embedding(tree: &Tree, graph: &GeometricGraph, emb: &Embedding) -> std::result::Result<(), Violation> {
    let points = graph.points();
    if emb.map.len() != tree.len() {
        return Err(Violation::Length { expected: tree.len(), got: emb.map.len() });
    }
    let mut owner = vec![usize::MAX; points.len()];
    for (v, p) in emb.map.iter().enumerate() {
        let p = p.ok_or(Violation::Unplaced { vertex: v })?;
        if p >= points.len() {
            return Err(Violation::NoSuchPoint { vertex: v, point: p });
        }
        if owner[p] != usize::MAX {
            return Err(Violation::Shared { point: p, first: owner[p], second: v });
        }
        owner[p] = v;
    }
    let r = graph.radius();
    for (u, v) in tree.edges() {
        let (a, b) = (points.point(emb.map[u].unwrap()), points.point(emb.map[v].unwrap()));
        if !within(a, b, r) {
            let distance = crate::geometry::dist_sq(a, b).sqrt();
            return Err(Violation::LongEdge { u, v, distance, r });
        }
    }
    Ok(())
}

/// Breadth-first from vertex 0, placing each vertex on the left-most free
/// point within `r` of its parent's point. The root takes the left-most point.
pub fn greedy_line_embed(tree: &Tree, graph: &GeometricGraph) -> Result<Embedding> {
    let points = graph.points();
    if points.dim() != 1 {
        return Err(EmbedError::NotOneDimensional(points.dim()));
    }
    let n = tree.len();
    if points.len() != n {
        return Err(EmbedError::SizeMismatch { vertices: n, points: points.len() });
    }
    let r = graph.radius();
    let mut sorted: Vec<usize> = (0..n).collect();
    sorted.sort_by(|&a, &b| points.point(a)[0].total_cmp(&points.point(b)[0]).then(a.cmp(&b)));
    let xs: Vec<f64> = sorted.iter().map(|&p| points.point(p)[0]).collect();

    // next[i]: smallest free sorted index >= i (n when none), path-halved.
    let mut next: Vec<usize> = (0..=n).collect();
    fn find(next: &mut [usize], mut i: usize) -> usize {
        while next[i] != i {
            next[i] = next[next[i]];
            i = next[i];
        }
        i
    }

    let mut map = vec![None; n];
    let mut slot_of = vec![0usize; n];
    map[0] = Some(sorted[0]);
    slot_of[0] = 0;
    next[0] = 1;
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut placed = 1usize;
    while let Some(u) = queue.pop_front() {
        let xu = xs[slot_of[u]];
        let mut children: Vec<usize> = tree.neighbors(u).iter().copied().filter(|&c| !seen[c]).collect();
        children.sort_unstable();
        for c in children {
            seen[c] = true;
            let mut lo = xs.partition_point(|&x| x < xu - r);
            while lo > 0 && within(&[xs[lo - 1]], &[xu], r) {
                lo -= 1;
            }
            let mut i = find(&mut next, lo);
            while i < n && xs[i] < xu && !within(&[xs[i]], &[xu], r) {
                i = find(&mut next, i + 1);
            }
            if i >= n || !within(&[xs[i]], &[xu], r) {
                let failure = FailureInfo {
                    iteration: placed + 1,
                    step: Step::Greedy,
                    resource: Resource::Neighbourhood { point: sorted[slot_of[u]] },
                    demanded: 1,
                    available: 0,
                };
                return Ok(Embedding { map, failure: Some(failure), diagnostics: None });
            }
            next[i] = i + 1;
            slot_of[c] = i;
            map[c] = Some(sorted[i]);
            placed += 1;
            queue.push_back(c);
        }
    }
    Ok(Embedding { map, failure: None, diagnostics: None })
}
