//! Random geometric graphs `G_d(n, r)` on the unit cube.
//!
//! Adjacency is never materialised up front: the graph keeps a cell-list
//! index with cells of side at least `r`, so every neighbour of a point sits
//! in the 3^d grid cells around it.

use std::collections::VecDeque;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{dist_sq, within};

#[derive(Debug, Error)]
pub enum RggError {
    #[error("need at least one point")]
    NoPoints,
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("coordinate {value} of point {point} is outside [0, 1]")]
    OutOfCube { point: usize, value: f64 },
    #[error("coordinate buffer of length {len} is not a multiple of d = {d}")]
    Ragged { len: usize, d: usize },
    #[error("radius must be in (0, sqrt(d)], got {0}")]
    BadRadius(f64),
    #[error("probability must be in [0, 1], got {0}")]
    BadProbability(f64),
    #[error("color count {colors} does not match point count {points}")]
    ColorMismatch { colors: usize, points: usize },
    #[error("malformed point csv: {0}")]
    Parse(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, RggError>;

/// `n` points in `[0,1]^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    d: usize,
    coords: Vec<f64>,
    seed: Option<u64>,
}

impl PointSet {
    pub fn new(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(RggError::ZeroDimension);
        }
        if !coords.len().is_multiple_of(d) {
            return Err(RggError::Ragged { len: coords.len(), d });
        }
        if let Some(i) = coords.iter().position(|x| !(0.0..=1.0).contains(x)) {
            return Err(RggError::OutOfCube { point: i / d, value: coords[i] });
        }
        Ok(Self { d, coords, seed: None })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// One row per point: `x0,..,x{d-1},color` (color empty when unknown).
    pub fn write_csv<W: Write>(&self, w: W, colors: Option<&ColorAssignment>) -> Result<()> {
        if let Some(c) = colors {
            if c.len() != self.len() {
                return Err(RggError::ColorMismatch { colors: c.len(), points: self.len() });
            }
        }
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (0..self.d).map(|k| format!("x{k}")).collect();
        header.push("color".into());
        out.write_record(&header)?;
        for (i, p) in self.iter().enumerate() {
            let mut row: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
            row.push(colors.map(|c| c.color(i).as_str().to_string()).unwrap_or_default());
            out.write_record(&row)?;
        }
        out.flush().map_err(|e| RggError::Parse(e.to_string()))?;
        Ok(())
    }

    /// Inverse of [`PointSet::write_csv`]. Colors are returned only if every
    /// row carries one.
    pub fn read_csv<R: Read>(r: R) -> Result<(PointSet, Option<ColorAssignment>)> {
        let mut rdr = csv::Reader::from_reader(r);
        let header = rdr.headers()?.clone();
        let d = header.len().checked_sub(1).filter(|&d| d > 0).ok_or(RggError::ZeroDimension)?;
        let mut coords = Vec::new();
        let mut blue = Vec::new();
        let mut all_colored = true;
        for rec in rdr.records() {
            let rec = rec?;
            for k in 0..d {
                let v: f64 = rec[k].trim().parse().map_err(|_| RggError::Parse(rec[k].to_string()))?;
                coords.push(v);
            }
            match rec[d].trim() {
                "blue" => blue.push(true),
                "red" => blue.push(false),
                "" => all_colored = false,
                other => return Err(RggError::Parse(format!("unknown color {other:?}"))),
            }
        }
        let points = PointSet::new(d, coords)?;
        let colors = (all_colored && blue.len() == points.len()).then_some(ColorAssignment { blue, p_blue: f64::NAN });
        Ok((points, colors))
    }
}

/// `n` i.i.d. uniform points in `[0,1]^d`, reproducible from `seed`.
pub fn sample_points(n: usize, d: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(RggError::NoPoints);
    }
    if d == 0 {
        return Err(RggError::ZeroDimension);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n * d).map(|_| rng.gen::<f64>()).collect();
    Ok(PointSet { d, coords, seed: Some(seed) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn as_str(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Blue => "blue",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorAssignment {
    blue: Vec<bool>,
    p_blue: f64,
}

impl ColorAssignment {
    pub fn from_blue_flags(blue: Vec<bool>, p_blue: f64) -> Self {
        Self { blue, p_blue }
    }

    pub fn len(&self) -> usize {
        self.blue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blue.is_empty()
    }

    #[inline]
    pub fn is_blue(&self, i: usize) -> bool {
        self.blue[i]
    }

    #[inline]
    pub fn is_red(&self, i: usize) -> bool {
        !self.blue[i]
    }

    pub fn color(&self, i: usize) -> Color {
        if self.blue[i] {
            Color::Blue
        } else {
            Color::Red
        }
    }

    pub fn p_blue(&self) -> f64 {
        self.p_blue
    }

    pub fn blue_count(&self) -> usize {
        self.blue.iter().filter(|&&b| b).count()
    }
}

/// Independent Bernoulli(`p_blue`) colors, one draw per point in id order.
pub fn color_points(points: &PointSet, p_blue: f64, seed: u64) -> Result<ColorAssignment> {
    if !(0.0..=1.0).contains(&p_blue) {
        return Err(RggError::BadProbability(p_blue));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blue = (0..points.len()).map(|_| rng.gen::<f64>() < p_blue).collect();
    Ok(ColorAssignment { blue, p_blue })
}

/// Uniform grid over the cube with per-cell point lists in CSR form.
#[derive(Debug, Clone)]
struct CellIndex {
    g: usize,
    start: Vec<usize>,
    ids: Vec<usize>,
}

impl CellIndex {
    fn build(points: &PointSet, r: f64) -> Self {
        let d = points.dim();
        let n = points.len();
        // Cell side 1/g >= r, and never more than ~2n cells overall.
        let by_radius = (1.0 / r).floor().max(1.0);
        let by_count = ((2 * n.max(1)) as f64).powf(1.0 / d as f64).floor().max(1.0);
        let g = by_radius.min(by_count) as usize;
        let cells = g.pow(d as u32);
        let mut cell_of = Vec::with_capacity(n);
        let mut count = vec![0usize; cells + 1];
        for p in points.iter() {
            let c = p.iter().fold(0, |acc, &x| acc * g + axis(x, g));
            cell_of.push(c);
            count[c + 1] += 1;
        }
        for i in 0..cells {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut ids = vec![0; n];
        for (i, &c) in cell_of.iter().enumerate() {
            ids[fill[c]] = i;
            fill[c] += 1;
        }
        Self { g, start: count, ids }
    }

    fn bucket(&self, cell: usize) -> &[usize] {
        &self.ids[self.start[cell]..self.start[cell + 1]]
    }
}

#[inline]
fn axis(x: f64, g: usize) -> usize {
    ((x * g as f64).floor().max(0.0) as usize).min(g - 1)
}

/// `G_d(n, r)`: an edge joins two points iff their distance is at most `r`.
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    points: PointSet,
    r: f64,
    index: CellIndex,
}

impl GeometricGraph {
    pub fn new(points: PointSet, r: f64) -> Result<Self> {
        let d = points.dim() as f64;
        if !(r > 0.0) || r > d.sqrt() * (1.0 + 1e-12) {
            return Err(RggError::BadRadius(r));
        }
        let index = CellIndex::build(&points, r);
        Ok(Self { points, r, index })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_edge(&self, u: usize, v: usize) -> bool {
        u != v && within(self.points.point(u), self.points.point(v), self.r)
    }

    /// Calls `f` for every neighbour of `u`, in no particular order.
    pub fn for_each_neighbor<F: FnMut(usize)>(&self, u: usize, mut f: F) {
        let d = self.points.dim();
        let g = self.index.g;
        let p = self.points.point(u);
        let home: Vec<usize> = p.iter().map(|&x| axis(x, g)).collect();
        let lo: Vec<usize> = home.iter().map(|&c| c.saturating_sub(1)).collect();
        let hi: Vec<usize> = home.iter().map(|&c| (c + 1).min(g - 1)).collect();
        let mut cur = lo.clone();
        loop {
            let cell = cur.iter().fold(0, |acc, &c| acc * g + c);
            for &v in self.index.bucket(cell) {
                if v != u && within(p, self.points.point(v), self.r) {
                    f(v);
                }
            }
            let mut k = d;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                if cur[k] < hi[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
            }
        }
    }

    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_neighbor(u, |v| out.push(v));
        out.sort_unstable();
        out
    }

    /// All edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.len() {
            self.for_each_neighbor(u, |v| {
                if u < v {
                    out.push((u, v));
                }
            });
        }
        out.sort_unstable();
        out
    }

    /// Materialised adjacency lists for traversal-heavy queries.
    pub fn adjacency(&self) -> Adjacency {
        let lists: Vec<Vec<u32>> = (0..self.len())
            .into_par_iter()
            .map(|u| {
                let mut l = Vec::new();
                self.for_each_neighbor(u, |v| l.push(v as u32));
                l.sort_unstable();
                l
            })
            .collect();
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        for l in lists {
            targets.extend_from_slice(&l);
            offsets.push(targets.len());
        }
        Adjacency { offsets, targets }
    }
}

/// CSR adjacency.
#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Adjacency {
    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Eccentricity of `src`, a farthest vertex, and how many vertices were reached.
    pub fn bfs(&self, src: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) -> (u32, usize, usize) {
        dist.fill(u32::MAX);
        queue.clear();
        dist[src] = 0;
        queue.push_back(src);
        let (mut far, mut ecc, mut reached) = (src, 0, 0);
        while let Some(u) = queue.pop_front() {
            reached += 1;
            let du = dist[u];
            if du > ecc {
                ecc = du;
                far = u;
            }
            for &v in self.neighbors(u) {
                let v = v as usize;
                if dist[v] == u32::MAX {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        (ecc, far, reached)
    }
}

/// Hop diameter, exact or a certified lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum HopDiameter {
    Exact(u32),
    LowerBound(u32),
    Infinite,
}

impl HopDiameter {
    /// Whether the diameter is certainly larger than `k`.
    pub fn exceeds(&self, k: u32) -> bool {
        match *self {
            HopDiameter::Exact(v) | HopDiameter::LowerBound(v) => v > k,
            HopDiameter::Infinite => true,
        }
    }

    /// Known lower bound on the value, `None` when infinite.
    pub fn value(&self) -> Option<u32> {
        match *self {
            HopDiameter::Exact(v) | HopDiameter::LowerBound(v) => Some(v),
            HopDiameter::Infinite => None,
        }
    }
}

pub const DEFAULT_EXACT_DIAMETER_CUTOFF: usize = 20_000;
const DOUBLE_SWEEPS: usize = 4;

/// Exact all-source BFS up to `exact_cutoff` vertices, otherwise repeated
/// double sweeps whose best eccentricity is a lower bound.
pub fn hop_diameter(graph: &GeometricGraph, exact_cutoff: usize) -> HopDiameter {
    let n = graph.len();
    if n <= 1 {
        return HopDiameter::Exact(0);
    }
    let adj = graph.adjacency();
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    let (ecc0, far, reached) = adj.bfs(0, &mut dist, &mut queue);
    if reached < n {
        return HopDiameter::Infinite;
    }
    if n <= exact_cutoff {
        let best = (1..n)
            .into_par_iter()
            .map_init(
                || (vec![u32::MAX; n], VecDeque::new()),
                |(dist, queue), u| adj.bfs(u, dist, queue).0,
            )
            .max()
            .unwrap_or(0);
        return HopDiameter::Exact(best.max(ecc0));
    }
    let mut best = ecc0;
    let mut from = far;
    for _ in 0..DOUBLE_SWEEPS {
        let (ecc, next, _) = adj.bfs(from, &mut dist, &mut queue);
        if ecc <= best {
            break;
        }
        best = ecc;
        from = next;
    }
    HopDiameter::LowerBound(best)
}

/// Closed query region inside the cube.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { centre: Vec<f64>, radius: f64 },
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| *a <= *v && *v <= *b),
            Region::Ball { centre, radius } => dist_sq(x, centre) <= radius * radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorFilter {
    Any,
    Only(Color),
}

/// Points inside `region` whose color passes `filter`. A color filter
/// without colors matches nothing.
pub fn count_in_region(points: &PointSet, colors: Option<&ColorAssignment>, region: &Region, filter: ColorFilter) -> usize {
    points
        .iter()
        .enumerate()
        .filter(|(i, p)| {
            let color_ok = match filter {
                ColorFilter::Any => true,
                ColorFilter::Only(c) => colors.is_some_and(|cs| cs.color(*i) == c),
            };
            color_ok && region.contains(p)
        })
        .count()
}
