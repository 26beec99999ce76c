//! Threshold quantities and the cube tessellation used by the embedder.
//!
//! All logarithms are natural logarithms. The ratio defining the critical
//! radius does not depend on the base, but the slack `epsilon` does.
//!
//! Cells of the tessellation are addressed by a flat index built from their
//! integer grid coordinates `(c_0, .., c_{d-1})` with `c_0` most significant,
//! so ascending flat index is lexicographic order on coordinates.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate degree: delta = {0}, need delta >= 3")]
    DegenerateDegree(usize),
    #[error("n too small: n = {0}, need n >= 3")]
    TooFewPoints(f64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("tessellation infeasible: no odd s >= 3 in [{lo:.4}, {hi:.4}]")]
    TessellationInfeasible { lo: f64, hi: f64 },
    #[error("cells per axis must be odd and at least 3, got {0}")]
    InvalidSide(usize),
    #[error("tessellation with {s}^{d} cells is too large")]
    TooManyCells { s: usize, d: usize },
    #[error("ball construction infeasible at epsilon = {0}; use an epsilon override below 5")]
    BallInfeasible(f64),
    #[error("cell {0} is the central cell and has no adjacent successor")]
    CentralTarget(usize),
    #[error("cell {0} does not exist")]
    NoSuchCell(usize),
    #[error("transit balls {j} and {next} can be {reach:.6} apart, more than r = {r:.6}", next = j + 1)]
    TransitGap { j: usize, reach: f64, r: f64 },
    #[error("transit balls for cell {target}: {violation}")]
    BallPlacement { target: usize, violation: BallViolation },
}

pub type Result<T> = std::result::Result<T, GeometryError>;

/// Squared Euclidean distance.
#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Closed-threshold adjacency predicate shared by the graph and the validator.
#[inline]
pub fn within(a: &[f64], b: &[f64], r: f64) -> bool {
    dist_sq(a, b) <= r * r
}

fn check_inputs(n: f64, d: usize, delta: usize) -> Result<()> {
    if d == 0 {
        return Err(GeometryError::ZeroDimension);
    }
    if delta < 3 {
        return Err(GeometryError::DegenerateDegree(delta));
    }
    if !(n >= 3.0) || !n.is_finite() {
        return Err(GeometryError::TooFewPoints(n));
    }
    Ok(())
}

/// `sqrt(d) ln(delta - 1) / (2 ln n)`.
///
/// `n` is real so that asymptotic values such as `e^100` can be evaluated.
pub fn critical_radius(n: f64, d: usize, delta: usize) -> Result<f64> {
    check_inputs(n, d, delta)?;
    Ok((d as f64).sqrt() * ((delta - 1) as f64).ln() / (2.0 * n.ln()))
}

/// `100 d ln(delta ln n) / ln n`.
pub fn epsilon_param(n: f64, d: usize, delta: usize) -> Result<f64> {
    check_inputs(n, d, delta)?;
    let ln_n = n.ln();
    Ok(100.0 * d as f64 * (delta as f64 * ln_n).ln() / ln_n)
}

/// Threshold quantities for one `(n, d, delta)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdParams {
    pub n: f64,
    pub d: usize,
    pub delta: usize,
    pub r_c: f64,
    pub epsilon: f64,
}

impl ThresholdParams {
    pub fn new(n: f64, d: usize, delta: usize) -> Result<Self> {
        Ok(Self {
            n,
            d,
            delta,
            r_c: critical_radius(n, d, delta)?,
            epsilon: epsilon_param(n, d, delta)?,
        })
    }
}

/// Real range `[s_lo, s_hi]` of admissible cell counts per axis, i.e. the
/// values of `s` with `sqrt(d)/s` in `[(1 + eps/2) r_c / 3, (1 + 2 eps/3) r_c / 2]`.
pub fn side_count_range(r_c: f64, d: usize, epsilon: f64) -> (f64, f64) {
    let root_d = (d as f64).sqrt();
    let lo_len = (1.0 + epsilon / 2.0) * r_c / 3.0;
    let hi_len = (1.0 + 2.0 * epsilon / 3.0) * r_c / 2.0;
    (root_d / hi_len, root_d / lo_len)
}

/// Picks an odd integer `s >= 3` in `[s_lo, s_hi]` whose reciprocal is
/// closest to the midpoint of `[1/s_hi, 1/s_lo]`; ties go to the smaller `s`.
pub fn pick_odd_in_range(s_lo: f64, s_hi: f64) -> Result<usize> {
    let infeasible = GeometryError::TessellationInfeasible { lo: s_lo, hi: s_hi };
    if !(s_lo.is_finite() && s_hi.is_finite()) || s_hi < s_lo {
        return Err(infeasible);
    }
    // Relative slack absorbs rounding on exact endpoints such as 5.000000001.
    let tol = 1e-9 * s_hi.abs().max(1.0);
    let first = ((s_lo - tol).ceil().max(3.0)) as usize;
    let last = (s_hi + tol).floor();
    if last < 3.0 {
        return Err(infeasible);
    }
    let last = last as usize;
    let mid = 0.5 * (1.0 / s_lo + 1.0 / s_hi);
    let mut best: Option<(usize, f64)> = None;
    let start = if first % 2 == 1 { first } else { first + 1 };
    for s in (start..=last).step_by(2) {
        let gap = (1.0 / s as f64 - mid).abs();
        match best {
            Some((_, g)) if g <= gap => {}
            _ => best = Some((s, gap)),
        }
    }
    best.map(|(s, _)| s).ok_or(infeasible)
}

/// Odd `s` for a given radius scale `r_c`.
pub fn choose_odd_s_for(r_c: f64, d: usize, epsilon: f64) -> Result<usize> {
    if d == 0 {
        return Err(GeometryError::ZeroDimension);
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(GeometryError::BadEpsilon(epsilon));
    }
    if !(r_c > 0.0) || !r_c.is_finite() {
        return Err(GeometryError::BadRadius(r_c));
    }
    let (lo, hi) = side_count_range(r_c, d, epsilon);
    pick_odd_in_range(lo, hi)
}

/// Odd `s` using the critical radius of `(n, d, delta)`.
pub fn choose_odd_s(n: f64, d: usize, delta: usize, epsilon_eff: f64) -> Result<usize> {
    let r_c = critical_radius(n, d, delta)?;
    choose_odd_s_for(r_c, d, epsilon_eff)
}

/// Partition of `[0,1]^d` into `s^d` closed cells of side `1/s`.
#[derive(Debug, Clone)]
pub struct Tessellation {
    d: usize,
    s: usize,
    eta: usize,
    central: usize,
    ordering: Vec<usize>,
    position: Vec<usize>,
    successor: Vec<Option<usize>>,
}

impl Tessellation {
    /// Builds the tessellation, its distance ordering and successor map.
    ///
    /// Cells are ordered by non-increasing distance of their centre from the
    /// cube centre, ties by ascending grid coordinates, so the central cell
    /// comes last.
    pub fn new(d: usize, s: usize) -> Result<Self> {
        if d == 0 {
            return Err(GeometryError::ZeroDimension);
        }
        if s < 3 || s.is_multiple_of(2) {
            return Err(GeometryError::InvalidSide(s));
        }
        let cells = s
            .checked_pow(d as u32)
            .filter(|&c| c <= 1 << 26)
            .ok_or(GeometryError::TooManyCells { s, d })?;
        let half = (s - 1) / 2;

        // Squared distance to the centre in units of half a cell, kept integral.
        let mut key = Vec::with_capacity(cells);
        let mut coords = vec![0usize; d];
        for idx in 0..cells {
            decode(idx, s, &mut coords);
            let dist: u64 = coords
                .iter()
                .map(|&c| {
                    let off = 2 * c as i64 - (s as i64 - 1);
                    (off * off) as u64
                })
                .sum();
            key.push(dist);
        }
        let mut ordering: Vec<usize> = (0..cells).collect();
        ordering.sort_by(|&a, &b| key[b].cmp(&key[a]).then(a.cmp(&b)));
        let mut position = vec![0; cells];
        for (pos, &c) in ordering.iter().enumerate() {
            position[c] = pos;
        }

        let central = encode(&vec![half; d], s);
        let mut successor = vec![None; cells];
        for (idx, succ) in successor.iter_mut().enumerate() {
            if idx == central {
                continue;
            }
            decode(idx, s, &mut coords);
            let k = coords.iter().position(|&c| c != half).expect("non-central cell");
            if coords[k] < half {
                coords[k] += 1;
            } else {
                coords[k] -= 1;
            }
            *succ = Some(encode(&coords, s));
        }

        Ok(Self {
            d,
            s,
            eta: s.div_ceil(4),
            central,
            ordering,
            position,
            successor,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Cells per axis.
    pub fn side_count(&self) -> usize {
        self.s
    }

    pub fn cell_side(&self) -> f64 {
        1.0 / self.s as f64
    }

    pub fn cell_count(&self) -> usize {
        self.ordering.len()
    }

    /// Number of transit steps, `ceil(s/4)`.
    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn central_cell(&self) -> usize {
        self.central
    }

    /// Cells from farthest to nearest; the central cell is last.
    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn position(&self, cell: usize) -> usize {
        self.position[cell]
    }

    /// Adjacent successor; `None` only for the central cell.
    pub fn successor(&self, cell: usize) -> Option<usize> {
        self.successor[cell]
    }

    pub fn coords(&self, cell: usize) -> Vec<usize> {
        let mut c = vec![0; self.d];
        decode(cell, self.s, &mut c);
        c
    }

    pub fn index_of(&self, coords: &[usize]) -> usize {
        encode(coords, self.s)
    }

    pub fn centre(&self, cell: usize) -> Vec<f64> {
        let s = self.s as f64;
        self.coords(cell).into_iter().map(|c| (c as f64 + 0.5) / s).collect()
    }

    /// Grid index of a coordinate; the upper boundary maps into the last cell.
    #[inline]
    pub fn axis_index(&self, x: f64) -> usize {
        ((x * self.s as f64).floor().max(0.0) as usize).min(self.s - 1)
    }

    /// Cell containing `x`, with `min(floor(x s), s - 1)` per coordinate.
    pub fn cell_of_point(&self, x: &[f64]) -> usize {
        x.iter().fold(0, |acc, &xi| acc * self.s + self.axis_index(xi))
    }

    /// Lower and upper bound of `cell` along axis `k`.
    pub fn bounds(&self, cell: usize, k: usize) -> (f64, f64) {
        let c = self.coords(cell)[k] as f64;
        let s = self.s as f64;
        (c / s, (c + 1.0) / s)
    }

    /// Whether the closed ball lies inside the closed cell.
    pub fn contains_ball(&self, cell: usize, centre: &[f64], radius: f64) -> bool {
        let s = self.s as f64;
        self.coords(cell).iter().zip(centre).all(|(&c, &x)| {
            let lo = c as f64 / s;
            let hi = (c as f64 + 1.0) / s;
            x - radius >= lo && x + radius <= hi
        })
    }
}

fn decode(mut idx: usize, s: usize, out: &mut [usize]) {
    for k in (0..out.len()).rev() {
        out[k] = idx % s;
        idx /= s;
    }
}

fn encode(coords: &[usize], s: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * s + c)
}

/// One transit ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    pub centre: Vec<f64>,
    pub radius: f64,
    /// Cell containing the ball.
    pub cell: usize,
    /// Whether the centre lies on the segment from the cube centre to the
    /// successor's centre. It does except when no cell meeting the enclosing
    /// ball admits such a placement.
    pub on_segment: bool,
}

impl Ball {
    pub fn contains(&self, x: &[f64]) -> bool {
        within(x, &self.centre, self.radius)
    }
}

/// Relative tolerance on transit-ball radii.
const ENCLOSING_TOL: f64 = 1e-9;

/// Balls `B_0 .. B_eta` routing a subtree from the cube centre to the
/// successor of a target cell.
#[derive(Debug, Clone, Serialize)]
pub struct TransitBalls {
    pub target: usize,
    pub balls: Vec<Ball>,
    /// Radius of the enclosing balls, `epsilon / (10 s)`.
    pub enclosing_radius: f64,
}

/// Constraint violations found by [`TransitBalls::check`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BallViolation {
    #[error("ball {j} is not inside cell {cell}")]
    NotInCell { j: usize, cell: usize },
    #[error("ball {j} lies in cell {cell} which does not come after the target")]
    NotLater { j: usize, cell: usize },
    #[error("first ball is not inside the central cell")]
    FirstNotCentral,
    #[error("last ball is not inside the successor of the target")]
    LastNotSuccessor,
    #[error("ball {j} escapes its enclosing ball")]
    OutsideEnclosing { j: usize },
    #[error("balls {j} and {next} are too far apart", next = j + 1)]
    Gap { j: usize },
    #[error("wrong number of balls: {0}")]
    Count(usize),
}

impl TransitBalls {
    /// Enclosing-ball centre for step `j`.
    pub fn enclosing_centre(tess: &Tessellation, target: usize, j: usize) -> Vec<f64> {
        let succ = tess.successor(target).expect("non-central target");
        let end = tess.centre(succ);
        let eta = tess.eta() as f64;
        let t = j as f64 / eta;
        end.iter().map(|&e| 0.5 + t * (e - 0.5)).collect()
    }

    /// Verifies containment in cells, ordering, endpoints, enclosing balls
    /// and the consecutive-distance property against `r`.
    pub fn check(&self, tess: &Tessellation, r: f64) -> std::result::Result<(), BallViolation> {
        if self.balls.len() != tess.eta() + 1 {
            return Err(BallViolation::Count(self.balls.len()));
        }
        let target_pos = tess.position(self.target);
        for (j, b) in self.balls.iter().enumerate() {
            if !tess.contains_ball(b.cell, &b.centre, b.radius) {
                return Err(BallViolation::NotInCell { j, cell: b.cell });
            }
            if tess.position(b.cell) <= target_pos {
                return Err(BallViolation::NotLater { j, cell: b.cell });
            }
            let z = Self::enclosing_centre(tess, self.target, j);
            if dist_sq(&z, &b.centre).sqrt() + b.radius > self.enclosing_radius * (1.0 + 2.0 * ENCLOSING_TOL) {
                return Err(BallViolation::OutsideEnclosing { j });
            }
        }
        if self.balls[0].cell != tess.central_cell() {
            return Err(BallViolation::FirstNotCentral);
        }
        if Some(self.balls[tess.eta()].cell) != tess.successor(self.target) {
            return Err(BallViolation::LastNotSuccessor);
        }
        for j in 0..tess.eta() {
            let (a, b) = (&self.balls[j], &self.balls[j + 1]);
            if dist_sq(&a.centre, &b.centre).sqrt() + a.radius + b.radius > r {
                return Err(BallViolation::Gap { j });
            }
        }
        Ok(())
    }
}

/// Builds the transit balls for a non-central `target`.
///
/// Ball `j` has radius `2^-d eps/(10 s)` and sits inside the enclosing ball of
/// radius `eps/(10 s)` centred at `c + (j/eta)(c(nu(target)) - c)`, where `c`
/// is the cube centre. Among the cells meeting the enclosing ball, the one
/// whose centre is nearest the enclosing centre (ties by grid coordinates)
/// that can hold the ball with its centre on the segment is used, placing
/// the centre as close to the enclosing centre as possible.
pub fn transit_balls(tess: &Tessellation, target: usize, epsilon: f64, r: f64) -> Result<TransitBalls> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(GeometryError::BadEpsilon(epsilon));
    }
    if epsilon >= 5.0 {
        return Err(GeometryError::BallInfeasible(epsilon));
    }
    if !(r > 0.0) {
        return Err(GeometryError::BadRadius(r));
    }
    if target >= tess.cell_count() {
        return Err(GeometryError::NoSuchCell(target));
    }
    let succ = tess.successor(target).ok_or(GeometryError::CentralTarget(target))?;
    let d = tess.dim();
    let s = tess.side_count() as f64;
    let big = epsilon / (10.0 * s);
    let small = big / 2f64.powi(d as i32);
    // Cell containment keeps a margin so exact checks pass after rounding.
    // In d = 1 a ball on a cell boundary fits only with zero room to spare,
    // so the enclosing constraint gets the same allowance in the other
    // direction.
    let placed = small * (1.0 + ENCLOSING_TOL);
    let slack = big - small + 2.0 * small * ENCLOSING_TOL;

    let start = vec![0.5; d];
    let end = tess.centre(succ);
    let dir: Vec<f64> = end.iter().zip(&start).map(|(e, c)| e - c).collect();
    let len = dist_sq(&end, &start).sqrt();

    let eta = tess.eta();
    let mut balls = Vec::with_capacity(eta + 1);
    for j in 0..=eta {
        let tj = j as f64 / eta as f64;
        let z: Vec<f64> = start.iter().zip(&dir).map(|(c, v)| c + tj * v).collect();
        let candidates = cells_meeting_ball(tess, &z, big);

        let mut chosen = None;
        for &cell in &candidates {
            if let Some(t) = segment_slot(tess, cell, &start, &dir, len, tj, slack, placed) {
                let centre: Vec<f64> = start.iter().zip(&dir).map(|(c, v)| c + t * v).collect();
                chosen = Some(Ball { centre, radius: small, cell, on_segment: true });
                break;
            }
        }
        let ball = match chosen {
            Some(b) => b,
            None => {
                // The enclosing centre lies in candidates[0]; pull it inward by at
                // most `small` per axis, which stays inside the enclosing ball.
                let cell = candidates[0];
                let centre = (0..d)
                    .map(|k| {
                        let (lo, hi) = tess.bounds(cell, k);
                        z[k].clamp(lo + placed, hi - placed)
                    })
                    .collect();
                Ball { centre, radius: small, cell, on_segment: false }
            }
        };
        balls.push(ball);
    }

    for j in 0..eta {
        let reach = dist_sq(&balls[j].centre, &balls[j + 1].centre).sqrt() + 2.0 * small;
        if reach > r {
            return Err(GeometryError::TransitGap { j, reach, r });
        }
    }
    let tb = TransitBalls { target, balls, enclosing_radius: big };
    // Off-segment fallbacks are not covered by the ordering argument.
    tb.check(tess, r).map_err(|violation| GeometryError::BallPlacement { target, violation })?;
    Ok(tb)
}

/// Cells intersecting the closed ball, nearest centre first, ties by index.
fn cells_meeting_ball(tess: &Tessellation, z: &[f64], radius: f64) -> Vec<usize> {
    let d = tess.dim();
    let ranges: Vec<(usize, usize)> = z
        .iter()
        .map(|&x| (tess.axis_index(x - radius), tess.axis_index(x + radius)))
        .collect();
    let mut out = Vec::new();
    let mut cur: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    loop {
        let cell = tess.index_of(&cur);
        let gap: f64 = (0..d)
            .map(|k| {
                let (lo, hi) = tess.bounds(cell, k);
                let g = (lo - z[k]).max(z[k] - hi).max(0.0);
                g * g
            })
            .sum();
        if gap <= radius * radius {
            out.push((dist_sq(&tess.centre(cell), z), cell));
        }
        // odometer over the coordinate box
        let mut k = d;
        loop {
            if k == 0 {
                out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                return out.into_iter().map(|(_, c)| c).collect();
            }
            k -= 1;
            if cur[k] < ranges[k].1 {
                cur[k] += 1;
                break;
            }
            cur[k] = ranges[k].0;
        }
    }
}

/// Segment parameter `t` closest to `tj` such that the ball of radius `rho`
/// around `start + t dir` lies in `cell` and within `slack` of the enclosing
/// centre.
#[allow(clippy::too_many_arguments)]
fn segment_slot(
    tess: &Tessellation,
    cell: usize,
    start: &[f64],
    dir: &[f64],
    len: f64,
    tj: f64,
    slack: f64,
    rho: f64,
) -> Option<f64> {
    if slack < 0.0 {
        return None;
    }
    let (mut lo_t, mut hi_t) = if len > 0.0 {
        ((tj - slack / len).max(0.0), (tj + slack / len).min(1.0))
    } else {
        (tj, tj)
    };
    for k in 0..start.len() {
        let (lo, hi) = tess.bounds(cell, k);
        let (a, b) = (lo + rho, hi - rho);
        if dir[k] == 0.0 {
            if start[k] < a || start[k] > b {
                return None;
            }
            continue;
        }
        let (t1, t2) = ((a - start[k]) / dir[k], (b - start[k]) / dir[k]);
        lo_t = lo_t.max(t1.min(t2));
        hi_t = hi_t.min(t1.max(t2));
    }
    (lo_t <= hi_t).then(|| tj.clamp(lo_t, hi_t))
}

/// Transit balls for every non-central cell.
#[derive(Debug, Clone)]
pub struct BallAtlas {
    pub epsilon: f64,
    pub radius: f64,
    per_cell: Vec<Option<TransitBalls>>,
}

impl BallAtlas {
    pub fn build(tess: &Tessellation, epsilon: f64, r: f64) -> Result<Self> {
        let mut per_cell = Vec::with_capacity(tess.cell_count());
        for cell in 0..tess.cell_count() {
            if cell == tess.central_cell() {
                per_cell.push(None);
            } else {
                per_cell.push(Some(transit_balls(tess, cell, epsilon, r)?));
            }
        }
        let s = tess.side_count() as f64;
        Ok(Self {
            epsilon,
            radius: epsilon / (10.0 * s) / 2f64.powi(tess.dim() as i32),
            per_cell,
        })
    }

    pub fn for_target(&self, cell: usize) -> Option<&TransitBalls> {
        self.per_cell.get(cell).and_then(Option::as_ref)
    }

    pub fn iter(&self) -> impl Iterator<Item = &TransitBalls> {
        self.per_cell.iter().flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_radius_values() {
        let n = 10f64.exp();
        let rc = critical_radius(n, 1, 3).unwrap();
        assert!((rc - 2f64.ln() / 20.0).abs() < 1e-12);
        let rc4 = critical_radius(n, 4, 3).unwrap();
        assert!((rc4 - 2.0 * rc).abs() < 1e-12);
        // sqrt(2) ln 3 / (2 ln 1e6), evaluated independently with extra digits
        let v = critical_radius(1e6, 2, 4).unwrap();
        assert!((v - 0.056_229_279).abs() < 1e-8, "{v}");
    }

    #[test]
    fn critical_radius_rejects_degenerate_inputs() {
        assert_eq!(critical_radius(100.0, 2, 2), Err(GeometryError::DegenerateDegree(2)));
        assert_eq!(critical_radius(2.0, 2, 3), Err(GeometryError::TooFewPoints(2.0)));
    }

    #[test]
    fn epsilon_values() {
        let e = epsilon_param(10f64.exp(), 1, 3).unwrap();
        assert!((e - 10.0 * 30f64.ln()).abs() < 1e-9);
        let e = epsilon_param(100f64.exp(), 1, 3).unwrap();
        assert!((e - 300f64.ln()).abs() < 1e-9);
        let e = epsilon_param(1e5, 2, 3).unwrap();
        assert!((e - 61.532_278).abs() < 1e-5, "{e}");
    }

    #[test]
    fn odd_side_selection() {
        // Enumerated by hand: admissible odd s are 55..=81, and 1/65 is the
        // reciprocal nearest the midpoint of [1/82.45, 1/54.1].
        let s = choose_odd_s_for(0.034_657_4, 1, 0.1).unwrap();
        assert_eq!(s, 65);
        assert_eq!(pick_odd_in_range(5.0, 5.0).unwrap(), 5);
        assert!(matches!(
            pick_odd_in_range(2.1, 2.9),
            Err(GeometryError::TessellationInfeasible { .. })
        ));
        assert!(pick_odd_in_range(1.0, 2.5).is_err());
    }

    #[test]
    fn one_dimensional_three_cells() {
        let t = Tessellation::new(1, 3).unwrap();
        assert_eq!(t.ordering(), &[0, 2, 1]);
        assert_eq!(t.central_cell(), 1);
        assert_eq!(t.successor(0), Some(1));
        assert_eq!(t.successor(2), Some(1));
        assert_eq!(t.successor(1), None);
        assert_eq!(t.bounds(0, 0), (0.0, 1.0 / 3.0));
    }

    #[test]
    fn successor_moves_first_disagreeing_axis() {
        let t = Tessellation::new(2, 3).unwrap();
        let corner = t.index_of(&[0, 0]);
        let succ = t.successor(corner).unwrap();
        let c = t.centre(succ);
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn eta_and_rejections() {
        assert_eq!(Tessellation::new(1, 9).unwrap().eta(), 3);
        assert!(Tessellation::new(1, 4).is_err());
        assert!(Tessellation::new(2, 1).is_err());
    }

    #[test]
    fn boundary_points_go_to_last_cell() {
        let t = Tessellation::new(2, 5).unwrap();
        assert_eq!(t.cell_of_point(&[1.0, 1.0]), t.index_of(&[4, 4]));
        assert_eq!(t.cell_of_point(&[0.0, 0.2]), t.index_of(&[0, 1]));
    }

    #[test]
    fn transit_balls_one_dimension() {
        let t = Tessellation::new(1, 9).unwrap();
        let eps = 0.5;
        let r = 3.0 / 9.0;
        let tb = transit_balls(&t, 0, eps, r).unwrap();
        assert_eq!(tb.balls.len(), 4);
        assert!((tb.balls[0].centre[0] - 0.5).abs() < 1e-12);
        assert!((tb.balls[3].centre[0] - 1.5 / 9.0).abs() < 1e-12);
        assert!((tb.balls[0].radius - eps / 180.0).abs() < 1e-15);
        tb.check(&t, r).unwrap();
    }

    #[test]
    fn transit_balls_reject_large_epsilon_and_central() {
        let t = Tessellation::new(2, 5).unwrap();
        assert_eq!(transit_balls(&t, 0, 6.0, 1.0).unwrap_err(), GeometryError::BallInfeasible(6.0));
        assert!(matches!(
            transit_balls(&t, t.central_cell(), 0.5, 1.0),
            Err(GeometryError::CentralTarget(_))
        ));
    }

    #[test]
    fn transit_gap_reported() {
        let t = Tessellation::new(2, 9).unwrap();
        assert!(matches!(transit_balls(&t, 0, 0.5, 0.01), Err(GeometryError::TransitGap { .. })));
    }
}
