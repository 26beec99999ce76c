//! Experiment drivers: threshold sweeps, the diameter obstruction, the
//! equidistribution check and the one-dimensional greedy experiment.
//!
//! Every trial draws its randomness from seeds derived from the master seed
//! with [`derive_seed`], so a run is a pure function of its configuration.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::embed::{check_event_a, embed_tree, greedy_line_embed, verify_embedding, EmbedDiagnostics, EventAReport, FailureInfo, Step};
use crate::geometry::{choose_odd_s, choose_odd_s_for, critical_radius, epsilon_param, BallAtlas, Tessellation};
use crate::rgg::{color_points, count_in_region, hop_diameter, sample_points, ColorFilter, GeometricGraph, HopDiameter, Region};
use crate::trees::{height_h, path, random_bounded_degree_tree, truncated_regular_tree, uniform_random_tree, Tree};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ConfigError>;

fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError::Invalid(msg.into()))
}

/// splitmix64 of `master` mixed with `stream`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TreeFamily {
    TruncatedRegular,
    Uniform,
    BoundedRandom,
    Path,
}

impl TreeFamily {
    pub fn generate(self, n: usize, delta: usize, seed: u64) -> crate::trees::Result<Tree> {
        match self {
            TreeFamily::TruncatedRegular if n < 2 => Ok(Tree::single()),
            TreeFamily::TruncatedRegular => truncated_regular_tree(n, delta),
            TreeFamily::Uniform => uniform_random_tree(n, seed),
            TreeFamily::BoundedRandom => random_bounded_degree_tree(n, delta, seed),
            TreeFamily::Path => path(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Exact `eps(n, d, delta)` and the tessellation from `r_c`.
    Paper,
    /// `eps_eff` (default `min(eps, 0.5)`) and the tessellation from `r / (1 + eps_eff)`.
    Sim,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Radii {
    Absolute(Vec<f64>),
    /// Multiples of `r_c(n, d, delta)`.
    Multiples(Vec<f64>),
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub d: usize,
    pub delta: usize,
    pub family: TreeFamily,
    pub radii: Radii,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    pub epsilon: Option<f64>,
    /// Absolute part size; takes precedence over `m_cell_fraction`.
    pub m: Option<f64>,
    /// Part size as a fraction of the expected cell population `n / s^d`.
    pub m_cell_fraction: Option<f64>,
    /// One tree for all trials instead of a fresh tree per trial.
    pub fix_tree: bool,
}

pub const SIM_EPSILON: f64 = 0.5;

impl ExperimentConfig {
    pub fn new(n: usize, d: usize, delta: usize, radii: Radii) -> Self {
        Self {
            n,
            d,
            delta,
            family: TreeFamily::BoundedRandom,
            radii,
            trials: 1,
            seed: 0,
            mode: Mode::Sim,
            epsilon: None,
            m: None,
            m_cell_fraction: None,
            fix_tree: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return invalid("n and d must be positive");
        }
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.delta < 2 {
            return invalid("delta must be at least 2");
        }
        let values = match &self.radii {
            Radii::Absolute(v) | Radii::Multiples(v) => v,
        };
        if values.is_empty() || values.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return invalid("radii must be a non-empty list of positive numbers");
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return invalid("epsilon must be positive");
            }
        }
        if let Some(m) = self.m {
            if !(m > 0.0 && m.is_finite()) {
                return invalid("m must be positive");
            }
        }
        if let Some(f) = self.m_cell_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return invalid("m cell fraction must lie in (0, 1]");
            }
        }
        if matches!(self.radii, Radii::Multiples(_)) {
            self.critical_radius()?;
        }
        Ok(())
    }

    pub fn critical_radius(&self) -> Result<f64> {
        critical_radius(self.n as f64, self.d, self.delta).or_else(|e| invalid(format!("r_c undefined: {e}")))
    }

    /// `(r, multiple)` pairs. Radii beyond `sqrt(d)` give the complete graph
    /// and are clamped to `sqrt(d)`.
    pub fn resolve_radii(&self) -> Result<Vec<(f64, Option<f64>)>> {
        let cap = (self.d as f64).sqrt();
        Ok(match &self.radii {
            Radii::Absolute(v) => v.iter().map(|&r| (r.min(cap), None)).collect(),
            Radii::Multiples(v) => {
                let rc = self.critical_radius()?;
                v.iter().map(|&c| ((c * rc).min(cap), Some(c))).collect()
            }
        })
    }
}

/// Tessellation, transit balls and part size for one radius.
#[derive(Debug, Clone)]
pub struct RadiusSetup {
    pub r: f64,
    pub epsilon: f64,
    pub s: usize,
    pub m: f64,
    pub tess: Tessellation,
    pub atlas: BallAtlas,
}

pub fn prepare_radius(config: &ExperimentConfig, r: f64) -> std::result::Result<RadiusSetup, String> {
    let (n, d) = (config.n as f64, config.d);
    let (epsilon, s) = match config.mode {
        Mode::Paper => {
            let eps = match config.epsilon {
                Some(e) => e,
                None => epsilon_param(n, d, config.delta).map_err(|e| e.to_string())?,
            };
            (eps, choose_odd_s(n, d, config.delta, eps).map_err(|e| e.to_string())?)
        }
        Mode::Sim => {
            let eps = config
                .epsilon
                .unwrap_or_else(|| epsilon_param(n, d, config.delta).map_or(SIM_EPSILON, |e| e.min(SIM_EPSILON)));
            (eps, choose_odd_s_for(r / (1.0 + eps), d, eps).map_err(|e| e.to_string())?)
        }
    };
    let tess = Tessellation::new(d, s).map_err(|e| e.to_string())?;
    let atlas = BallAtlas::build(&tess, epsilon, r).map_err(|e| e.to_string())?;
    let cell_population = n / tess.cell_count() as f64;
    let m = match (config.m, config.m_cell_fraction) {
        (Some(m), _) => m,
        (None, Some(f)) => f * cell_population,
        (None, None) => cell_population / (8.0 * d as f64),
    };
    Ok(RadiusSetup { r, epsilon, s, m, tess, atlas })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Success,
    Failure,
    /// Parameters admit no tessellation, balls or decomposition.
    Infeasible,
    /// A claimed success rejected by the validator. Never expected.
    Invalid,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub r: f64,
    pub seed: u64,
    pub status: TrialStatus,
    pub s: Option<usize>,
    pub epsilon: Option<f64>,
    pub m: Option<f64>,
    pub tree_max_degree: usize,
    pub reason: Option<String>,
    pub event_a: Option<EventAReport>,
    pub failure: Option<FailureInfo>,
    pub diagnostics: Option<EmbedDiagnostics>,
    /// Validated vertex-to-point map on success.
    #[serde(skip)]
    pub embedding: Option<Vec<usize>>,
    #[serde(skip)]
    pub elapsed_ms: f64,
}

fn tree_seed(config: &ExperimentConfig, trial_seed: u64) -> u64 {
    if config.fix_tree {
        derive_seed(config.seed, u64::MAX)
    } else {
        derive_seed(trial_seed, 2)
    }
}

/// One point set, coloring and tree at radius `r`, embedded and validated.
pub fn run_universality_trial(config: &ExperimentConfig, r: f64, seed: u64) -> Result<TrialRecord> {
    config.validate()?;
    let setup = prepare_radius(config, r);
    Ok(run_trial_with(config, r, setup.as_ref(), seed))
}

fn run_trial_with(config: &ExperimentConfig, r: f64, setup: std::result::Result<&RadiusSetup, &String>, seed: u64) -> TrialRecord {
    let start = Instant::now();
    let n = config.n;
    let mut rec = TrialRecord {
        r,
        seed,
        status: TrialStatus::Infeasible,
        s: None,
        epsilon: None,
        m: None,
        tree_max_degree: 0,
        reason: None,
        event_a: None,
        failure: None,
        diagnostics: None,
        embedding: None,
        elapsed_ms: 0.0,
    };
    let tree = match config.family.generate(n, config.delta, tree_seed(config, seed)) {
        Ok(t) => t,
        Err(e) => {
            rec.reason = Some(e.to_string());
            return rec;
        }
    };
    rec.tree_max_degree = tree.max_degree();
    if n == 1 {
        rec.status = TrialStatus::Success;
        rec.embedding = Some(vec![0]);
        return rec;
    }
    let setup = match setup {
        Ok(s) => s,
        Err(reason) => {
            rec.reason = Some(reason.clone());
            return rec;
        }
    };
    rec.s = Some(setup.s);
    rec.epsilon = Some(setup.epsilon);
    rec.m = Some(setup.m);

    let points = sample_points(n, config.d, derive_seed(seed, 0)).expect("n, d validated");
    let colors = color_points(&points, 0.5, derive_seed(seed, 1)).expect("p = 1/2");
    let graph = GeometricGraph::new(points, r).expect("radius clamped to sqrt(d)");
    rec.event_a = Some(check_event_a(&graph, &colors, &setup.tess, &setup.atlas));
    // The decomposition needs a degree bound the tree respects.
    let delta = config.delta.max(tree.max_degree());
    match embed_tree(&tree, &graph, &colors, &setup.tess, &setup.atlas, setup.m, delta) {
        Err(e) => rec.reason = Some(e.to_string()),
        Ok(emb) => {
            rec.diagnostics = emb.diagnostics.clone();
            if let Some(f) = emb.failure.clone() {
                rec.status = TrialStatus::Failure;
                rec.failure = Some(f);
            } else if let Err(v) = verify_embedding(&tree, &graph, &emb) {
                rec.status = TrialStatus::Invalid;
                rec.reason = Some(v.to_string());
            } else {
                rec.status = TrialStatus::Success;
                rec.embedding = emb.total_map();
            }
        }
    }
    rec.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    rec
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + Z * Z / n;
    let centre = (p + Z * Z / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + Z * Z / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub r: f64,
    pub r_mult: Option<f64>,
    pub s: Option<usize>,
    pub epsilon: Option<f64>,
    pub m: Option<f64>,
    pub trials: usize,
    pub successes: usize,
    pub frequency: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub mean_runtime_ms: f64,
    pub failed_central: usize,
    pub failed_step1: usize,
    pub failed_step2: usize,
    pub infeasible: usize,
    pub invalid: usize,
    pub event_a_holds: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdCurve {
    pub config: ExperimentConfig,
    pub points: Vec<CurvePoint>,
    #[serde(skip)]
    pub records: Vec<Vec<TrialRecord>>,
}

/// Trial `t` at radius index `i` uses seed `derive(derive(seed, i), t)`.
pub fn trial_seed(master: u64, r_index: usize, trial: usize) -> u64 {
    derive_seed(derive_seed(master, r_index as u64), trial as u64)
}

pub fn run_threshold_sweep(config: &ExperimentConfig) -> Result<ThresholdCurve> {
    config.validate()?;
    let radii = config.resolve_radii()?;
    let mut points = Vec::with_capacity(radii.len());
    let mut records = Vec::with_capacity(radii.len());
    for (i, &(r, mult)) in radii.iter().enumerate() {
        let setup = prepare_radius(config, r);
        let recs: Vec<TrialRecord> = (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial_with(config, r, setup.as_ref(), trial_seed(config.seed, i, t)))
            .collect();
        points.push(summarise(r, mult, setup.as_ref().ok(), &recs));
        records.push(recs);
    }
    Ok(ThresholdCurve { config: config.clone(), points, records })
}

fn summarise(r: f64, r_mult: Option<f64>, setup: Option<&RadiusSetup>, recs: &[TrialRecord]) -> CurvePoint {
    let count = |st: TrialStatus| recs.iter().filter(|x| x.status == st).count();
    let step = |s: Step| recs.iter().filter(|x| x.failure.as_ref().is_some_and(|f| f.step == s)).count();
    let successes = count(TrialStatus::Success);
    let (wilson_lo, wilson_hi) = wilson_interval(successes, recs.len());
    CurvePoint {
        r,
        r_mult,
        s: setup.map(|x| x.s),
        epsilon: setup.map(|x| x.epsilon),
        m: setup.map(|x| x.m),
        trials: recs.len(),
        successes,
        frequency: successes as f64 / recs.len() as f64,
        wilson_lo,
        wilson_hi,
        mean_runtime_ms: recs.iter().map(|x| x.elapsed_ms).sum::<f64>() / recs.len() as f64,
        failed_central: step(Step::Central),
        failed_step1: step(Step::Transit),
        failed_step2: step(Step::Fill),
        infeasible: count(TrialStatus::Infeasible),
        invalid: count(TrialStatus::Invalid),
        event_a_holds: recs.iter().filter(|x| x.event_a.as_ref().is_some_and(EventAReport::holds)).count(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundTrial {
    pub seed: u64,
    pub diameter: HopDiameter,
    pub exceeds_2h: bool,
    pub corner_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundRecord {
    pub n: usize,
    pub d: usize,
    pub delta: usize,
    pub r: f64,
    pub h: usize,
    pub two_h: usize,
    /// `(1 - 2 n^{-1/(2d)}) sqrt(d) / r`
    pub analytic_bound: f64,
    pub trials: usize,
    pub obstructed: usize,
    pub obstruction_fraction: f64,
    /// Fraction of trials with a point in `[0, n^{-1/(2d)}]^d`.
    pub corner_fraction: f64,
    /// `1 - (1 - n^{-1/2})^n`
    pub corner_expected: f64,
    pub per_trial: Vec<LowerBoundTrial>,
}

pub fn run_lower_bound_experiment(
    n: usize,
    d: usize,
    delta: usize,
    r: f64,
    trials: usize,
    seed: u64,
    exact_cutoff: usize,
) -> Result<LowerBoundRecord> {
    if !(r > 0.0 && r.is_finite()) {
        return invalid("r must be positive");
    }
    if trials == 0 || n == 0 || d == 0 {
        return invalid("n, d and trials must be positive");
    }
    let h = height_h(n, delta).or_else(|e| invalid(e.to_string()))?;
    let r = r.min((d as f64).sqrt());
    let side = (n as f64).powf(-1.0 / (2.0 * d as f64));
    let corner = Region::Box { lo: vec![0.0; d], hi: vec![side; d] };
    let two_h = 2 * h;
    let per_trial: Vec<LowerBoundTrial> = (0..trials)
        .map(|t| {
            let seed = derive_seed(seed, t as u64);
            let points = sample_points(n, d, seed).expect("validated");
            let corner_points = count_in_region(&points, None, &corner, ColorFilter::Any);
            let graph = GeometricGraph::new(points, r).expect("validated");
            let diameter = hop_diameter(&graph, exact_cutoff);
            LowerBoundTrial { seed, diameter, exceeds_2h: diameter.exceeds(two_h as u32), corner_points }
        })
        .collect();
    let obstructed = per_trial.iter().filter(|t| t.exceeds_2h).count();
    let nf = n as f64;
    Ok(LowerBoundRecord {
        n,
        d,
        delta,
        r,
        h,
        two_h,
        analytic_bound: (1.0 - 2.0 * side) * (d as f64).sqrt() / r,
        trials,
        obstructed,
        obstruction_fraction: obstructed as f64 / trials as f64,
        corner_fraction: per_trial.iter().filter(|t| t.corner_points > 0).count() as f64 / trials as f64,
        corner_expected: 1.0 - (1.0 - nf.powf(-0.5)).powf(nf),
        per_trial,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationRecord {
    pub n: usize,
    pub d: usize,
    pub a: f64,
    pub p: f64,
    pub trials: usize,
    pub mean: f64,
    /// `(anp)^{2/3}`
    pub tolerance: f64,
    pub mean_count: f64,
    pub violations: usize,
    pub frequency: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    /// `2 exp(-(anp)^{1/3} / 3)`
    pub bound: f64,
}

/// Counts blue points (probability `p`) in the box `[0, a^{1/d}]^d`.
pub fn run_concentration_check(n: usize, d: usize, a: f64, p: f64, trials: usize, seed: u64) -> Result<ConcentrationRecord> {
    if !(p > 0.0 && p <= 1.0) || !(a > 0.0 && a <= 1.0) || d == 0 || trials == 0 {
        return invalid("need 0 < a <= 1, 0 < p <= 1, d >= 1, trials >= 1");
    }
    let nf = n as f64;
    if nf < 10.0 / p {
        return invalid(format!("n = {n} is below 10/p = {}", 10.0 / p));
    }
    if a < 10.0 / (nf * p) {
        return invalid(format!("a = {a} is below 10/(np) = {}", 10.0 / (nf * p)));
    }
    let mean = a * nf * p;
    let tolerance = mean.powf(2.0 / 3.0);
    let side = a.powf(1.0 / d as f64);
    let region = Region::Box { lo: vec![0.0; d], hi: vec![side; d] };
    let counts: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = derive_seed(seed, t as u64);
            let points = sample_points(n, d, derive_seed(s, 0)).expect("validated");
            let colors = color_points(&points, p, derive_seed(s, 1)).expect("validated");
            count_in_region(&points, Some(&colors), &region, ColorFilter::Only(crate::rgg::Color::Blue))
        })
        .collect();
    let violations = counts.iter().filter(|&&c| (c as f64 - mean).abs() > tolerance).count();
    let (wilson_lo, wilson_hi) = wilson_interval(violations, trials);
    Ok(ConcentrationRecord {
        n,
        d,
        a,
        p,
        trials,
        mean,
        tolerance,
        mean_count: counts.iter().sum::<usize>() as f64 / trials as f64,
        violations,
        frequency: violations as f64 / trials as f64,
        wilson_lo,
        wilson_hi,
        bound: 2.0 * (-mean.powf(1.0 / 3.0) / 3.0).exp(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Point {
    pub c: f64,
    pub r: f64,
    pub trials: usize,
    pub successes: usize,
    pub frequency: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub mean_height: f64,
    pub mean_width: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Trial {
    pub c: f64,
    pub seed: u64,
    pub success: bool,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Curve {
    pub n: usize,
    pub points: Vec<Prop1Point>,
    pub trials: Vec<Prop1Trial>,
}

/// Greedy embedding of uniform random trees into `G_1(n, c n^{-1/2})`.
pub fn run_prop1_experiment(n: usize, c_values: &[f64], trials: usize, seed: u64) -> Result<Prop1Curve> {
    if n == 0 || trials == 0 || c_values.is_empty() || c_values.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return invalid("need n >= 1, trials >= 1 and positive c values");
    }
    let mut points = Vec::new();
    let mut all = Vec::new();
    for (i, &c) in c_values.iter().enumerate() {
        let r = (c / (n as f64).sqrt()).min(1.0);
        let recs: Vec<Prop1Trial> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let s = trial_seed(seed, i, t);
                let tree = uniform_random_tree(n, derive_seed(s, 2)).expect("n >= 1");
                let pts = sample_points(n, 1, derive_seed(s, 0)).expect("n >= 1");
                let graph = GeometricGraph::new(pts, r).expect("0 < r <= 1");
                let emb = greedy_line_embed(&tree, &graph).expect("d = 1, sizes match");
                let success = emb.is_success() && verify_embedding(&tree, &graph, &emb).is_ok();
                Prop1Trial { c, seed: s, success, height: tree.height_from(0), width: tree.width_from(0) }
            })
            .collect();
        let successes = recs.iter().filter(|x| x.success).count();
        let (wilson_lo, wilson_hi) = wilson_interval(successes, trials);
        let mean = |f: fn(&Prop1Trial) -> usize| recs.iter().map(f).sum::<usize>() as f64 / trials as f64;
        points.push(Prop1Point {
            c,
            r,
            trials,
            successes,
            frequency: successes as f64 / trials as f64,
            wilson_lo,
            wilson_hi,
            mean_height: mean(|x| x.height),
            mean_width: mean(|x| x.width),
        });
        all.extend(recs);
    }
    Ok(Prop1Curve { n, points, trials: all })
}

/// `(successes, trials)` pairs with no significant drop: no later Wilson
/// interval lies entirely below an earlier one.
pub fn statistically_non_decreasing(points: &[(usize, usize)]) -> bool {
    let intervals: Vec<(f64, f64)> = points.iter().map(|&(k, t)| wilson_interval(k, t)).collect();
    intervals.iter().enumerate().all(|(i, a)| intervals[i + 1..].iter().all(|b| b.1 >= a.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Writes `rows` as CSV (flat rows) or the whole `doc` as JSON.
pub fn emit<W: Write, R: Serialize, D: Serialize>(w: W, format: Format, rows: &[R], doc: &D) -> Result<()> {
    match format {
        Format::Csv => {
            let mut out = csv::Writer::from_writer(w);
            for row in rows {
                out.serialize(row)?;
            }
            out.flush()?;
        }
        Format::Json => {
            let mut w = w;
            serde_json::to_writer_pretty(&mut w, doc)?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Flat CSV row for one lower-bound trial.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundRow {
    pub r: f64,
    pub seed: u64,
    pub diameter_kind: &'static str,
    pub diameter: Option<u32>,
    pub two_h: usize,
    pub exceeds_2h: bool,
    pub analytic_bound: f64,
    pub corner_points: usize,
}

impl LowerBoundRecord {
    pub fn rows(&self) -> Vec<LowerBoundRow> {
        self.per_trial
            .iter()
            .map(|t| LowerBoundRow {
                r: self.r,
                seed: t.seed,
                diameter_kind: match t.diameter {
                    HopDiameter::Exact(_) => "exact",
                    HopDiameter::LowerBound(_) => "lower_bound",
                    HopDiameter::Infinite => "infinite",
                },
                diameter: t.diameter.value(),
                two_h: self.two_h,
                exceeds_2h: t.exceeds_2h,
                analytic_bound: self.analytic_bound,
                corner_points: t.corner_points,
            })
            .collect()
    }
}

/// Flat CSV row for one universality trial.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRow {
    pub r: f64,
    pub seed: u64,
    pub status: TrialStatus,
    pub s: Option<usize>,
    pub epsilon: Option<f64>,
    pub m: Option<f64>,
    pub k: Option<usize>,
    pub event_a1: Option<bool>,
    pub event_a2: Option<bool>,
    pub failure_iteration: Option<usize>,
    pub failure_step: Option<&'static str>,
    pub demanded: Option<usize>,
    pub available: Option<usize>,
    pub reason: Option<String>,
}

impl From<&TrialRecord> for TrialRow {
    fn from(t: &TrialRecord) -> Self {
        TrialRow {
            r: t.r,
            seed: t.seed,
            status: t.status,
            s: t.s,
            epsilon: t.epsilon,
            m: t.m,
            k: t.diagnostics.as_ref().map(|d| d.k),
            event_a1: t.event_a.as_ref().map(|e| e.a1_ok),
            event_a2: t.event_a.as_ref().map(|e| e.a2_ok),
            failure_iteration: t.failure.as_ref().map(|f| f.iteration),
            failure_step: t.failure.as_ref().map(|f| f.step.as_str()),
            demanded: t.failure.as_ref().map(|f| f.demanded),
            available: t.failure.as_ref().map(|f| f.available),
            reason: t.reason.clone(),
        }
    }
}
