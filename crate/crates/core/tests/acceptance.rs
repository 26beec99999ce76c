//! Acceptance criteria. Each test writes one `criterion N: PASS|FAIL` line
//! straight to stderr (bypassing capture) and then asserts.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use rgg_universal::decompose::split_tree;
use rgg_universal::embed::embed_tree;
use rgg_universal::geometry::{critical_radius, BallAtlas, Tessellation};
use rgg_universal::harness::{
    derive_seed, prepare_radius, run_concentration_check, run_lower_bound_experiment, run_prop1_experiment,
    run_threshold_sweep, wilson_interval, ExperimentConfig, Mode, Radii, TreeFamily, TrialStatus,
};
use rgg_universal::rgg::{color_points, sample_points, GeometricGraph, PointSet, DEFAULT_EXACT_DIAMETER_CUTOFF};
use rgg_universal::trees::{path, random_bounded_degree_tree, truncated_regular_tree, uniform_random_tree, Tree};

fn report(id: u32, pass: bool, detail: String) {
    let line = format!("criterion {id}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn d2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Total, injective, and every tree edge within `r` by direct distance.
fn independently_valid(tree: &Tree, points: &PointSet, r: f64, map: &[Option<usize>]) -> bool {
    if map.len() != tree.len() || map.iter().any(|p| p.is_none_or(|p| p >= points.len())) {
        return false;
    }
    let mut used = vec![false; points.len()];
    for p in map.iter().flatten() {
        if std::mem::replace(&mut used[*p], true) {
            return false;
        }
    }
    (0..tree.len()).all(|u| {
        tree.neighbors(u)
            .iter()
            .all(|&v| d2(points.point(map[u].unwrap()), points.point(map[v].unwrap())) <= r * r)
    })
}

#[test]
fn criterion_1_graph_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut mismatches = 0;
    let mut edges = 0usize;
    for i in 0..100 {
        let d = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=500);
        let sd = (d as f64).sqrt();
        let r = (rng.gen_range((1e-3f64).ln()..sd.ln())).exp();
        let pts = sample_points(n, d, derive_seed(1001, i)).unwrap();
        let mut brute = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if d2(pts.point(u), pts.point(v)) <= r * r {
                    brute.push((u, v));
                }
            }
        }
        let got = GeometricGraph::new(pts, r).unwrap().edges();
        edges += brute.len();
        if got != brute {
            mismatches += 1;
        }
    }
    let pass = mismatches == 0;
    report(1, pass, format!("100 instances, {edges} edges, {mismatches} mismatching"));
    assert!(pass);
}

#[test]
fn criterion_2_tree_splitting() {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let mut bad = Vec::new();
    for i in 0..1000u64 {
        let delta = rng.gen_range(3..=6);
        let n = rng.gen_range(1..=200);
        let tree = match i % 4 {
            0 => truncated_regular_tree(n.max(2), delta).unwrap(),
            1 => path(n).unwrap(),
            _ => random_bounded_degree_tree(n, delta, derive_seed(2002, i)).unwrap(),
        };
        let n = tree.len();
        // Dyadic weights in (0, m0] so every sum is exact.
        let m0_units: u32 = rng.gen_range(1..=40);
        let m0 = m0_units as f64 / 8.0;
        let m = m0 * (delta as f64 + 1.0);
        let w: Vec<f64> = if i % 2 == 0 {
            vec![m0.min(1.0); n]
        } else {
            (0..n).map(|_| rng.gen_range(1..=m0_units) as f64 / 8.0).collect()
        };
        let total: f64 = w.iter().sum();
        if total < m0 {
            continue;
        }
        let dec = split_tree(&tree, &w, m, delta).unwrap();
        let k = dec.k();
        let mut owner = vec![usize::MAX; n];
        let mut ok = true;
        for (p, part) in dec.parts.iter().enumerate() {
            for &v in part {
                ok &= owner[v] == usize::MAX;
                owner[v] = p;
            }
            let weight: f64 = part.iter().map(|&v| w[v]).sum();
            ok &= m0 <= weight && weight <= m;
            // Connectivity: a part with |P| vertices spans |P| - 1 tree edges.
            let inner = part.iter().map(|&v| tree.neighbors(v).iter().filter(|&&u| owner_of(&dec.parts, p, u)).count()).sum::<usize>() / 2;
            ok &= inner + 1 == part.len();
        }
        ok &= owner.iter().all(|&o| o != usize::MAX);
        ok &= dec.cut_edges.len() == k - 1;
        ok &= dec.anchors.len() <= 2 * k - 2;
        ok &= k as f64 <= total / m0;
        if !ok {
            bad.push(i);
        }
    }
    let pass = bad.is_empty();
    report(2, pass, format!("1000 trees, failing instances {bad:?}"));
    assert!(pass);
}

fn owner_of(parts: &[Vec<usize>], p: usize, v: usize) -> bool {
    parts[p].binary_search(&v).is_ok()
}

#[test]
fn criterion_3_embeddings_validate() {
    let families = [TreeFamily::TruncatedRegular, TreeFamily::Uniform, TreeFamily::BoundedRandom, TreeFamily::Path];
    let outcomes: Vec<(bool, bool)> = (0..600u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(3003, i));
            let n = rng.gen_range(100..=4000);
            let d = rng.gen_range(1..=2);
            let mut cfg = ExperimentConfig::new(n, d, 3, Radii::Multiples(vec![rng.gen_range(4.0..40.0)]));
            cfg.mode = Mode::Sim;
            cfg.epsilon = Some(rng.gen_range(0.5..4.95));
            cfg.m_cell_fraction = Some(rng.gen_range(0.05..0.4));
            let (r, _) = cfg.resolve_radii().unwrap()[0];
            let family = families[(i % 4) as usize];
            let tree = family.generate(n, 3, derive_seed(i, 2)).unwrap();
            let delta = tree.max_degree().max(3);
            let Ok(setup) = prepare_radius(&cfg, r) else { return (false, true) };
            if setup.m < delta as f64 + 1.0 {
                return (false, true);
            }
            let points = sample_points(n, d, derive_seed(i, 0)).unwrap();
            let colors = color_points(&points, 0.5, derive_seed(i, 1)).unwrap();
            let graph = GeometricGraph::new(points, r).unwrap();
            let emb = embed_tree(&tree, &graph, &colors, &setup.tess, &setup.atlas, setup.m, delta).unwrap();
            if !emb.is_success() {
                return (false, true);
            }
            (true, independently_valid(&tree, graph.points(), r, &emb.map))
        })
        .collect();
    let successes = outcomes.iter().filter(|o| o.0).count();
    let invalid = outcomes.iter().filter(|o| o.0 && !o.1).count();
    // At least 50 successes so the check is not vacuous.
    let pass = invalid == 0 && successes >= 50;
    report(3, pass, format!("600 trials, {successes} successes, {invalid} rejected by the validator"));
    assert!(pass);
}

fn sample_in_ball(rng: &mut ChaCha8Rng, c: &[f64], rad: f64) -> Vec<f64> {
    loop {
        let x: Vec<f64> = c.iter().map(|&ci| ci + rng.gen_range(-rad..rad)).collect();
        if d2(&x, c) <= rad * rad {
            return x;
        }
    }
}

fn cell_of(x: &[f64], s: usize) -> usize {
    x.iter().fold(0, |acc, &v| acc * s + ((v * s as f64).floor() as usize).min(s - 1))
}

#[test]
fn criterion_4_geometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let mut failures = Vec::new();
    let mut off_segment = 0usize;
    let mut balls_total = 0usize;
    for config in 0..100 {
        let d = rng.gen_range(1..=3);
        let s = 2 * rng.gen_range(1..=20) + 1;
        let eps: f64 = rng.gen_range(1e-3..=1.0);
        // Any r_c admitting this s, and r = (1 + eps) r_c.
        let sd = (d as f64).sqrt();
        let lo = 2.0 * sd / (s as f64 * (1.0 + 2.0 * eps / 3.0));
        let hi = 3.0 * sd / (s as f64 * (1.0 + eps / 2.0));
        let r = ((1.0 + eps) * rng.gen_range(lo..=hi)).min(sd);
        let tess = Tessellation::new(d, s).unwrap();
        let atlas = match BallAtlas::build(&tess, eps, r) {
            Ok(a) => a,
            Err(e) => {
                failures.push(format!("config {config}: {e}"));
                continue;
            }
        };
        let targets: Vec<usize> = (0..tess.cell_count()).filter(|&c| c != tess.central_cell()).collect();
        for tb in atlas.iter() {
            balls_total += tb.balls.len();
            off_segment += tb.balls.iter().filter(|b| !b.on_segment).count();
        }
        let eta = tess.eta();
        let centre = vec![0.5; d];
        let central = cell_of(&centre, s);
        let mut ok = true;
        for _ in 0..10_000 {
            let q = targets[rng.gen_range(0..targets.len())];
            let tb = atlas.for_target(q).unwrap();
            let j = rng.gen_range(0..eta);
            let (a, b) = (&tb.balls[j], &tb.balls[j + 1]);
            let x = sample_in_ball(&mut rng, &a.centre, a.radius);
            let y = sample_in_ball(&mut rng, &b.centre, b.radius);
            // P3
            ok &= d2(&x, &y) <= r * r;
            // P1: both points lie in cells strictly after q.
            for p in [&x, &y] {
                ok &= tess.position(cell_of(p, s)) > tess.position(q);
            }
            // P2
            let nu = tess.successor(q).unwrap();
            let z0 = sample_in_ball(&mut rng, &tb.balls[0].centre, tb.balls[0].radius);
            let ze = sample_in_ball(&mut rng, &tb.balls[eta].centre, tb.balls[eta].radius);
            ok &= cell_of(&z0, s) == central && cell_of(&ze, s) == nu;
            // Eq. 4 style bound between a cell and its successor.
            let (qc, nc) = (tess.coords(q), tess.coords(nu));
            let u: Vec<f64> = qc.iter().map(|&c| (c as f64 + rng.gen::<f64>()) / s as f64).collect();
            let v: Vec<f64> = nc.iter().map(|&c| (c as f64 + rng.gen::<f64>()) / s as f64).collect();
            ok &= d2(&u, &v).sqrt() <= 2.0 * sd / s as f64;
        }
        if !ok {
            failures.push(format!("config {config} (d={d}, s={s}, eps={eps:.3})"));
        }
    }
    let pass = failures.is_empty();
    report(
        4,
        pass,
        format!("100 configurations x 10^4 samples, {off_segment}/{balls_total} balls off-segment, failures {failures:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_5_diameter_obstruction() {
    let (n, d, delta) = (30_000usize, 2usize, 3usize);
    // Independent h: smallest h with n <= 2^{h+1} - 1 for delta = 3.
    let h = (0..).find(|&h: &u32| (n as u64) < (1u64 << (h + 1))).unwrap() as usize;
    let r = 0.6 * critical_radius(n as f64, d, delta).unwrap();
    let rec = run_lower_bound_experiment(n, d, delta, r, 20, 5005, DEFAULT_EXACT_DIAMETER_CUTOFF).unwrap();
    let pass = rec.h == h && rec.obstructed >= 18;
    let diam: Vec<_> = rec.per_trial.iter().map(|t| t.diameter.value()).collect();
    report(5, pass, format!("2h = {}, obstructed {}/20, diameter bounds {diam:?}", 2 * h, rec.obstructed));
    assert!(pass);
}

#[test]
fn criterion_6_concentration() {
    let rec = run_concentration_check(100_000, 2, 0.04, 0.5, 200, 6006).unwrap();
    let anp: f64 = 0.04 * 100_000.0 * 0.5;
    let bound = 2.0 * (-anp.cbrt() / 3.0).exp();
    let pass = (rec.bound - bound).abs() < 1e-12 && (bound - 0.030).abs() < 0.001 && rec.frequency <= 0.05;
    report(6, pass, format!("violations {}/200 = {:.3}, bound {bound:.4}, limit 0.05", rec.violations, rec.frequency));
    assert!(pass);
}

#[test]
fn criterion_7_threshold_curve() {
    let multiples = vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let mut cfg = ExperimentConfig::new(100_000, 2, 3, Radii::Multiples(multiples));
    cfg.trials = 30;
    cfg.seed = 7007;
    cfg.mode = Mode::Sim;
    cfg.family = TreeFamily::BoundedRandom;
    cfg.epsilon = Some(4.9);
    cfg.m_cell_fraction = Some(0.2);
    let curve = run_threshold_sweep(&cfg).unwrap();
    let counts: Vec<(usize, usize)> = curve.points.iter().map(|p| (p.successes, p.trials)).collect();
    // Non-decreasing up to noise: no later Wilson interval entirely below an earlier one.
    let intervals: Vec<(f64, f64)> = counts.iter().map(|&(k, t)| wilson_interval(k, t)).collect();
    let monotone = (0..intervals.len()).all(|i| intervals[i + 1..].iter().all(|b| b.1 >= intervals[i].0));
    let freq: Vec<f64> = counts.iter().map(|&(k, t)| k as f64 / t as f64).collect();
    let invalid = curve.records.iter().flatten().filter(|r| r.status == TrialStatus::Invalid).count();
    let pass = monotone && freq[0] <= 0.1 && *freq.last().unwrap() >= 0.9 && invalid == 0;
    report(7, pass, format!("frequencies {freq:?} at multiples 0.5..32 of r_c"));
    assert!(pass);
}

#[test]
fn criterion_8_prufer_uniformity() {
    let draws = 16_000;
    let mut counts: BTreeMap<Vec<(usize, usize)>, usize> = BTreeMap::new();
    for i in 0..draws {
        let t = uniform_random_tree(4, derive_seed(8008, i)).unwrap();
        let mut edges: Vec<(usize, usize)> = (0..4).flat_map(|u| t.neighbors(u).iter().filter(move |&&v| u < v).map(move |&v| (u, v))).collect();
        edges.sort_unstable();
        *counts.entry(edges).or_default() += 1;
    }
    let expected = draws as f64 / 16.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum::<f64>()
        + (16 - counts.len()) as f64 * expected;
    let critical = ChiSquared::new(15.0).unwrap().inverse_cdf(0.99);
    let pass = counts.len() == 16 && chi2 <= critical;
    report(8, pass, format!("{} distinct trees, chi2 = {chi2:.2}, critical {critical:.3}", counts.len()));
    assert!(pass);
}

#[test]
fn criterion_9_line_greedy_curve() {
    let cs = [0.05, 0.2, 1.0, 5.0, 20.0];
    let curve = run_prop1_experiment(4096, &cs, 50, 9009).unwrap();
    let freq: Vec<f64> = curve.points.iter().map(|p| p.frequency).collect();
    let pass = freq.windows(2).all(|w| w[0] <= w[1]) && freq[0] < 0.2 && freq[4] > 0.8;
    report(9, pass, format!("frequencies {freq:?} at c = {cs:?}"));
    assert!(pass);
}
