use std::fs::File;

use rgg_universal::embed::Embedding;
use rgg_universal::harness::{
    run_prop1_experiment, run_threshold_sweep, run_universality_trial, ExperimentConfig, Radii, TreeFamily, TrialStatus,
};
use rgg_universal::rgg::{color_points, sample_points, PointSet};
use rgg_universal::trees::{random_bounded_degree_tree, Tree};

#[test]
fn points_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.csv");
    let pts = sample_points(300, 3, 12).unwrap();
    let colors = color_points(&pts, 0.5, 13).unwrap();
    pts.write_csv(File::create(&path).unwrap(), Some(&colors)).unwrap();
    let (back, back_colors) = PointSet::read_csv(File::open(&path).unwrap()).unwrap();
    assert_eq!(back.coords(), pts.coords());
    let back_colors = back_colors.unwrap();
    assert!((0..pts.len()).all(|i| back_colors.color(i) == colors.color(i)));
}

#[test]
fn tree_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tree.csv");
    let t = random_bounded_degree_tree(500, 4, 3).unwrap();
    t.write_csv(File::create(&path).unwrap()).unwrap();
    let back = Tree::read_csv(File::open(&path).unwrap()).unwrap();
    assert_eq!(back.edges(), t.edges());
}

#[test]
fn embedding_dump_lists_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("emb.csv");
    let pts = PointSet::new(2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let emb = Embedding { map: vec![Some(1), Some(0)], failure: None, diagnostics: None };
    emb.write_csv(File::create(&path).unwrap(), &pts).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "vertex,point,x0,x1\n0,1,0.3,0.4\n1,0,0.1,0.2\n");
}

#[test]
fn trial_replay_is_byte_identical() {
    let mut cfg = ExperimentConfig::new(3000, 2, 3, Radii::Multiples(vec![30.0]));
    cfg.epsilon = Some(4.9);
    cfg.m_cell_fraction = Some(0.2);
    let (r, _) = cfg.resolve_radii().unwrap()[0];
    let a = serde_json::to_string(&run_universality_trial(&cfg, r, 99).unwrap()).unwrap();
    let b = serde_json::to_string(&run_universality_trial(&cfg, r, 99).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweep_replays_identically() {
    let mut cfg = ExperimentConfig::new(3000, 2, 3, Radii::Multiples(vec![4.0, 30.0]));
    cfg.trials = 6;
    cfg.seed = 42;
    cfg.epsilon = Some(4.9);
    cfg.m_cell_fraction = Some(0.2);
    let a = run_threshold_sweep(&cfg).unwrap();
    let b = run_threshold_sweep(&cfg).unwrap();
    for (ra, rb) in a.records.iter().zip(&b.records) {
        let ja: Vec<String> = ra.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
        let jb: Vec<String> = rb.iter().map(|r| serde_json::to_string(r).unwrap()).collect();
        assert_eq!(ja, jb);
    }
}

#[test]
fn complete_graph_mostly_succeeds_at_large_n() {
    // The shared first transit ball must hold the anchors of every part, and
    // the part count does not grow with n, so this needs n near 10^5.
    let mut cfg = ExperimentConfig::new(100_000, 2, 3, Radii::Absolute(vec![2f64.sqrt()]));
    cfg.trials = 8;
    cfg.seed = 42;
    cfg.epsilon = Some(4.9);
    cfg.m_cell_fraction = Some(0.2);
    let curve = run_threshold_sweep(&cfg).unwrap();
    assert_eq!(curve.points[0].invalid, 0);
    assert!(curve.points[0].frequency >= 0.75, "{:?}", curve.points[0]);
    for rec in &curve.records[0] {
        assert_eq!(rec.embedding.is_some(), rec.status == TrialStatus::Success);
    }
}

#[test]
fn fixed_tree_reuses_one_tree() {
    let mut cfg = ExperimentConfig::new(500, 2, 3, Radii::Absolute(vec![0.5]));
    // Uniform trees vary in maximum degree from draw to draw.
    cfg.family = TreeFamily::Uniform;
    cfg.fix_tree = true;
    cfg.trials = 6;
    let curve = run_threshold_sweep(&cfg).unwrap();
    let degrees: Vec<usize> = curve.records[0].iter().map(|r| r.tree_max_degree).collect();
    assert!(degrees.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn prop1_extremes() {
    let curve = run_prop1_experiment(200, &[1e-6, 100.0], 10, 1).unwrap();
    assert_eq!(curve.points[0].frequency, 0.0);
    assert_eq!(curve.points[1].frequency, 1.0);
}
