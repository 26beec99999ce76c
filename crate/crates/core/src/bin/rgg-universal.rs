use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rgg_universal::harness::{
    emit, run_concentration_check, run_lower_bound_experiment, run_prop1_experiment, run_threshold_sweep,
    run_universality_trial, ConfigError, ExperimentConfig, Format, Mode, Radii, TreeFamily, TrialRow,
};
use rgg_universal::rgg::{color_points, sample_points, DEFAULT_EXACT_DIAMETER_CUTOFF};

#[derive(Parser)]
#[command(name = "rgg-universal", version, about = "Spanning-tree universality experiments on random geometric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Embedding success frequency across radii.
    Sweep(Shared),
    /// Hop diameter against twice the height of the truncated regular tree.
    Lowerbound(Shared),
    /// Blue-point counts in a box of volume `a` against their mean.
    Concentration {
        #[command(flatten)]
        shared: Shared,
        #[arg(long, default_value_t = 0.04)]
        a: f64,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
    },
    /// Greedy embedding of uniform trees on the line at r = c / sqrt(n).
    Prop1 {
        #[command(flatten)]
        shared: Shared,
        /// Values of c (repeatable).
        #[arg(long = "c", required = true)]
        c: Vec<f64>,
    },
    /// A single embedding trial at the first radius.
    Trial {
        #[command(flatten)]
        shared: Shared,
        /// Write `vertex,point,x0..` for a successful embedding.
        #[arg(long)]
        embedding_out: Option<PathBuf>,
        /// Write the sampled points with their colors.
        #[arg(long)]
        points_out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Shared {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    delta: usize,
    #[arg(long, value_enum, default_value_t = TreeFamily::BoundedRandom)]
    family: TreeFamily,
    /// Absolute radius (repeatable).
    #[arg(long = "r", conflicts_with = "r_mult")]
    r: Vec<f64>,
    /// Radius as a multiple of r_c (repeatable).
    #[arg(long = "r-mult")]
    r_mult: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Sim)]
    mode: Mode,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    /// Part size as a fraction of the expected points per cell.
    #[arg(long, conflicts_with = "m")]
    m_cell_fraction: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_EXACT_DIAMETER_CUTOFF)]
    exact_diameter_cutoff: usize,
    #[arg(long)]
    fix_tree: bool,
}

impl Shared {
    fn config(&self) -> Result<ExperimentConfig, ConfigError> {
        let radii = match (self.r.is_empty(), self.r_mult.is_empty()) {
            (false, _) => Radii::Absolute(self.r.clone()),
            (true, false) => Radii::Multiples(self.r_mult.clone()),
            (true, true) => Radii::Multiples(vec![1.0]),
        };
        let config = ExperimentConfig {
            n: self.n,
            d: self.d,
            delta: self.delta,
            family: self.family,
            radii,
            trials: self.trials,
            seed: self.seed,
            mode: self.mode,
            epsilon: self.epsilon,
            m: self.m,
            m_cell_fraction: self.m_cell_fraction,
            fix_tree: self.fix_tree,
        };
        config.validate()?;
        Ok(config)
    }

    fn output(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        })
    }

    fn emit<R: Serialize, D: Serialize>(&self, rows: &[R], doc: &D) -> Result<(), ConfigError> {
        emit(self.output()?, self.format, rows, doc)
    }
}

fn run(cli: Cli) -> Result<(), ConfigError> {
    match cli.command {
        Command::Sweep(shared) => {
            let curve = run_threshold_sweep(&shared.config()?)?;
            shared.emit(&curve.points, &curve)
        }
        Command::Lowerbound(shared) => {
            let config = shared.config()?;
            let mut records = Vec::new();
            for (i, (r, _)) in config.resolve_radii()?.into_iter().enumerate() {
                let seed = rgg_universal::harness::derive_seed(config.seed, i as u64);
                records.push(run_lower_bound_experiment(
                    config.n,
                    config.d,
                    config.delta,
                    r,
                    config.trials,
                    seed,
                    shared.exact_diameter_cutoff,
                )?);
            }
            let rows: Vec<_> = records.iter().flat_map(|r| r.rows()).collect();
            shared.emit(&rows, &records)
        }
        Command::Concentration { shared, a, p } => {
            let rec = run_concentration_check(shared.n, shared.d, a, p, shared.trials, shared.seed)?;
            shared.emit(std::slice::from_ref(&rec), &rec)
        }
        Command::Prop1 { shared, c } => {
            let curve = run_prop1_experiment(shared.n, &c, shared.trials, shared.seed)?;
            shared.emit(&curve.points, &curve)
        }
        Command::Trial { shared, embedding_out, points_out } => {
            let config = shared.config()?;
            let (r, _) = config.resolve_radii()?[0];
            let rec = run_universality_trial(&config, r, config.seed)?;
            if points_out.is_some() || embedding_out.is_some() {
                // Same streams as the trial itself.
                let points = sample_points(config.n, config.d, rgg_universal::harness::derive_seed(config.seed, 0))
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                if let Some(path) = points_out {
                    let colors = color_points(&points, 0.5, rgg_universal::harness::derive_seed(config.seed, 1))
                        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                    points.write_csv(File::create(path)?, Some(&colors)).map_err(|e| ConfigError::Invalid(e.to_string()))?;
                }
                if let (Some(path), Some(map)) = (embedding_out, &rec.embedding) {
                    let emb = rgg_universal::embed::Embedding {
                        map: map.iter().map(|&p| Some(p)).collect(),
                        failure: None,
                        diagnostics: None,
                    };
                    emb.write_csv(File::create(path)?, &points).map_err(|e| ConfigError::Invalid(e.to_string()))?;
                }
            }
            shared.emit(&[TrialRow::from(&rec)], &rec)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
