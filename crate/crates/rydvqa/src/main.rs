use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use rydvqa::config::{EngineKind, Experiment, ExperimentConfig};
use rydvqa::experiments::{self, best, points_table, Instance, Setup};
use rydvqa::output::{self, records_table, JumpLine, TrajectoryLine};
use rydvqa::{seeds, Error, Result};
use rydvqa_core::dynamics::{sample_outcomes, NoiseModel};
use rydvqa_core::graph::{BasisState, UdGraph};
use rydvqa_core::reduction::{effective_two_level, ThreeLevelParams};
use rydvqa_core::variational::{ObjectiveKind, ObjectiveSpec};

#[derive(Parser)]
#[command(
    name = "rydvqa",
    version,
    about = "Variational MIS on noisy Rydberg atom arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// TOML file overriding the experiment defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads (0: one per core).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    engine: Option<EngineKind>,
}

impl Common {
    fn load(&self, experiment: Experiment) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(experiment, self.config.as_deref())?;
        self.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(d) = &self.out_dir {
            cfg.output_dir = d.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(e) = self.engine {
            cfg.engine = e;
        }
    }
}

#[derive(Args)]
struct GraphSource {
    /// Graph JSON written by `generate-graph`.
    #[arg(long, conflicts_with_all = ["n", "density"])]
    graph: Option<PathBuf>,
    #[arg(long, short = 'n')]
    n: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Place atoms at random and write the unit-disk graph as JSON.
    GenerateGraph {
        #[arg(long, short = 'n')]
        n: usize,
        #[arg(long)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact maximum independent set of a graph.
    SolveMis {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Optimize a pulse schedule on one graph.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: GraphSource,
        /// Spontaneous emission rate.
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// `mean` or `cvar:<percent>`; defaults to the config's objective.
        #[arg(long)]
        objective: Option<String>,
        /// Comma-separated start durations; random starts if omitted.
        #[arg(long, value_delimiter = ',')]
        start: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        /// Write one JSON line per trajectory at the best parameters.
        #[arg(long)]
        trajectory_log: Option<PathBuf>,
    },
    /// Approximation ratios of clean, frozen and re-optimized schedules under emission.
    SelfMitigation(Common),
    /// Distances between clean and noisy optima, binned.
    DistanceHistogram(Common),
    /// Energy along the last duration of a fixed three-stage schedule.
    LandscapeSweep(Common),
    /// Clean approximation ratio across atom densities.
    DensitySweep(Common),
    /// Effective two-level parameters of a two-photon ladder, as JSON.
    Reduce {
        #[arg(long)]
        rabi_r: f64,
        #[arg(long)]
        rabi_b: f64,
        #[arg(long, allow_hyphen_values = true)]
        delta1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        delta2: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma_eg: f64,
    },
    /// Recompute one row of a `*_points.csv` table.
    Replay {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        row: usize,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn load_graph(source: &GraphSource, seed: u64) -> Result<(UdGraph, f64)> {
    match (&source.graph, source.n, source.density) {
        (Some(p), _, _) => {
            let g = output::read_graph(p)?;
            let d = g.density();
            Ok((g, d))
        }
        (None, Some(n), Some(d)) => Ok((UdGraph::random(n, d, seed)?, d)),
        _ => Err(Error::Config(
            "give either --graph or both -n and --density".into(),
        )),
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::GenerateGraph {
            n,
            density,
            seed,
            out,
        } => {
            let g = UdGraph::random(n, density, seed)?;
            match out {
                Some(p) => output::write_graph(&p, &g),
                None => print_json(&output::GraphFile::from_graph(&g)),
            }
        }
        Command::SolveMis { source, seed } => {
            let (g, _) = load_graph(&source, seed)?;
            let mis = g.solve_mis_exact()?;
            let members: Vec<usize> = (0..g.n_atoms())
                .filter(|&j| mis.witness.is_occupied(j))
                .collect();
            print_json(&serde_json::json!({
                "n": g.n_atoms(),
                "edges": g.edges().len(),
                "mis_size": mis.size,
                "witness": mis.witness.to_bit_string(),
                "vertices": members,
            }))
        }
        Command::Optimize {
            common,
            source,
            gamma,
            objective,
            start,
            restarts,
            trajectory_log,
        } => optimize(
            common,
            source,
            gamma,
            objective,
            start,
            restarts,
            trajectory_log,
        ),
        Command::SelfMitigation(c) => experiment(Experiment::SelfMitigation, &c),
        Command::DistanceHistogram(c) => experiment(Experiment::DistanceHistogram, &c),
        Command::LandscapeSweep(c) => experiment(Experiment::LandscapeSweep, &c),
        Command::DensitySweep(c) => experiment(Experiment::DensitySweep, &c),
        Command::Reduce {
            rabi_r,
            rabi_b,
            delta1,
            delta2,
            gamma_eg,
        } => {
            let p = ThreeLevelParams::new(rabi_r, rabi_b, delta1, delta2, gamma_eg);
            let e = effective_two_level(&p)?;
            print_json(&serde_json::json!({
                "input": p,
                "rabi": e.rabi,
                "detuning": e.detuning,
                "gamma_se": e.gamma_se,
                "sigma_x_amplitude": e.sigma_x_amplitude(),
                "valid": e.valid,
            }))
        }
        Command::Replay { csv, row } => {
            let report = rydvqa::replay::replay(&csv, row)?;
            print_json(&report)?;
            report.check()
        }
    }
}

fn experiment(kind: Experiment, common: &Common) -> Result<()> {
    let cfg = common.load(kind)?;
    let out = experiments::run(&cfg)?;
    for p in out.write(&cfg.output_dir, &cfg)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn parse_objective(s: &str) -> Result<ObjectiveSpec> {
    if s == "mean" {
        return Ok(ObjectiveSpec::mean());
    }
    let pct = s
        .strip_prefix("cvar:")
        .and_then(|p| p.parse::<f64>().ok())
        .ok_or_else(|| {
            Error::Config(format!(
                "objective must be `mean` or `cvar:<percent>`, got {s:?}"
            ))
        })?;
    Ok(ObjectiveSpec::cvar(pct)?)
}

#[allow(clippy::too_many_arguments)]
fn optimize(
    common: Common,
    source: GraphSource,
    gamma: f64,
    objective: Option<String>,
    start: Option<Vec<f64>>,
    restarts: usize,
    trajectory_log: Option<PathBuf>,
) -> Result<()> {
    let mut cfg = ExperimentConfig::load(Experiment::SelfMitigation, common.config.as_deref())?;
    common.apply(&mut cfg);
    if common.engine.is_none() && common.config.is_none() {
        cfg.engine = EngineKind::Unitary;
    }
    if let Some(o) = objective {
        cfg.objective = parse_objective(&o)?;
    }
    if let Some(s) = &start {
        cfg.stages = s.len();
    }
    cfg.n_restarts = restarts.max(1);
    cfg.gammas = vec![gamma];
    cfg.validate()?;

    let (graph, density) = load_graph(&source, cfg.master_seed)?;
    cfg.n_atoms = graph.n_atoms();
    cfg.densities = vec![density];
    let inst = Instance {
        density_index: 0,
        density,
        graph_id: 0,
        graph_seed: graph.seed().unwrap_or(cfg.master_seed),
        graph,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if cfg.workers > 0 {
        pool = pool.num_threads(cfg.workers);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;

    pool.install(|| -> Result<()> {
        let setup = Setup::new(&cfg, &inst);
        let sim = setup.simulator()?;
        let problem = setup.problem(&sim, setup.noise(gamma)?)?;
        let records = match &start {
            Some(s) => (0..cfg.n_restarts)
                .into_par_iter()
                .map(|r| Ok(problem.optimize(s, &cfg.nelder_mead, r)?))
                .collect::<Result<Vec<_>>>()?,
            None => setup.optimize_all(&problem)?,
        };
        let b = best(&records).clone();
        let dir = &cfg.output_dir;
        output::write_graph(&dir.join("graph.json"), &inst.graph)?;
        let labeled: Vec<_> = records
            .into_iter()
            .map(|r| setup.labeled(gamma, "optimized", r))
            .collect();
        output::write_json(&dir.join("optimize_trace.json"), &labeled)?;
        output::write_table(
            dir,
            &records_table("optimize_records", cfg.stages, &labeled),
            &cfg,
        )?;
        if inst.graph.seed().is_some() {
            let p = setup.point(&problem, b.restart_index, "best", &b.best_params)?;
            output::write_table(
                dir,
                &points_table("optimize_points", cfg.stages, &[p]),
                &cfg,
            )?;
        }
        if let Some(path) = trajectory_log {
            write_trajectory_log(&path, &problem, &b.best_params, gamma, cfg.gamma_dephasing)?;
        }
        print_json(&serde_json::json!({
            "mis_size": problem.mis_size(),
            "best_restart": b.restart_index,
            "best_params": b.best_params,
            "best_objective": b.best_objective,
            "approximation_ratio": b.approximation_ratio,
            "objective": match cfg.objective.kind {
                ObjectiveKind::MeanEnergy => "mean".to_string(),
                ObjectiveKind::Cvar { percent } => format!("cvar:{percent}"),
            },
            "output_dir": dir,
        }))
    })
}

fn write_trajectory_log(
    path: &Path,
    problem: &rydvqa_core::variational::VariationalProblem,
    params: &[f64],
    gamma: f64,
    dephasing: f64,
) -> Result<()> {
    if NoiseModel::new(gamma, dephasing)?.is_noiseless() {
        return Err(Error::Config("a trajectory log needs a noisy run".into()));
    }
    let n = problem.simulator().n_atoms();
    let lines = problem
        .trajectories(params)?
        .into_iter()
        .enumerate()
        .map(|(index, tr)| {
            let p: Vec<f64> = tr.state.amplitudes().iter().map(|a| a.norm_sqr()).collect();
            let z = sample_outcomes(&p, 1, seeds::log_sample(tr.seed))?[0];
            Ok(TrajectoryLine {
                index,
                seed: tr.seed.to_string(),
                jumps: tr
                    .jumps
                    .iter()
                    .map(|j| JumpLine {
                        t: j.time,
                        atom: j.atom,
                        channel: j.channel,
                    })
                    .collect(),
                final_bitstring_sample: BasisState::new(z as u64, n)?.to_bit_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    output::write_jsonl(path, &lines)
}
