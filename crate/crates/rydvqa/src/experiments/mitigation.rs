//! Noise-free optimum evaluated under noise (`r₁`) versus re-optimized under
//! noise (`r₂`), both relative to the noise-free ratio `r₀`.

use rayon::prelude::*;
use rydvqa_core::dynamics::NoiseModel;

use super::{best, instances, mean_sem, points_table, ExperimentOutput, Instance, Point, Setup};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{header, seed_cell, Cell, LabeledRecord, Table};

struct Row {
    gamma_se: f64,
    r0: f64,
    r1: f64,
    r2: f64,
    clean_restart: usize,
    noisy_restart: usize,
}

struct GraphResult {
    rows: Vec<Row>,
    points: Vec<Point>,
    records: Vec<LabeledRecord>,
}

fn run_graph(cfg: &ExperimentConfig, inst: &Instance) -> Result<GraphResult> {
    let setup = Setup::new(cfg, inst);
    let sim = setup.simulator()?;
    let clean = setup.problem(&sim, NoiseModel::noiseless())?;
    let clean_records = setup.optimize_all(&clean)?;
    let star = best(&clean_records).clone();
    let r0 = star.approximation_ratio;

    let mut points = Vec::new();
    for rec in &clean_records {
        points.push(setup.point(&clean, rec.restart_index, "noise_free", &rec.best_params)?);
    }
    let mut records: Vec<LabeledRecord> = clean_records
        .iter()
        .map(|r| setup.labeled(0.0, "noise_free", r.clone()))
        .collect();

    let per_gamma = cfg
        .gammas
        .par_iter()
        .map(|&gamma| {
            let noise = setup.noise(gamma)?;
            let noisy;
            let (problem, recs) = if noise.is_noiseless() {
                (&clean, clean_records.clone())
            } else {
                noisy = setup.problem(&sim, noise)?;
                let recs = setup.optimize_all(&noisy)?;
                (&noisy, recs)
            };
            let frozen = setup.point(problem, star.restart_index, "frozen", &star.best_params)?;
            let mut pts = vec![frozen.clone()];
            for rec in &recs {
                pts.push(setup.point(
                    problem,
                    rec.restart_index,
                    "reoptimized",
                    &rec.best_params,
                )?);
            }
            let b = best(&recs);
            let row = Row {
                gamma_se: gamma,
                r0,
                r1: frozen.approximation_ratio,
                r2: b.approximation_ratio,
                clean_restart: star.restart_index,
                noisy_restart: b.restart_index,
            };
            let labeled: Vec<_> = recs
                .into_iter()
                .map(|r| setup.labeled(gamma, "reoptimized", r))
                .collect();
            Ok((row, pts, labeled))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (row, pts, recs) in per_gamma {
        rows.push(row);
        points.extend(pts);
        records.extend(recs);
    }
    Ok(GraphResult {
        rows,
        points,
        records,
    })
}

pub fn self_mitigation(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let insts = instances(cfg)?;
    let results = insts
        .par_iter()
        .map(|inst| run_graph(cfg, inst))
        .collect::<Result<Vec<_>>>()?;

    let mut graphs = Table::new(
        "self_mitigation_graphs",
        header(
            &[
                "density",
                "graph_id",
                "graph_seed",
                "gamma_se",
                "r0",
                "r1",
                "r2",
                "r1_over_r0",
                "r2_over_r0",
                "clean_restart",
                "noisy_restart",
            ],
            0,
            &[],
        ),
    );
    let mut points = Vec::new();
    let mut records = Vec::new();
    for (inst, res) in insts.iter().zip(results) {
        for row in &res.rows {
            graphs.push(vec![
                inst.density.into(),
                inst.graph_id.into(),
                seed_cell(inst.graph_seed),
                row.gamma_se.into(),
                row.r0.into(),
                row.r1.into(),
                row.r2.into(),
                (row.r1 / row.r0).into(),
                (row.r2 / row.r0).into(),
                row.clean_restart.into(),
                row.noisy_restart.into(),
            ]);
        }
        points.extend(res.points);
        records.extend(res.records);
    }

    let summary = summarize(cfg, &graphs);
    Ok(ExperimentOutput {
        tables: vec![
            summary,
            graphs,
            points_table("self_mitigation_points", cfg.stages, &points),
        ],
        records,
    })
}

/// Per (density, Γ) means of the per-graph ratios.
pub(crate) fn summarize(cfg: &ExperimentConfig, graphs: &Table) -> Table {
    let mut t = Table::new(
        "self_mitigation_summary",
        header(
            &[
                "density",
                "gamma_se",
                "n_graphs",
                "mean_r0",
                "mean_r1_over_r0",
                "sem_r1_over_r0",
                "mean_r2_over_r0",
                "sem_r2_over_r0",
            ],
            0,
            &[],
        ),
    );
    let col = |name: &str| graphs.column(name).expect("known column");
    let (cd, cg, c0, c1, c2) = (
        col("density"),
        col("gamma_se"),
        col("r0"),
        col("r1_over_r0"),
        col("r2_over_r0"),
    );
    let num = |c: &Cell| match c {
        Cell::Float(v) => *v,
        _ => f64::NAN,
    };
    for &density in &cfg.densities {
        for &gamma in &cfg.gammas {
            let sel: Vec<&Vec<Cell>> = graphs
                .rows
                .iter()
                .filter(|r| num(&r[cd]) == density && num(&r[cg]) == gamma)
                .collect();
            let pick = |c: usize| sel.iter().map(|r| num(&r[c])).collect::<Vec<_>>();
            let (m0, _) = mean_sem(&pick(c0));
            let (m1, s1) = mean_sem(&pick(c1));
            let (m2, s2) = mean_sem(&pick(c2));
            t.push(vec![
                density.into(),
                gamma.into(),
                sel.len().into(),
                m0.into(),
                m1.into(),
                s1.into(),
                m2.into(),
                s2.into(),
            ]);
        }
    }
    t
}
