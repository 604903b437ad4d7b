//! Noise-free (by default) optimization across graph densities.

use rayon::prelude::*;

use super::{best, instances, mean_std, points_table, ExperimentOutput, Instance, Point, Setup};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{header, seed_cell, Cell, LabeledRecord, Table};

struct Row {
    gamma_se: f64,
    mis_size: usize,
    r0: f64,
    r0_mean_energy: f64,
    restart: usize,
}

fn run_graph(
    cfg: &ExperimentConfig,
    inst: &Instance,
) -> Result<(Vec<Row>, Vec<Point>, Vec<LabeledRecord>)> {
    let setup = Setup::new(cfg, inst);
    let sim = setup.simulator()?;
    let mut rows = Vec::new();
    let mut points = Vec::new();
    let mut records = Vec::new();
    for &gamma in &cfg.gammas {
        let problem = setup.problem(&sim, setup.noise(gamma)?)?;
        let recs = setup.optimize_all(&problem)?;
        let b = best(&recs);
        let p = setup.point(&problem, b.restart_index, "best", &b.best_params)?;
        rows.push(Row {
            gamma_se: gamma,
            mis_size: problem.mis_size(),
            r0: p.approximation_ratio,
            r0_mean_energy: p.mean_energy / problem.optimum(),
            restart: b.restart_index,
        });
        points.push(p);
        records.extend(
            recs.into_iter()
                .map(|r| setup.labeled(gamma, "optimized", r)),
        );
    }
    Ok((rows, points, records))
}

pub fn density_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let insts = instances(cfg)?;
    let results = insts
        .par_iter()
        .map(|inst| run_graph(cfg, inst))
        .collect::<Result<Vec<_>>>()?;

    let mut graphs = Table::new(
        "density_sweep_graphs",
        header(
            &[
                "density",
                "graph_id",
                "graph_seed",
                "n_edges",
                "mis_size",
                "gamma_se",
                "r0",
                "r0_mean_energy",
                "best_restart",
            ],
            0,
            &[],
        ),
    );
    let mut points = Vec::new();
    let mut records = Vec::new();
    for (inst, (rows, pts, recs)) in insts.iter().zip(results) {
        for r in rows {
            graphs.push(vec![
                inst.density.into(),
                inst.graph_id.into(),
                seed_cell(inst.graph_seed),
                inst.graph.edges().len().into(),
                r.mis_size.into(),
                r.gamma_se.into(),
                r.r0.into(),
                r.r0_mean_energy.into(),
                r.restart.into(),
            ]);
        }
        points.extend(pts);
        records.extend(recs);
    }
    let summary = summarize(cfg, &graphs);
    Ok(ExperimentOutput {
        tables: vec![
            summary,
            graphs,
            points_table("density_sweep_points", cfg.stages, &points),
        ],
        records,
    })
}

pub(crate) fn summarize(cfg: &ExperimentConfig, graphs: &Table) -> Table {
    let mut t = Table::new(
        "density_sweep_summary",
        header(
            &[
                "density",
                "gamma_se",
                "n_graphs",
                "mean_r0",
                "std_r0",
                "mean_r0_mean_energy",
                "std_r0_mean_energy",
            ],
            0,
            &[],
        ),
    );
    let col = |name: &str| graphs.column(name).expect("known column");
    let (cd, cg, c0, cm) = (
        col("density"),
        col("gamma_se"),
        col("r0"),
        col("r0_mean_energy"),
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
            let (m0, s0) = mean_std(&sel.iter().map(|r| num(&r[c0])).collect::<Vec<_>>());
            let (mm, sm) = mean_std(&sel.iter().map(|r| num(&r[cm])).collect::<Vec<_>>());
            t.push(vec![
                density.into(),
                gamma.into(),
                sel.len().into(),
                m0.into(),
                s0.into(),
                mm.into(),
                sm.into(),
            ]);
        }
    }
    t
}
