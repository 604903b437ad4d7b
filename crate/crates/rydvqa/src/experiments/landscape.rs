//! `⟨C⟩` along `t₂` at fixed `(t₁, τ₁)`, with and without noise.

use rayon::prelude::*;

use super::{instances, points_table, ExperimentOutput, Instance, Point, Setup};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::output::{header, seed_cell, Table};

fn run_graph(cfg: &ExperimentConfig, inst: &Instance) -> Result<Vec<Point>> {
    let setup = Setup::new(cfg, inst);
    let sim = setup.simulator()?;
    let per_gamma = cfg
        .gammas
        .iter()
        .map(|&g| setup.problem(&sim, setup.noise(g)?))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, f64)> = (0..cfg.gammas.len())
        .flat_map(|gi| cfg.landscape.t2_grid.iter().map(move |&t2| (gi, t2)))
        .collect();
    tasks
        .par_iter()
        .map(|&(gi, t2)| {
            let params = [cfg.landscape.t1, cfg.landscape.tau1, t2];
            setup.point(&per_gamma[gi], 0, "landscape", &params)
        })
        .collect()
}

pub fn landscape_sweep(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    if cfg.stages != 3 {
        return Err(Error::Config(
            "the landscape sweep uses three stages (t1, tau1, t2)".into(),
        ));
    }
    let insts = instances(cfg)?;
    let results = insts
        .par_iter()
        .map(|inst| run_graph(cfg, inst))
        .collect::<Result<Vec<_>>>()?;

    let mut curve = Table::new(
        "landscape_sweep_curve",
        header(
            &[
                "density",
                "graph_id",
                "graph_seed",
                "gamma_se",
                "t2",
                "mean_energy",
                "standard_error",
                "approximation_ratio",
            ],
            0,
            &[],
        ),
    );
    let mut argmin = Table::new(
        "landscape_sweep_argmin",
        header(
            &[
                "density",
                "graph_id",
                "graph_seed",
                "gamma_se",
                "t2_argmin",
                "min_mean_energy",
            ],
            0,
            &[],
        ),
    );
    let mut points = Vec::new();
    for (inst, pts) in insts.iter().zip(results) {
        for chunk in pts.chunks(cfg.landscape.t2_grid.len()) {
            let mut lowest: Option<&Point> = None;
            for p in chunk {
                curve.push(vec![
                    inst.density.into(),
                    inst.graph_id.into(),
                    seed_cell(inst.graph_seed),
                    p.gamma_se.into(),
                    p.params[2].into(),
                    p.mean_energy.into(),
                    p.standard_error.into(),
                    (p.mean_energy / p.optimum).into(),
                ]);
                if lowest.is_none_or(|l| p.mean_energy < l.mean_energy) {
                    lowest = Some(p);
                }
            }
            let l = lowest.expect("non-empty grid");
            argmin.push(vec![
                inst.density.into(),
                inst.graph_id.into(),
                seed_cell(inst.graph_seed),
                l.gamma_se.into(),
                l.params[2].into(),
                l.mean_energy.into(),
            ]);
        }
        points.extend(pts);
    }
    Ok(ExperimentOutput {
        tables: vec![
            argmin,
            curve,
            points_table("landscape_sweep_points", 3, &points),
        ],
        records: Vec::new(),
    })
}
