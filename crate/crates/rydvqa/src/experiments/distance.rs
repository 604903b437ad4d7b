//! Distance between noise-free and noisy optima reached from identical
//! starts, with a noise-free control run that must land on the same point.

use rayon::prelude::*;
use rydvqa_core::dynamics::NoiseModel;
use rydvqa_core::variational::param_distance;

use super::{instances, points_table, ExperimentOutput, Instance, Point, Setup};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::output::{header, seed_cell, LabeledRecord, Table};

pub const CONTROL: &str = "control";
pub const NOISY: &str = "noisy";

struct Distance {
    restart: usize,
    gamma_se: f64,
    kind: &'static str,
    d: f64,
}

struct GraphResult {
    distances: Vec<Distance>,
    points: Vec<Point>,
    records: Vec<LabeledRecord>,
}

fn run_graph(cfg: &ExperimentConfig, inst: &Instance) -> Result<GraphResult> {
    let setup = Setup::new(cfg, inst);
    let sim = setup.simulator()?;
    let clean = setup.problem(&sim, NoiseModel::noiseless())?;
    // Built independently of `clean` so the control exercises the whole path.
    let control = setup.problem(&sim, NoiseModel::noiseless())?;

    let mut runs = vec![(0.0, CONTROL, control)];
    for &g in &cfg.gammas {
        runs.push((g, NOISY, setup.problem(&sim, setup.noise(g)?)?));
    }
    let clean_records = setup.optimize_all(&clean)?;
    let other = runs
        .par_iter()
        .map(|(_, _, p)| setup.optimize_all(p))
        .collect::<Result<Vec<_>>>()?;

    let mut out = GraphResult {
        distances: Vec::new(),
        points: Vec::new(),
        records: Vec::new(),
    };
    for rec in &clean_records {
        out.points
            .push(setup.point(&clean, rec.restart_index, "noise_free", &rec.best_params)?);
        out.records
            .push(setup.labeled(0.0, "noise_free", rec.clone()));
    }
    for ((gamma, kind, problem), recs) in runs.iter().zip(other) {
        for (a, b) in clean_records.iter().zip(&recs) {
            out.distances.push(Distance {
                restart: a.restart_index,
                gamma_se: *gamma,
                kind,
                d: param_distance(&a.best_params, &b.best_params)?,
            });
            out.points
                .push(setup.point(problem, b.restart_index, kind, &b.best_params)?);
        }
        out.records
            .extend(recs.into_iter().map(|r| setup.labeled(*gamma, kind, r)));
    }
    Ok(out)
}

pub fn distance_histogram(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let insts = instances(cfg)?;
    let results = insts
        .par_iter()
        .map(|inst| run_graph(cfg, inst))
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(
        "distance_histogram_distances",
        header(
            &[
                "density",
                "graph_id",
                "graph_seed",
                "restart",
                "gamma_se",
                "kind",
                "distance",
            ],
            0,
            &[],
        ),
    );
    let mut points = Vec::new();
    let mut records = Vec::new();
    let mut all = Vec::new();
    for (inst, res) in insts.iter().zip(results) {
        for d in &res.distances {
            table.push(vec![
                inst.density.into(),
                inst.graph_id.into(),
                seed_cell(inst.graph_seed),
                d.restart.into(),
                d.gamma_se.into(),
                d.kind.into(),
                d.d.into(),
            ]);
        }
        all.extend(res.distances);
        points.extend(res.points);
        records.extend(res.records);
    }

    let groups: Vec<(f64, &str)> = std::iter::once((0.0, CONTROL))
        .chain(cfg.gammas.iter().map(|&g| (g, NOISY)))
        .collect();
    let width = cfg.histogram.bin_width;
    let max_d = all.iter().map(|d| d.d).fold(0.0, f64::max);
    let n_bins = bin_of(max_d, width) + 1;

    let mut bins = Table::new(
        "distance_histogram_bins",
        header(
            &[
                "gamma_se", "kind", "bin", "lower", "upper", "count", "fraction",
            ],
            0,
            &[],
        ),
    );
    let mut summary = Table::new(
        "distance_histogram_summary",
        header(
            &[
                "gamma_se",
                "kind",
                "n",
                "modal_bin",
                "lowest_bin_fraction",
                "tail_threshold",
                "tail_fraction",
                "max_distance",
            ],
            0,
            &[],
        ),
    );
    for (gamma, kind) in groups {
        let ds: Vec<f64> = all
            .iter()
            .filter(|d| d.kind == kind && d.gamma_se == gamma)
            .map(|d| d.d)
            .collect();
        let h = histogram(&ds, width, n_bins);
        let n = ds.len();
        for (b, &c) in h.iter().enumerate() {
            bins.push(vec![
                gamma.into(),
                kind.into(),
                b.into(),
                (b as f64 * width).into(),
                ((b + 1) as f64 * width).into(),
                c.into(),
                (c as f64 / n as f64).into(),
            ]);
        }
        let modal = modal_bin(&h);
        let tail = ds
            .iter()
            .filter(|&&d| d > cfg.histogram.tail_threshold)
            .count();
        summary.push(vec![
            gamma.into(),
            kind.into(),
            n.into(),
            modal.into(),
            (h[0] as f64 / n as f64).into(),
            cfg.histogram.tail_threshold.into(),
            (tail as f64 / n as f64).into(),
            ds.iter().cloned().fold(0.0, f64::max).into(),
        ]);
    }

    Ok(ExperimentOutput {
        tables: vec![
            summary,
            bins,
            table,
            points_table("distance_histogram_points", cfg.stages, &points),
        ],
        records,
    })
}

/// Bin `k` holds `[k w, (k + 1) w)`.
pub fn bin_of(d: f64, width: f64) -> usize {
    (d / width).floor() as usize
}

pub fn histogram(ds: &[f64], width: f64, n_bins: usize) -> Vec<usize> {
    let mut h = vec![0; n_bins.max(1)];
    for &d in ds {
        let b = bin_of(d, width).min(h.len() - 1);
        h[b] += 1;
    }
    h
}

/// Fullest bin; ties go to the lowest.
pub fn modal_bin(h: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in h.iter().enumerate() {
        if c > h[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binning() {
        let h = histogram(&[0.0, 0.05, 0.1, 0.35, 0.35], 0.1, 4);
        assert_eq!(h, vec![2, 1, 0, 2]);
        assert_eq!(modal_bin(&h), 0);
        assert_eq!(modal_bin(&[1, 3, 3]), 1);
        assert_eq!(histogram(&[], 0.1, 0), vec![0]);
    }
}
