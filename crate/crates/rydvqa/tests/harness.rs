use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use rydvqa::config::{EngineKind, Experiment, ExperimentConfig};
use rydvqa::experiments::{mean_sem, mean_std, run};
use rydvqa::output::CsvFile;
use rydvqa::replay::replay;

fn tiny(experiment: Experiment) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(experiment);
    cfg.n_atoms = 4;
    cfg.n_graphs = 2;
    cfg.n_restarts = 2;
    cfg.trajectories = 24;
    cfg.master_seed = 11;
    cfg.nelder_mead.max_evaluations = 30;
    match experiment {
        Experiment::SelfMitigation => cfg.gammas = vec![0.0, 0.1, 0.3],
        Experiment::DistanceHistogram => cfg.gammas = vec![0.2],
        Experiment::LandscapeSweep => cfg.landscape.t2_grid = vec![0.0, 0.7, 1.4],
        Experiment::DensitySweep => cfg.densities = vec![1.0, 4.0],
    }
    cfg
}

const ALL: [Experiment; 4] = [
    Experiment::SelfMitigation,
    Experiment::DistanceHistogram,
    Experiment::LandscapeSweep,
    Experiment::DensitySweep,
];

fn write(cfg: &ExperimentConfig, dir: &Path) -> BTreeMap<String, Vec<u8>> {
    run(cfg).unwrap().write(dir, cfg).unwrap();
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect()
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    for e in ALL {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(e);
        cfg.workers = 1;
        let a = write(&cfg, &dir.path().join("a"));
        cfg.workers = 3;
        let b = write(&cfg, &dir.path().join("b"));
        // The sidecars echo the worker count; everything else must match.
        for (name, bytes) in &a {
            if name.ends_with(".csv") || name.ends_with("_trace.json") {
                assert_eq!(bytes, &b[name], "{name} differs");
            }
        }
        assert_eq!(a.len(), b.len());
    }
}

#[test]
fn every_point_replays_exactly() {
    for e in ALL {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny(e);
        if e == Experiment::LandscapeSweep {
            cfg.engine = EngineKind::Trajectory;
        }
        write(&cfg, dir.path());
        let csv = dir.path().join(format!("{}_points.csv", e.name()));
        let rows = CsvFile::read(&csv).unwrap().rows.len();
        assert!(rows > 0);
        for row in 0..rows {
            let r = replay(&csv, row).unwrap();
            assert!(r.exact, "{} row {row}: {r:?}", e.name());
        }
    }
}

fn floats(f: &CsvFile, col: &str) -> Vec<f64> {
    (0..f.rows.len())
        .map(|r| f.get::<f64>(r, col).unwrap())
        .collect()
}

#[test]
fn self_mitigation_invariants_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(Experiment::SelfMitigation);
    write(&cfg, dir.path());
    let graphs = CsvFile::read(&dir.path().join("self_mitigation_graphs.csv")).unwrap();
    let summary = CsvFile::read(&dir.path().join("self_mitigation_summary.csv")).unwrap();
    let gam = floats(&graphs, "gamma_se");
    let r1 = floats(&graphs, "r1_over_r0");
    let r2 = floats(&graphs, "r2_over_r0");
    for i in 0..gam.len() {
        if gam[i] == 0.0 {
            assert_eq!(r1[i], 1.0);
            assert_eq!(r2[i], 1.0);
        } else {
            assert!(r1[i] < 1.0 && r2[i] < 1.0);
        }
    }
    for (row, g) in floats(&summary, "gamma_se").into_iter().enumerate() {
        let sel = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .zip(&gam)
                .filter(|(_, x)| **x == g)
                .map(|(y, _)| *y)
                .collect()
        };
        let (m1, s1) = mean_sem(&sel(&r1));
        let (m2, s2) = mean_sem(&sel(&r2));
        assert!((m1 - summary.get::<f64>(row, "mean_r1_over_r0").unwrap()).abs() <= 1e-12);
        assert!((s1 - summary.get::<f64>(row, "sem_r1_over_r0").unwrap()).abs() <= 1e-12);
        assert!((m2 - summary.get::<f64>(row, "mean_r2_over_r0").unwrap()).abs() <= 1e-12);
        assert!((s2 - summary.get::<f64>(row, "sem_r2_over_r0").unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn distance_control_is_zero_and_histogram_matches_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(Experiment::DistanceHistogram);
    write(&cfg, dir.path());
    let d = CsvFile::read(&dir.path().join("distance_histogram_distances.csv")).unwrap();
    let bins = CsvFile::read(&dir.path().join("distance_histogram_bins.csv")).unwrap();
    let mut counts: BTreeMap<(String, usize), usize> = BTreeMap::new();
    for r in 0..d.rows.len() {
        let kind: String = d.get(r, "kind").unwrap();
        let dist: f64 = d.get(r, "distance").unwrap();
        if kind == "control" {
            assert_eq!(dist, 0.0);
        }
        *counts
            .entry((kind, (dist / cfg.histogram.bin_width).floor() as usize))
            .or_default() += 1;
    }
    for r in 0..bins.rows.len() {
        let kind: String = bins.get(r, "kind").unwrap();
        let bin: usize = bins.get(r, "bin").unwrap();
        let c: usize = bins.get(r, "count").unwrap();
        assert_eq!(c, counts.get(&(kind, bin)).copied().unwrap_or(0));
    }
    assert_eq!(d.rows.len(), 2 * cfg.n_graphs * cfg.n_restarts);
}

#[test]
fn landscape_zero_stage_matches_two_stage_preparation() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = tiny(Experiment::LandscapeSweep);
    cfg.engine = EngineKind::Unitary;
    cfg.gammas = vec![0.0];
    write(&cfg, dir.path());
    let curve = CsvFile::read(&dir.path().join("landscape_sweep_curve.csv")).unwrap();
    let insts = rydvqa::experiments::instances(&cfg).unwrap();
    let t2 = floats(&curve, "t2");
    let e = floats(&curve, "mean_energy");
    let gid: Vec<usize> = (0..curve.rows.len())
        .map(|r| curve.get(r, "graph_id").unwrap())
        .collect();
    for i in 0..t2.len() {
        if t2[i] != 0.0 {
            continue;
        }
        let p = rydvqa_core::variational::VariationalProblem::new(
            &insts[gid[i]].graph,
            rydvqa_core::dynamics::NoiseModel::noiseless(),
            rydvqa_core::variational::Engine::Unitary,
            cfg.objective,
            cfg.cost,
            cfg.simulator,
        )
        .unwrap();
        let two = p
            .mean_energy(&[cfg.landscape.t1, cfg.landscape.tau1])
            .unwrap();
        assert_eq!(e[i], two);
    }
}

#[test]
fn landscape_noise_effect_vanishes_for_short_schedules() {
    let mut cfg = tiny(Experiment::LandscapeSweep);
    cfg.engine = EngineKind::Lindblad;
    cfg.n_graphs = 1;
    cfg.landscape.t2_grid = vec![0.0];
    let mut gaps = Vec::new();
    for scale in [1.0, 0.1, 0.01] {
        cfg.landscape.t1 = 1.5 * scale;
        cfg.landscape.tau1 = 1.0 * scale;
        let out = run(&cfg).unwrap();
        let t = out.table("landscape_sweep_curve").unwrap();
        let c = t.column("mean_energy").unwrap();
        let v: Vec<f64> = t
            .rows
            .iter()
            .map(|r| match r[c] {
                rydvqa::output::Cell::Float(x) => x,
                _ => unreachable!(),
            })
            .collect();
        gaps.push((v[1] - v[0]).abs());
    }
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
    assert!(gaps[2] < 1e-3);
}

#[test]
fn density_summary_matches_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(Experiment::DensitySweep);
    write(&cfg, dir.path());
    let graphs = CsvFile::read(&dir.path().join("density_sweep_graphs.csv")).unwrap();
    let summary = CsvFile::read(&dir.path().join("density_sweep_summary.csv")).unwrap();
    let dens = floats(&graphs, "density");
    for (row, nu) in floats(&summary, "density").into_iter().enumerate() {
        for (col, agg) in [("r0", "r0"), ("r0_mean_energy", "r0_mean_energy")] {
            let xs: Vec<f64> = floats(&graphs, col)
                .into_iter()
                .zip(&dens)
                .filter(|(_, d)| **d == nu)
                .map(|(x, _)| x)
                .collect();
            let (m, s) = mean_std(&xs);
            assert!((m - summary.get::<f64>(row, &format!("mean_{agg}")).unwrap()).abs() <= 1e-12);
            assert!((s - summary.get::<f64>(row, &format!("std_{agg}")).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn lindblad_cap_surfaces_as_an_error() {
    let mut cfg = tiny(Experiment::SelfMitigation);
    cfg.n_atoms = 11;
    cfg.n_graphs = 1;
    let err = run(&cfg).unwrap_err();
    assert!(err.to_string().contains("density-matrix atoms"), "{err}");
}

fn cli(args: &[&str], dir: &Path) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_rydvqa"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn command_line_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    cli(
        &[
            "generate-graph",
            "-n",
            "5",
            "--density",
            "2.6",
            "--seed",
            "9",
            "--out",
            "g.json",
        ],
        d,
    );
    let mis: serde_json::Value =
        serde_json::from_str(&cli(&["solve-mis", "--graph", "g.json"], d)).unwrap();
    let g = rydvqa_core::graph::UdGraph::random(5, 2.6, 9).unwrap();
    assert_eq!(mis["mis_size"], g.solve_mis_exact().unwrap().size);

    fs::write(
        d.join("opt.toml"),
        "trajectories = 16\n[nelder_mead]\nmax_evaluations = 20\n",
    )
    .unwrap();
    cli(
        &[
            "optimize",
            "--graph",
            "g.json",
            "--gamma",
            "0.2",
            "--engine",
            "trajectory",
            "--config",
            "opt.toml",
            "--out-dir",
            "opt",
            "--trajectory-log",
            "opt/log.jsonl",
        ],
        d,
    );
    let log = fs::read_to_string(d.join("opt/log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 16);
    let first: serde_json::Value = serde_json::from_str(log.lines().next().unwrap()).unwrap();
    assert_eq!(first["final_bitstring_sample"].as_str().unwrap().len(), 5);
    cli(
        &["replay", "--csv", "opt/optimize_points.csv", "--row", "0"],
        d,
    );

    fs::write(
        d.join("ds.toml"),
        "n_atoms = 4\nn_graphs = 2\ndensities = [2.0]\n[nelder_mead]\nmax_evaluations = 20\n",
    )
    .unwrap();
    let listed = cli(
        &[
            "density-sweep",
            "--config",
            "ds.toml",
            "--out-dir",
            "ds",
            "--seed",
            "3",
            "--workers",
            "2",
        ],
        d,
    );
    assert!(listed.contains("density_sweep_summary.csv"));
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("ds/density_sweep_summary.json")).unwrap())
            .unwrap();
    assert_eq!(side["config"]["master_seed"], 3);
    assert_eq!(side["config"]["n_atoms"], 4);
    assert_eq!(side["version"], env!("CARGO_PKG_VERSION"));

    let red: serde_json::Value = serde_json::from_str(&cli(
        &[
            "reduce",
            "--rabi-r",
            "1",
            "--rabi-b",
            "1",
            "--delta1",
            "10",
            "--gamma-eg",
            "1",
        ],
        d,
    ))
    .unwrap();
    assert!((red["rabi"].as_f64().unwrap() - 0.05).abs() < 1e-15);
    assert_eq!(red["valid"], true);
}
