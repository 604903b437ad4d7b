use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::*;
use crate::dynamics::{NoiseModel, PulseSchedule, SimulatorConfig};
use crate::error::Error;
use crate::graph::{BasisState, UdGraph};
use crate::hamiltonian::{classical_cost, CostFunction, CostSpec};

fn problem(graph: &UdGraph, noise: NoiseModel, engine: Engine) -> VariationalProblem {
    VariationalProblem::new(
        graph,
        noise,
        engine,
        ObjectiveSpec::mean(),
        CostFunction::default(),
        SimulatorConfig::default(),
    )
    .unwrap()
}

#[test]
fn single_atom_optimum_is_a_pi_half_pulse() {
    let g = UdGraph::from_positions(vec![[0.5, 0.5]], 1.0).unwrap();
    let rec = optimize(
        &g,
        &NoiseModel::noiseless(),
        &ObjectiveSpec::mean(),
        Engine::Unitary,
        &PulseSchedule::new(vec![1.0]).unwrap(),
        &NelderMeadConfig::default(),
    )
    .unwrap();
    assert!(
        (rec.best_params[0] - PI / 2.0).abs() < 1e-2,
        "{:?}",
        rec.best_params
    );
    assert!((rec.best_objective + 1.0).abs() < 1e-4);
    assert!((rec.approximation_ratio - 1.0).abs() < 1e-4);
}

#[test]
fn rosenbrock_default_config() {
    let m = minimize(
        |x| Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)),
        &[-1.2, 1.0],
        &NelderMeadConfig::default(),
    )
    .unwrap();
    assert!(m.evaluations.len() <= 200);
    assert!((m.params[0] - 1.0).abs() < 1e-4 && (m.params[1] - 1.0).abs() < 1e-4);
}

#[test]
fn record_invariants() {
    let g = UdGraph::random(4, 2.6, 12).unwrap();
    let p = problem(&g, NoiseModel::noiseless(), Engine::Unitary);
    let start = uniform_start(3, 5);
    let rec = p.optimize(&start, &NelderMeadConfig::default(), 2).unwrap();
    let min = rec
        .trace
        .iter()
        .map(|e| e.objective)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(rec.best_objective, min);
    assert!(rec.best_objective <= rec.trace[0].objective);
    assert_eq!(rec.trace[0].params, start);
    assert_eq!(rec.restart_index, 2);
    assert_eq!(rec.evaluations, rec.trace.len());
    assert!(rec.best_params.iter().all(|&x| x >= 0.0));
    assert!((p.evaluate(&rec.best_params).unwrap() - rec.best_objective).abs() < 1e-12);
}

#[test]
fn negative_durations_map_through_abs() {
    let g = UdGraph::random(3, 2.0, 4).unwrap();
    let p = problem(&g, NoiseModel::noiseless(), Engine::Unitary);
    let a = p.evaluate(&[0.4, -1.3, 0.8]).unwrap();
    let b = p.evaluate(&[0.4, 1.3, 0.8]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn every_engine_is_unitary_without_noise() {
    let g = UdGraph::random(4, 2.6, 3).unwrap();
    let x = [1.5, 1.0, 1.0];
    let u = problem(&g, NoiseModel::noiseless(), Engine::Unitary)
        .distribution(&x)
        .unwrap();
    for engine in [
        Engine::Lindblad,
        Engine::Trajectory {
            trajectories: 3,
            seed: 1,
        },
    ] {
        let d = problem(&g, NoiseModel::noiseless(), engine)
            .distribution(&x)
            .unwrap();
        assert_eq!(d, u);
    }
}

#[test]
fn trajectory_engine_is_deterministic_and_close_to_lindblad() {
    let g = UdGraph::random(3, 2.6, 7).unwrap();
    let noise = NoiseModel::emission(0.3).unwrap();
    let x = [1.5, 1.0, 1.0];
    let engine = Engine::Trajectory {
        trajectories: 400,
        seed: 99,
    };
    let t = problem(&g, noise, engine);
    let a = t.mean_energy(&x).unwrap();
    assert_eq!(a, t.mean_energy(&x).unwrap());
    let l = problem(&g, noise, Engine::Lindblad)
        .mean_energy(&x)
        .unwrap();
    assert!((a - l).abs() < 0.1, "{a} vs {l}");
}

#[test]
fn energy_statistics_agree_with_score() {
    let g = UdGraph::random(3, 2.6, 7).unwrap();
    let x = [1.5, 1.0, 1.0];
    let engine = Engine::Trajectory {
        trajectories: 200,
        seed: 5,
    };
    let t = problem(&g, NoiseModel::emission(0.3).unwrap(), engine);
    let s = t.energy_statistics(&x).unwrap();
    assert_eq!(s.mean.to_bits(), t.score(&x).unwrap().mean_energy.to_bits());
    assert!(s.standard_error > 0.0 && s.standard_error < 0.2);

    let clean = problem(&g, NoiseModel::noiseless(), engine)
        .energy_statistics(&x)
        .unwrap();
    assert_eq!(clean.standard_error, 0.0);
}

#[test]
fn lindblad_cap_is_a_resource_limit() {
    let g = UdGraph::random(11, 1.0, 0).unwrap();
    let err = VariationalProblem::new(
        &g,
        NoiseModel::emission(0.1).unwrap(),
        Engine::Lindblad,
        ObjectiveSpec::mean(),
        CostFunction::default(),
        SimulatorConfig::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::ResourceLimit { .. }));
}

#[test]
fn tiny_noise_is_continuous() {
    let g = UdGraph::random(3, 2.6, 2).unwrap();
    let start = [1.0, 0.5, 1.2];
    let cfg = NelderMeadConfig::default();
    let clean = problem(&g, NoiseModel::noiseless(), Engine::Lindblad)
        .optimize(&start, &cfg, 0)
        .unwrap();
    let noisy = problem(&g, NoiseModel::emission(1e-6).unwrap(), Engine::Lindblad)
        .optimize(&start, &cfg, 0)
        .unwrap();
    assert!(param_distance(&clean.best_params, &noisy.best_params).unwrap() < 1e-3);
}

#[test]
fn ratio_examples() {
    let g = UdGraph::random(8, 2.6, 31).unwrap();
    let spec = CostSpec::default();
    let mis = g.solve_mis_exact().unwrap().size;
    assert_eq!(
        approximation_ratio(spec.optimum(mis), &g, &spec).unwrap(),
        1.0
    );
    assert_eq!(approximation_ratio(0.0, &g, &spec).unwrap(), 0.0);

    // Uniform distribution, brute force on both sides.
    let mut mean = 0.0;
    let mut best = 0usize;
    for z in 0..256u64 {
        let s = BasisState::new(z, 8).unwrap();
        mean += classical_cost(&spec, &g, &s).unwrap() / 256.0;
        if g.is_independent_set(&s).unwrap() {
            best = best.max(z.count_ones() as usize);
        }
    }
    let r = approximation_ratio(mean, &g, &spec).unwrap();
    assert!((r - mean / -(best as f64)).abs() < 1e-12);
}

#[test]
fn ratio_is_invariant_under_relabeling() {
    let g = UdGraph::random(6, 2.6, 17).unwrap();
    let mut pos: Vec<[f64; 2]> = g.positions().to_vec();
    pos.reverse();
    pos.swap(0, 3);
    let h = UdGraph::from_positions(pos, g.box_side()).unwrap();
    let x = [1.2, 0.7, 0.9];
    let pg = problem(&g, NoiseModel::noiseless(), Engine::Unitary);
    let ph = problem(&h, NoiseModel::noiseless(), Engine::Unitary);
    let rg = pg.approximation_ratio(pg.mean_energy(&x).unwrap()).unwrap();
    let rh = ph.approximation_ratio(ph.mean_energy(&x).unwrap()).unwrap();
    assert!((rg - rh).abs() < 1e-9, "{rg} vs {rh}");
}

#[test]
fn distance_examples() {
    assert_eq!(param_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    assert_eq!(
        param_distance(&[1.0, 1.0, 1.0], &[1.0, 1.0, 2.0]).unwrap(),
        1.0
    );
    assert_eq!(
        param_distance(&[0.0, 0.0, 0.0], &[1.0, 2.0, 2.0]).unwrap(),
        3.0
    );
    assert!(param_distance(&[0.0], &[0.0, 1.0]).is_err());
}

#[test]
fn uniform_start_is_in_range_and_reproducible() {
    let a = uniform_start(3, 8);
    assert_eq!(a, uniform_start(3, 8));
    assert!(a.iter().all(|&x| (0.0..PI).contains(&x)));
}
