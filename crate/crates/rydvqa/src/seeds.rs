//! Derived seeds. Every random draw of an experiment hangs off the master
//! seed through one of these paths, so results never depend on which worker
//! ran which task.

use rydvqa_core::rng::derive_seed;

const GRAPH: u64 = 1;
const START: u64 = 2;
const TRAJECTORY: u64 = 3;
const SAMPLING: u64 = 4;
const LOG: u64 = 5;

pub fn graph(master: u64, density_index: usize, graph_id: usize) -> u64 {
    derive_seed(master, &[GRAPH, density_index as u64, graph_id as u64])
}

pub fn start(master: u64, density_index: usize, graph_id: usize, restart: usize) -> u64 {
    derive_seed(
        master,
        &[START, density_index as u64, graph_id as u64, restart as u64],
    )
}

/// Shared by every evaluation on one graph, whatever the noise rate.
pub fn trajectories(master: u64, density_index: usize, graph_id: usize) -> u64 {
    derive_seed(master, &[TRAJECTORY, density_index as u64, graph_id as u64])
}

pub fn sampling(master: u64, density_index: usize, graph_id: usize) -> u64 {
    derive_seed(master, &[SAMPLING, density_index as u64, graph_id as u64])
}

/// Bitstring draws written to trajectory logs.
pub fn log_sample(trajectory_seed: u64) -> u64 {
    derive_seed(trajectory_seed, &[LOG])
}
