//! Unit-disk graphs of atoms in a square box.

mod mis;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::rng;
use crate::BLOCKADE_RADIUS;

pub use mis::{max_independent_set, MisSolution, MAX_EXACT_ATOMS};

/// Largest supported number of atoms; adjacency is stored as `u64` masks.
pub const MAX_ATOMS: usize = 64;

/// A computational basis state `z = (z_0, …, z_{N-1})`.
///
/// Atom `j` is stored on bit `j` of [`BasisState::bits`]; the integer
/// encoding is therefore `Σ_j z_j 2^j`. The textual form lists `z_0` first,
/// so `"110"` means atoms 0 and 1 are occupied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BasisState {
    bits: u64,
    n_atoms: usize,
}

impl BasisState {
    pub fn new(bits: u64, n_atoms: usize) -> Result<Self> {
        if n_atoms > MAX_ATOMS {
            return Err(Error::limit("atoms", MAX_ATOMS, n_atoms));
        }
        if n_atoms < 64 && bits >> n_atoms != 0 {
            return Err(Error::invalid("basis state has bits beyond the atom count"));
        }
        Ok(Self { bits, n_atoms })
    }

    /// The all-ground state `|00…0⟩`.
    pub fn ground(n_atoms: usize) -> Self {
        Self { bits: 0, n_atoms }
    }

    /// Parse a bit string such as `"101"`; the first character is atom 0.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits = 0u64;
        let mut n = 0usize;
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => {
                    if j >= MAX_ATOMS {
                        return Err(Error::limit("atoms", MAX_ATOMS, j + 1));
                    }
                    bits |= 1 << j;
                }
                _ => return Err(Error::invalid("bit strings may only contain '0' and '1'")),
            }
            n = j + 1;
        }
        Self::new(bits, n)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Index of this state in a `2^N` amplitude vector.
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn is_occupied(&self, atom: usize) -> bool {
        atom < self.n_atoms && (self.bits >> atom) & 1 == 1
    }

    pub fn popcount(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.n_atoms)
            .map(|j| if self.is_occupied(j) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for j in 0..self.n_atoms {
            f.write_str(if self.is_occupied(j) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Atoms in an `L × L` box together with their unit-disk edge set.
///
/// Lengths are in units of the blockade radius, which is therefore 1. Edges
/// are stored as `(i, j)` with `i < j`, sorted lexicographically.
#[derive(Clone, Debug, PartialEq)]
pub struct UdGraph {
    positions: Vec<[f64; 2]>,
    box_side: f64,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<u64>,
    seed: Option<u64>,
}

impl UdGraph {
    /// Place `n_atoms` atoms uniformly at random in a box sized so that the
    /// density `ν = N r_b² / L²` equals `density`.
    pub fn random(n_atoms: usize, density: f64, seed: u64) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::invalid("a graph needs at least one atom"));
        }
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::invalid("density must be positive and finite"));
        }
        if n_atoms > MAX_ATOMS {
            return Err(Error::limit("atoms", MAX_ATOMS, n_atoms));
        }
        let box_side = BLOCKADE_RADIUS * libm::sqrt(n_atoms as f64 / density);
        let mut rng = rng::seeded(seed);
        let positions = (0..n_atoms)
            .map(|_| {
                let x = rng::uniform(&mut rng) * box_side;
                let y = rng::uniform(&mut rng) * box_side;
                [x, y]
            })
            .collect();
        let mut graph = Self::from_positions(positions, box_side)?;
        graph.seed = Some(seed);
        Ok(graph)
    }

    /// Build the unit-disk graph of explicit positions inside `[0, L]²`.
    pub fn from_positions(positions: Vec<[f64; 2]>, box_side: f64) -> Result<Self> {
        let n = positions.len();
        if n == 0 {
            return Err(Error::invalid("a graph needs at least one atom"));
        }
        if n > MAX_ATOMS {
            return Err(Error::limit("atoms", MAX_ATOMS, n));
        }
        if !(box_side > 0.0) || !box_side.is_finite() {
            return Err(Error::invalid("box side must be positive and finite"));
        }
        for p in &positions {
            if !(0.0..=box_side).contains(&p[0]) || !(0.0..=box_side).contains(&p[1]) {
                return Err(Error::invalid("atom position outside the box"));
            }
        }
        let mut edges = Vec::new();
        let mut neighbors = alloc::vec![0u64; n];
        for i in 0..n {
            for j in (i + 1)..n {
                if distance(positions[i], positions[j]) < BLOCKADE_RADIUS {
                    edges.push((i, j));
                    neighbors[i] |= 1 << j;
                    neighbors[j] |= 1 << i;
                }
            }
        }
        Ok(Self {
            positions,
            box_side,
            edges,
            neighbors,
            seed: None,
        })
    }

    /// Attach (or clear) the generator seed, e.g. when reloading a graph
    /// that was saved with one. Positions and edges are unchanged.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_atoms(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn box_side(&self) -> f64 {
        self.box_side
    }

    pub fn blockade_radius(&self) -> f64 {
        BLOCKADE_RADIUS
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Seed the positions were drawn from, if the graph was generated.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `ν = N r_b² / L²`.
    pub fn density(&self) -> f64 {
        self.n_atoms() as f64 * BLOCKADE_RADIUS * BLOCKADE_RADIUS / (self.box_side * self.box_side)
    }

    /// Neighbor set of `vertex` as a bit mask.
    pub fn neighbor_mask(&self, vertex: usize) -> u64 {
        self.neighbors[vertex]
    }

    pub fn neighbor_masks(&self) -> &[u64] {
        &self.neighbors
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n_atoms() && j < self.n_atoms() && (self.neighbors[i] >> j) & 1 == 1
    }

    /// Euclidean distance between atoms `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        distance(self.positions[i], self.positions[j])
    }

    /// True iff no edge has both endpoints occupied in `state`.
    pub fn is_independent_set(&self, state: &BasisState) -> Result<bool> {
        self.check_state(state)?;
        Ok(is_independent(&self.neighbors, state.bits()))
    }

    /// Number of edges with both endpoints occupied.
    pub fn occupied_edges(&self, state: &BasisState) -> Result<usize> {
        self.check_state(state)?;
        Ok(count_occupied_edges(&self.neighbors, state.bits()))
    }

    /// Maximum independent set by branch and bound (`N ≤ 24`).
    ///
    /// Among all maximum sets the witness with the smallest integer encoding
    /// is returned.
    pub fn solve_mis_exact(&self) -> Result<MisSolution> {
        let n = self.n_atoms();
        if n > MAX_EXACT_ATOMS {
            return Err(Error::limit("exact MIS atoms", MAX_EXACT_ATOMS, n));
        }
        let (size, bits) = mis::smallest_maximum_independent_set(&self.neighbors);
        Ok(MisSolution {
            size,
            witness: BasisState::new(bits, n)?,
        })
    }

    fn check_state(&self, state: &BasisState) -> Result<()> {
        if state.n_atoms() != self.n_atoms() {
            return Err(Error::invalid(
                "basis state length does not match the graph",
            ));
        }
        Ok(())
    }
}

/// Convenience wrapper for [`UdGraph::random`].
pub fn generate_graph(n_atoms: usize, density: f64, seed: u64) -> Result<UdGraph> {
    UdGraph::random(n_atoms, density, seed)
}

pub(crate) fn is_independent(neighbors: &[u64], bits: u64) -> bool {
    let mut rest = bits;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if neighbors[v] & bits != 0 {
            return false;
        }
    }
    true
}

pub(crate) fn count_occupied_edges(neighbors: &[u64], bits: u64) -> usize {
    let mut rest = bits;
    let mut twice = 0u32;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        twice += (neighbors[v] & bits).count_ones();
    }
    (twice / 2) as usize
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    pub(crate) fn triangle() -> UdGraph {
        UdGraph::from_positions(vec![[0.0, 0.0], [0.5, 0.0], [0.25, 0.4]], 1.0).unwrap()
    }

    fn path3() -> UdGraph {
        UdGraph::from_positions(vec![[0.0, 0.0], [0.8, 0.0], [1.6, 0.0]], 2.0).unwrap()
    }

    #[test]
    fn box_side_inverts_density() {
        let g = UdGraph::random(18, 2.6, 11).unwrap();
        assert!((g.box_side() - libm::sqrt(18.0 / 2.6)).abs() < 1e-12);
        assert!((g.box_side() - 2.6312).abs() < 1e-4);
        assert!((g.density() - 2.6).abs() < 1e-12);
    }

    #[test]
    fn single_atom_graph() {
        let g = UdGraph::random(1, 1.0, 99).unwrap();
        assert_eq!(g.n_atoms(), 1);
        assert!(g.edges().is_empty());
        assert!((g.box_side() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(
            UdGraph::random(0, 1.0, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            UdGraph::random(3, 0.0, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            UdGraph::random(3, -1.0, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(UdGraph::from_positions(vec![[2.0, 0.0]], 1.0).is_err());
    }

    #[test]
    fn sparse_graph_edges_match_pairwise_distances() {
        // Expected edge count at this density is about 0.14, so most seeds
        // give an edgeless graph; every seed must agree with the oracle.
        let mut edgeless = 0;
        for seed in 0..40 {
            let g = UdGraph::random(10, 0.01, seed).unwrap();
            let p = g.positions();
            let mut expected = Vec::new();
            for i in 0..10 {
                for j in (i + 1)..10 {
                    let dx = p[i][0] - p[j][0];
                    let dy = p[i][1] - p[j][1];
                    if dx * dx + dy * dy < 1.0 {
                        expected.push((i, j));
                    }
                }
            }
            assert_eq!(g.edges(), expected.as_slice());
            edgeless += g.edges().is_empty() as usize;
        }
        assert!(edgeless >= 28, "{edgeless}");
    }

    #[test]
    fn coincident_atoms_are_adjacent() {
        let g = UdGraph::from_positions(vec![[0.5, 0.5], [0.5, 0.5]], 1.0).unwrap();
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn edge_rule_is_strict() {
        let g = UdGraph::from_positions(vec![[0.0, 0.0], [1.0, 0.0]], 1.0).unwrap();
        assert!(g.edges().is_empty());
    }

    #[test]
    fn independent_set_examples() {
        let t = triangle();
        assert!(!t
            .is_independent_set(&BasisState::parse("110").unwrap())
            .unwrap());
        assert!(t.is_independent_set(&BasisState::ground(3)).unwrap());
        let p = path3();
        assert!(p
            .is_independent_set(&BasisState::parse("101").unwrap())
            .unwrap());
        assert!(!p
            .is_independent_set(&BasisState::parse("011").unwrap())
            .unwrap());
        assert!(matches!(
            t.is_independent_set(&BasisState::parse("10").unwrap()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn bit_string_round_trip() {
        let s = BasisState::parse("0110").unwrap();
        assert_eq!(s.bits(), 0b0110);
        assert_eq!(s.to_bit_string(), "0110");
        assert_eq!(alloc::format!("{s}"), "0110");
        assert!(BasisState::parse("012").is_err());
        assert!(BasisState::new(0b100, 2).is_err());
    }

    #[test]
    fn same_seed_same_graph() {
        let a = UdGraph::random(12, 2.6, 42).unwrap();
        let b = UdGraph::random(12, 2.6, 42).unwrap();
        assert_eq!(a, b);
        let c = UdGraph::random(12, 2.6, 43).unwrap();
        assert_ne!(a.positions(), c.positions());
    }
}
