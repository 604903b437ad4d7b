//! Exact maximum independent set by branch and bound.

use super::BasisState;

/// Largest graph accepted by the exact solver.
pub const MAX_EXACT_ATOMS: usize = 24;

/// A maximum independent set and its size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MisSolution {
    pub size: usize,
    pub witness: BasisState,
}

/// Size and one witness of a maximum independent set of the graph given by
/// its neighbor masks.
pub fn max_independent_set(neighbors: &[u64]) -> (usize, u64) {
    max_within(neighbors, full_mask(neighbors.len()))
}

/// The maximum independent set with the smallest integer encoding.
///
/// Decides vertices from the most significant bit down, excluding a vertex
/// whenever the remaining candidates can still reach the optimum size.
pub(crate) fn smallest_maximum_independent_set(neighbors: &[u64]) -> (usize, u64) {
    let n = neighbors.len();
    let (size, _) = max_independent_set(neighbors);
    let mut chosen = 0u64;
    let mut remaining = full_mask(n);
    for v in (0..n).rev() {
        let bit = 1u64 << v;
        if remaining & bit == 0 {
            continue;
        }
        let without = remaining & !bit;
        let (rest, _) = max_within(neighbors, without);
        if chosen.count_ones() as usize + rest >= size {
            remaining = without;
        } else {
            chosen |= bit;
            remaining &= !(bit | neighbors[v]);
        }
    }
    (size, chosen)
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Maximum independent set of the subgraph induced by `candidates`.
fn max_within(neighbors: &[u64], candidates: u64) -> (usize, u64) {
    let mut best = (0usize, 0u64);
    branch(neighbors, candidates, 0, &mut best);
    best
}

fn branch(neighbors: &[u64], mut cand: u64, mut chosen: u64, best: &mut (usize, u64)) {
    // Vertices of degree ≤ 1 inside the candidate set belong to some maximum
    // independent set, so they can be taken without branching.
    loop {
        let mut changed = false;
        let mut rest = cand;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if cand & (1 << v) == 0 {
                continue;
            }
            if (neighbors[v] & cand).count_ones() <= 1 {
                chosen |= 1 << v;
                cand &= !((1 << v) | neighbors[v]);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let size = chosen.count_ones() as usize;
    if cand == 0 {
        if size > best.0 {
            *best = (size, chosen);
        }
        return;
    }
    if size + cand.count_ones() as usize <= best.0 {
        return;
    }

    // Pivot on the candidate of maximum degree.
    let mut pivot = 0usize;
    let mut pivot_degree = 0u32;
    let mut rest = cand;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let d = (neighbors[v] & cand).count_ones();
        if d > pivot_degree {
            pivot = v;
            pivot_degree = d;
        }
    }
    let bit = 1u64 << pivot;
    branch(
        neighbors,
        cand & !(bit | neighbors[pivot]),
        chosen | bit,
        best,
    );
    branch(neighbors, cand & !bit, chosen, best);
}
