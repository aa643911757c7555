//! Reference lattice models used across the test suites and the docs.

use crate::graph::{EdgeTerm, PeriodicGraphSpec, Potential};
use crate::lattice::LatticeVector;
use crate::scalar::Gaussian;

fn lv(c: &[i64]) -> LatticeVector {
    LatticeVector::new(c.to_vec())
}

fn e(from: usize, to: usize, shift: &[i64], w: i64) -> EdgeTerm {
    EdgeTerm::new(from, to, lv(shift), Gaussian::from_int(w))
}

/// The Lieb lattice (d = 2, N = 3):
///
/// ```text
///         | V1        1 + 1/z1   1 + 1/z2 |
/// h(z) =  | 1 + z1    V2         0        |
///         | 1 + z2    0          V3       |
/// ```
///
/// Its dispersion relation has a flat band exactly when V2 = V3.
pub fn lieb(potential: Potential) -> PeriodicGraphSpec {
    PeriodicGraphSpec {
        d: 2,
        n: 3,
        edges: vec![
            e(0, 1, &[0, 0], 1),
            e(0, 1, &[-1, 0], 1),
            e(1, 0, &[0, 0], 1),
            e(1, 0, &[1, 0], 1),
            e(0, 2, &[0, 0], 1),
            e(0, 2, &[0, -1], 1),
            e(2, 0, &[0, 0], 1),
            e(2, 0, &[0, 1], 1),
        ],
        potential,
    }
}

/// Three-site chain with long-range edges (d = 1, N = 3):
///
/// ```text
///         | V1         1 - 1/z1^2   z1 |
/// h(z) =  | 1 - z1^2   V2           1  |
///         | 1/z1       1            V3 |
/// ```
///
/// With this edge assignment the two length-3 loops based at vertex 3 land on
/// quasimomenta {+1, +3} and {−1, −3} respectively, so nothing cancels at the
/// extremal order; contrast with [`long_edge_chain_flipped`].
pub fn long_edge_chain(potential: Potential) -> PeriodicGraphSpec {
    PeriodicGraphSpec {
        d: 1,
        n: 3,
        edges: vec![
            e(0, 1, &[0], 1),
            e(0, 1, &[-2], -1),
            e(1, 0, &[0], 1),
            e(1, 0, &[2], -1),
            e(0, 2, &[1], 1),
            e(2, 0, &[-1], 1),
            e(1, 2, &[0], 1),
            e(2, 1, &[0], 1),
        ],
        potential,
    }
}

/// The same chain with the long edge transposed (h12 = 1 − z1^2,
/// h21 = 1 − 1/z1^2). Here every length-3 loop contribution at quasimomentum
/// ±1 cancels exactly, and the first obstruction to a flat band appears one
/// order higher, through the symmetric extremal loops of length 4.
pub fn long_edge_chain_flipped(potential: Potential) -> PeriodicGraphSpec {
    PeriodicGraphSpec {
        d: 1,
        n: 3,
        edges: vec![
            e(0, 1, &[0], 1),
            e(0, 1, &[2], -1),
            e(1, 0, &[0], 1),
            e(1, 0, &[-2], -1),
            e(0, 2, &[1], 1),
            e(2, 0, &[-1], 1),
            e(1, 2, &[0], 1),
            e(2, 1, &[0], 1),
        ],
        potential,
    }
}

/// Two-site dimer (d = 1, N = 2) with h12 = 1 + z1, h21 = 1 + 1/z1.
pub fn dimer(potential: Potential) -> PeriodicGraphSpec {
    PeriodicGraphSpec {
        d: 1,
        n: 2,
        edges: vec![
            e(0, 1, &[0], 1),
            e(0, 1, &[1], 1),
            e(1, 0, &[0], 1),
            e(1, 0, &[-1], 1),
        ],
        potential,
    }
}

/// One vertex per cell, nearest-neighbor hopping: h(z) = V1 + z + 1/z.
pub fn single_vertex_chain(v: Gaussian) -> PeriodicGraphSpec {
    PeriodicGraphSpec {
        d: 1,
        n: 1,
        edges: vec![e(0, 0, &[1], 1), e(0, 0, &[-1], 1)],
        potential: Potential::new(vec![v]),
    }
}

/// A single isolated vertex: h(z) ≡ V1, the trivial flat band.
pub fn isolated_vertex(v: Gaussian) -> PeriodicGraphSpec {
    PeriodicGraphSpec { d: 1, n: 1, edges: vec![], potential: Potential::new(vec![v]) }
}

/// Two vertices joined only inside the cell; every periodic copy is a finite
/// component, so both eigenvalues of the 2×2 block are flat bands for any
/// potential.
pub fn finite_dumbbell(potential: Potential) -> PeriodicGraphSpec {
    PeriodicGraphSpec {
        d: 1,
        n: 2,
        edges: vec![e(0, 1, &[0], 1), e(1, 0, &[0], 1)],
        potential,
    }
}
