//! Integer lattice vectors (quasimomenta, exponents) and the Hermite-form
//! reduction used to decide whether a set of quasimomenta generates all of Z^d.

use num::bigint::BigInt;
use num::{Signed, Zero};
use std::fmt;

/// An element of Z^d: an edge shift, a loop quasimomentum, or a Laurent
/// exponent. Componentwise equality; ordering is lexicographic.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeVector(Vec<i64>);

impl LatticeVector {
    pub fn new(components: Vec<i64>) -> Self {
        LatticeVector(components)
    }

    pub fn zero(rank: usize) -> Self {
        LatticeVector(vec![0; rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.rank(), rhs.rank());
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.rank(), rhs.rank());
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Self {
        LatticeVector(self.0.iter().map(|&a| -a).collect())
    }

    /// Componentwise minimum, for Laurent exponent normalization.
    pub fn component_min(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.rank(), rhs.rank());
        LatticeVector(self.0.iter().zip(&rhs.0).map(|(a, b)| *a.min(b)).collect())
    }

    /// Squared Euclidean norm.
    pub fn norm2(&self) -> i64 {
        self.0.iter().map(|&c| c * c).sum()
    }

    /// Dot product with a real vector (e.g. θ for torus evaluation).
    pub fn dot_f64(&self, theta: &[f64]) -> f64 {
        debug_assert_eq!(self.rank(), theta.len());
        self.0.iter().zip(theta).map(|(&a, t)| a as f64 * t).sum()
    }
}

impl fmt::Debug for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Result of reducing a generating set of a sublattice of Z^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSpan {
    /// True iff the generators span all of Z^d.
    pub full: bool,
    /// A basis of the generated sublattice (column Hermite form; may have
    /// fewer than `d` elements when the span is degenerate).
    pub basis: Vec<LatticeVector>,
}

/// Computes the sublattice of Z^d generated by `gens` via integer column
/// reduction (Hermite form). Column operations preserve the column lattice,
/// so the nonzero reduced columns are a basis.
pub fn lattice_span(rank: usize, gens: &[LatticeVector]) -> LatticeSpan {
    let mut cols: Vec<Vec<BigInt>> = gens
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| g.components().iter().map(|&c| BigInt::from(c)).collect())
        .collect();
    let mut pivot_col = 0usize;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for row in 0..rank {
        if pivot_col >= cols.len() {
            break;
        }
        loop {
            // Smallest nonzero entry in this row among the remaining columns.
            let mut best: Option<usize> = None;
            for c in pivot_col..cols.len() {
                if !cols[c][row].is_zero()
                    && best.is_none_or(|b| cols[c][row].abs() < cols[b][row].abs())
                {
                    best = Some(c);
                }
            }
            let Some(best) = best else { break };
            cols.swap(pivot_col, best);
            // Reduce every other column in this row modulo the pivot.
            let mut done = true;
            for c in pivot_col + 1..cols.len() {
                if !cols[c][row].is_zero() {
                    let q = &cols[c][row] / &cols[pivot_col][row];
                    if !q.is_zero() {
                        for r in 0..rank {
                            let sub = &q * &cols[pivot_col][r];
                            cols[c][r] -= sub;
                        }
                    }
                    if !cols[c][row].is_zero() {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if pivot_col < cols.len() && !cols[pivot_col][row].is_zero() {
            if cols[pivot_col][row].is_negative() {
                for r in 0..rank {
                    cols[pivot_col][r] = -cols[pivot_col][r].clone();
                }
            }
            pivots.push((row, pivot_col));
            pivot_col += 1;
        }
    }
    cols.truncate(pivot_col);
    let full = pivots.len() == rank
        && pivots
            .iter()
            .all(|&(row, col)| cols[col][row] == BigInt::from(1));
    let basis = cols
        .into_iter()
        .map(|col| {
            LatticeVector::new(
                col.iter()
                    .map(|c| i64::try_from(c).expect("lattice basis entry fits i64"))
                    .collect(),
            )
        })
        .collect();
    LatticeSpan { full, basis }
}
