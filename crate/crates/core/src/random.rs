//! Random spec and potential generation for the randomized suites.
//!
//! Candidate graphs are built from a zero-shift path (keeping the quotient
//! connected), per-axis wrap edges carrying the unit shifts (so the cycle
//! quasimomenta can generate Z^d), and a few extra random pairs, some of
//! which double an existing pair with a second shift (multi-edges). Weak
//! symmetry is enforced by construction; Γ-connectivity is verified and
//! failing candidates are redrawn.

use crate::graph::{validate_spec, EdgeTerm, PeriodicGraphSpec, Potential, ValidatedGraph};
use crate::lattice::LatticeVector;
use crate::scalar::{Gaussian, RingOps};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SpecParams {
    pub d: usize,
    pub n_min: usize,
    pub n_max: usize,
    /// Extra undirected edge pairs beyond the connecting skeleton.
    pub extra_edges: usize,
    /// Probability that an extra pair doubles an existing one with a second
    /// shift, producing a multi-edge.
    pub multi_edge_prob: f64,
    /// Hermitian weights (reverse partner gets the conjugate).
    pub self_adjoint: bool,
    /// Allow Gaussian-rational weights with nonzero imaginary part.
    pub complex_weights: bool,
    /// Cap on distinct shifts per ordered vertex pair. Pairs carrying three
    /// or more quasimomenta admit colliding (footprint, quasimomentum)
    /// classes among the shortest loops, a case outside the extremal
    /// dichotomy; `Some(2)` keeps a corpus inside it.
    pub max_shifts_per_pair: Option<usize>,
}

impl Default for SpecParams {
    fn default() -> Self {
        SpecParams {
            d: 2,
            n_min: 2,
            n_max: 5,
            extra_edges: 2,
            multi_edge_prob: 0.4,
            self_adjoint: true,
            complex_weights: false,
            max_shifts_per_pair: None,
        }
    }
}

fn unit(d: usize, axis: usize) -> LatticeVector {
    let mut c = vec![0i64; d];
    c[axis] = 1;
    LatticeVector::new(c)
}

fn nonzero_rational(rng: &mut ChaCha8Rng, complex: bool) -> Gaussian {
    loop {
        let num = rng.gen_range(-4i64..=4);
        let den = rng.gen_range(1i64..=3);
        let re = Gaussian::from_ratio(num, den);
        let w = if complex && rng.gen_bool(0.5) {
            let inum = rng.gen_range(-4i64..=4);
            re.add(&Gaussian::from_ratio(inum, den).mul(&Gaussian::i()))
        } else {
            re
        };
        if !w.is_zero() {
            return w;
        }
    }
}

/// Adds the pair (a, b, shift, w) together with its reverse partner, unless
/// the per-pair shift cap would be exceeded.
fn add_pair(
    rng: &mut ChaCha8Rng,
    edges: &mut Vec<EdgeTerm>,
    a: usize,
    b: usize,
    shift: LatticeVector,
    params: &SpecParams,
) {
    if let Some(cap) = params.max_shifts_per_pair {
        let count = |from: usize, to: usize, new: &LatticeVector| {
            let mut shifts: std::collections::BTreeSet<LatticeVector> = edges
                .iter()
                .filter(|e| e.from == from && e.to == to)
                .map(|e| e.shift.clone())
                .collect();
            shifts.insert(new.clone());
            shifts.len()
        };
        if count(a, b, &shift) > cap || count(b, a, &shift.neg()) > cap {
            return;
        }
    }
    let w = nonzero_rational(rng, params.complex_weights);
    let back = if params.self_adjoint {
        w.conj()
    } else {
        nonzero_rational(rng, params.complex_weights)
    };
    edges.push(EdgeTerm::new(a, b, shift.clone(), w));
    edges.push(EdgeTerm::new(b, a, shift.neg(), back));
}

fn candidate(rng: &mut ChaCha8Rng, params: &SpecParams) -> PeriodicGraphSpec {
    let d = params.d;
    let n = rng.gen_range(params.n_min..=params.n_max);
    let mut edges = Vec::new();
    // zero-shift path keeps the quotient connected
    for i in 0..n.saturating_sub(1) {
        add_pair(rng, &mut edges, i, i + 1, LatticeVector::zero(d), params);
    }
    // one wrap per axis so the quasimomenta can span Z^d
    for axis in 0..d {
        let shift = unit(d, axis);
        if n == 1 || rng.gen_bool(0.5) {
            let v = rng.gen_range(0..n);
            add_pair(rng, &mut edges, v, v, shift, params);
        } else {
            let a = rng.gen_range(0..n - 1);
            // doubling a path pair with a shifted copy makes a multi-edge
            add_pair(rng, &mut edges, a, a + 1, shift, params);
        }
    }
    for _ in 0..params.extra_edges {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let axis = rng.gen_range(0..d);
        let mut shift = if rng.gen_bool(0.5) { unit(d, axis) } else { unit(d, axis).neg() };
        if a == b && shift.is_zero() {
            continue;
        }
        if !rng.gen_bool(params.multi_edge_prob) && a != b {
            shift = LatticeVector::zero(d);
        }
        if a == b && shift.is_zero() {
            continue;
        }
        add_pair(rng, &mut edges, a, b, shift, params);
    }
    let potential = random_potential(rng, n, -10, 10, 50);
    PeriodicGraphSpec { d, n, edges, potential }
}

/// Draws candidates until one validates with a connected Γ.
pub fn random_connected_spec(
    rng: &mut ChaCha8Rng,
    params: &SpecParams,
) -> (PeriodicGraphSpec, ValidatedGraph) {
    for _ in 0..500 {
        let spec = candidate(rng, params);
        if let Ok(v) = validate_spec(&spec) {
            if v.is_gamma_connected().0 {
                return (spec, v);
            }
        }
    }
    panic!("no connected candidate after 500 draws; parameters too restrictive");
}

/// Uniform rational potential with exactly distinct values.
pub fn random_potential(
    rng: &mut ChaCha8Rng,
    n: usize,
    lo: i64,
    hi: i64,
    max_den: u64,
) -> Potential {
    loop {
        let values: Vec<Gaussian> = (0..n)
            .map(|_| {
                let den = rng.gen_range(1..=max_den) as i64;
                Gaussian::from_ratio(rng.gen_range(lo * den..=hi * den), den)
            })
            .collect();
        let distinct = (0..n).all(|i| (i + 1..n).all(|j| values[i] != values[j]));
        if distinct {
            return Potential::new(values);
        }
    }
}
