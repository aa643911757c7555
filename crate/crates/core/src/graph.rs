//! Quotient description of a Z^d-periodic weighted graph.
//!
//! A spec lists vertices of one fundamental domain (indices `0..n` internally,
//! 1-based at the JSON boundary), directed edge terms `(from, to, shift,
//! weight)` — the weight of the edge from `from` to the copy of `to` shifted
//! by `shift` ∈ Z^d — and the potential values. Validation enforces the weak
//! symmetry condition (a term and its reversed, negated-shift partner vanish
//! together) and the absence of unshifted self-loops, merges duplicate terms,
//! and derives the matrix family {b_α} indexed by shift.

use crate::lattice::{lattice_span, LatticeSpan, LatticeVector};
use crate::scalar::{Gaussian, Ring, RingOps};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("EmptyGraph: the fundamental domain has no vertices")]
    EmptyGraph,
    #[error("RankMismatch: {context} has rank {found}, expected {expected}")]
    RankMismatch { context: String, expected: usize, found: usize },
    #[error("SelfLoopZeroShift: vertex {vertex} carries an edge to itself with zero shift")]
    SelfLoopZeroShift { vertex: usize },
    #[error(
        "WeakSymmetryViolation: edge ({from},{to},{shift}) has no reverse partner ({to},{from},{neg_shift})"
    )]
    WeakSymmetryViolation { from: usize, to: usize, shift: LatticeVector, neg_shift: LatticeVector },
    #[error("VertexOutOfRange: edge references vertex {vertex} but n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("SizeMismatch: potential has {found} values, expected {expected}")]
    PotentialSize { expected: usize, found: usize },
}

/// One directed edge term of the quotient multigraph (0-based vertices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeTerm {
    pub from: usize,
    pub to: usize,
    pub shift: LatticeVector,
    pub weight: Gaussian,
}

impl EdgeTerm {
    pub fn new(from: usize, to: usize, shift: LatticeVector, weight: Gaussian) -> Self {
        EdgeTerm { from, to, shift, weight }
    }
}

/// Potential values V_1..V_N on the fundamental domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Potential {
    values: Vec<Gaussian>,
}

impl Potential {
    pub fn new(values: Vec<Gaussian>) -> Self {
        Potential { values }
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Potential::new(values.iter().map(|&v| Gaussian::from_int(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> &Gaussian {
        &self.values[i]
    }

    pub fn values(&self) -> &[Gaussian] {
        &self.values
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.is_real())
    }

    /// Minimum pairwise distance |V_i − V_j| (numeric; +∞ for n ≤ 1).
    pub fn separation(&self) -> f64 {
        let mut sep = f64::INFINITY;
        for i in 0..self.values.len() {
            for j in i + 1..self.values.len() {
                let d = self.values[i].sub(&self.values[j]).abs();
                sep = sep.min(d);
            }
        }
        sep
    }

    /// Membership in ℬ_r: all values separated by more than `r`.
    pub fn in_separation_class(&self, r: f64) -> bool {
        self.separation() > r
    }

    /// Exact check that V_s ≠ V_j for every s ≠ j (the vertex factors
    /// W_s = (V_j − V_s)^{-1} are defined).
    pub fn distinct_from(&self, j: usize) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .find(|(s, v)| *s != j && **v == self.values[j])
            .map(|(s, _)| s)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Raw input for validation.
#[derive(Clone, Debug)]
pub struct PeriodicGraphSpec {
    pub d: usize,
    pub n: usize,
    pub edges: Vec<EdgeTerm>,
    pub potential: Potential,
}

/// The matrix family {b_α}: for each shift α in the finite support, an N×N
/// matrix with (b_α)_{ij} = summed weight of terms (i, j, α).
#[derive(Clone, Debug)]
pub struct QuotientGraph {
    d: usize,
    n: usize,
    matrices: BTreeMap<LatticeVector, Vec<Gaussian>>,
    weight_bound: f64,
}

impl QuotientGraph {
    pub fn shift_support(&self) -> impl Iterator<Item = &LatticeVector> {
        self.matrices.keys()
    }

    pub fn matrix(&self, alpha: &LatticeVector) -> Option<&[Gaussian]> {
        self.matrices.get(alpha).map(|m| m.as_slice())
    }

    pub fn matrices(&self) -> impl Iterator<Item = (&LatticeVector, &[Gaussian])> {
        self.matrices.iter().map(|(a, m)| (a, m.as_slice()))
    }

    pub fn entry(&self, alpha: &LatticeVector, i: usize, j: usize) -> Option<&Gaussian> {
        self.matrices.get(alpha).map(|m| &m[i * self.n + j])
    }

    /// Upper bound M_b on the operator norms of the b_α: entrywise max × N.
    pub fn weight_bound(&self) -> f64 {
        self.weight_bound
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

/// An out-edge of the quotient multigraph, canonical order (to, shift).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutEdge {
    pub to: usize,
    pub shift: LatticeVector,
    pub weight: Gaussian,
}

/// Certificate accompanying the Γ-connectivity decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConnectivityCertificate {
    Connected,
    /// The quotient graph itself splits into these vertex classes.
    DisconnectedQuotient { components: Vec<Vec<usize>> },
    /// The quotient is connected but cycle quasimomenta only span a proper
    /// sublattice with this basis.
    ProperSublattice { basis: Vec<LatticeVector> },
}

/// A vertex pair joined by edges of two or more distinct quasimomenta.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiEdgeWitness {
    pub from: usize,
    pub to: usize,
    pub shifts: Vec<LatticeVector>,
}

/// A validated, canonicalized graph. Immutable after construction; safe to
/// share across workers.
#[derive(Clone, Debug)]
pub struct ValidatedGraph {
    d: usize,
    n: usize,
    potential: Potential,
    edges: Vec<EdgeTerm>,
    quotient: QuotientGraph,
    out: Vec<Vec<OutEdge>>,
    weights_hermitian: bool,
}

pub fn validate_spec(spec: &PeriodicGraphSpec) -> Result<ValidatedGraph, GraphError> {
    if spec.n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    if spec.d == 0 {
        return Err(GraphError::RankMismatch {
            context: "spatial rank d".into(),
            expected: 1,
            found: 0,
        });
    }
    if spec.potential.len() != spec.n {
        return Err(GraphError::PotentialSize { expected: spec.n, found: spec.potential.len() });
    }
    for e in &spec.edges {
        for &v in &[e.from, e.to] {
            if v >= spec.n {
                return Err(GraphError::VertexOutOfRange { vertex: v + 1, n: spec.n });
            }
        }
        if e.shift.rank() != spec.d {
            return Err(GraphError::RankMismatch {
                context: format!("shift of edge ({},{})", e.from + 1, e.to + 1),
                expected: spec.d,
                found: e.shift.rank(),
            });
        }
        if e.from == e.to && e.shift.is_zero() {
            return Err(GraphError::SelfLoopZeroShift { vertex: e.from + 1 });
        }
    }

    // Merge duplicate (from, to, shift) terms; exact-zero sums are dropped.
    let mut merged: BTreeMap<(usize, usize, LatticeVector), Gaussian> = BTreeMap::new();
    for e in &spec.edges {
        let key = (e.from, e.to, e.shift.clone());
        match merged.entry(key) {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(e.weight.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                let sum = slot.get().add(&e.weight);
                if sum.is_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }
    merged.retain(|_, w| !w.is_zero());

    for ((from, to, shift), _) in &merged {
        let partner = (*to, *from, shift.neg());
        if !merged.contains_key(&partner) {
            return Err(GraphError::WeakSymmetryViolation {
                from: from + 1,
                to: to + 1,
                shift: shift.clone(),
                neg_shift: shift.neg(),
            });
        }
    }

    let edges: Vec<EdgeTerm> = merged
        .iter()
        .map(|((from, to, shift), w)| EdgeTerm::new(*from, *to, shift.clone(), w.clone()))
        .collect();

    let mut matrices: BTreeMap<LatticeVector, Vec<Gaussian>> = BTreeMap::new();
    let mut max_entry = 0.0f64;
    for e in &edges {
        let m = matrices
            .entry(e.shift.clone())
            .or_insert_with(|| vec![Gaussian::zero(); spec.n * spec.n]);
        m[e.from * spec.n + e.to] = e.weight.clone();
        max_entry = max_entry.max(e.weight.abs());
    }
    let quotient = QuotientGraph {
        d: spec.d,
        n: spec.n,
        matrices,
        weight_bound: max_entry * spec.n as f64,
    };

    let mut out: Vec<Vec<OutEdge>> = vec![Vec::new(); spec.n];
    for e in &edges {
        out[e.from].push(OutEdge { to: e.to, shift: e.shift.clone(), weight: e.weight.clone() });
    }

    let weights_hermitian = edges.iter().all(|e| {
        quotient
            .entry(&e.shift.neg(), e.to, e.from)
            .map(|w| *w == e.weight.conj())
            .unwrap_or(false)
    });

    Ok(ValidatedGraph {
        d: spec.d,
        n: spec.n,
        potential: spec.potential.clone(),
        edges,
        quotient,
        out,
        weights_hermitian,
    })
}

impl ValidatedGraph {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Merged edge terms in canonical (from, to, shift) order.
    pub fn edges(&self) -> &[EdgeTerm] {
        &self.edges
    }

    pub fn quotient(&self) -> &QuotientGraph {
        &self.quotient
    }

    /// Out-edges of `v` in canonical (to, shift) order.
    pub fn out_edges(&self, v: usize) -> &[OutEdge] {
        &self.out[v]
    }

    /// Looks up the weight of the merged term (from, to, shift).
    pub fn weight(&self, from: usize, to: usize, shift: &LatticeVector) -> Option<&Gaussian> {
        self.out[from]
            .iter()
            .find(|e| e.to == to && e.shift == *shift)
            .map(|e| &e.weight)
    }

    /// Self-adjointness of H for a given potential: real values and
    /// (b_α)_{ij} = conj((b_{−α})_{ji}).
    pub fn is_self_adjoint_with(&self, potential: &Potential) -> bool {
        self.weights_hermitian && potential.is_real()
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.is_self_adjoint_with(&self.potential)
    }

    /// Re-emits the canonical spec (used for round-trip checks and witness
    /// serialization).
    pub fn to_spec(&self) -> PeriodicGraphSpec {
        PeriodicGraphSpec {
            d: self.d,
            n: self.n,
            edges: self.edges.clone(),
            potential: self.potential.clone(),
        }
    }

    /// Undirected connected components of the quotient graph.
    pub fn quotient_components(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.n];
        for e in &self.edges {
            adj[e.from].insert(e.to);
            adj[e.to].insert(e.from);
        }
        let mut seen = vec![false; self.n];
        let mut components = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }

    /// Quasimomenta of the fundamental cycles of the component containing
    /// `root`: a BFS tree assigns each vertex a shift potential φ, and every
    /// merged edge (i, j, α) contributes α + φ(i) − φ(j).
    pub fn cycle_quasimomenta(&self, root: usize) -> Vec<LatticeVector> {
        let mut phi: Vec<Option<LatticeVector>> = vec![None; self.n];
        phi[root] = Some(LatticeVector::zero(self.d));
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let pv = phi[v].clone().unwrap();
            for e in &self.out[v] {
                if phi[e.to].is_none() {
                    phi[e.to] = Some(pv.add(&e.shift));
                    queue.push_back(e.to);
                }
            }
        }
        let mut gens = BTreeSet::new();
        for e in &self.edges {
            if let (Some(pi), Some(pj)) = (&phi[e.from], &phi[e.to]) {
                let g = e.shift.add(pi).sub(pj);
                if !g.is_zero() {
                    gens.insert(g);
                }
            }
        }
        gens.into_iter().collect()
    }

    /// Γ is connected iff the quotient is connected and the fundamental-cycle
    /// quasimomenta generate all of Z^d (Hermite reduction decides the
    /// subgroup question exactly).
    pub fn is_gamma_connected(&self) -> (bool, ConnectivityCertificate) {
        let components = self.quotient_components();
        if components.len() > 1 {
            return (false, ConnectivityCertificate::DisconnectedQuotient { components });
        }
        let gens = self.cycle_quasimomenta(0);
        let LatticeSpan { full, basis } = lattice_span(self.d, &gens);
        if full {
            (true, ConnectivityCertificate::Connected)
        } else {
            (false, ConnectivityCertificate::ProperSublattice { basis })
        }
    }

    /// True iff some ordered vertex pair carries edges of two distinct
    /// quasimomenta; witnesses list all such pairs.
    pub fn is_multi_connected(&self) -> (bool, Vec<MultiEdgeWitness>) {
        let mut by_pair: BTreeMap<(usize, usize), Vec<LatticeVector>> = BTreeMap::new();
        for e in &self.edges {
            by_pair.entry((e.from, e.to)).or_default().push(e.shift.clone());
        }
        let witnesses: Vec<MultiEdgeWitness> = by_pair
            .into_iter()
            .filter(|(_, shifts)| shifts.len() >= 2)
            .map(|((from, to), shifts)| MultiEdgeWitness { from, to, shifts })
            .collect();
        (!witnesses.is_empty(), witnesses)
    }

    /// Max |V_i| + M_b, the crude spectral-radius bound used for tolerances.
    pub fn spectrum_bound_with(&self, potential: &Potential) -> f64 {
        potential.max_abs() + self.quotient.weight_bound()
    }
}
