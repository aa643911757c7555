//! Extremal loop configurations and the flat-band obstruction certificate.
//!
//! For a base vertex j, an extremal configuration has nonzero contribution
//! and quasimomentum, minimal length L, then minimal number of distinct
//! footprint elements. A symmetric extremal configuration instead requires
//! the footprint to have exactly one element of multiplicity 1 and the rest
//! of multiplicity 2. A configuration is non-cancelable when no other
//! configuration shares its (footprint, quasimomentum) class.
//!
//! The dichotomy behind the obstruction search: either every extremal
//! configuration is non-cancelable, or a non-cancelable symmetric extremal
//! configuration exists one order higher. Either way the resummed table
//! contains an entry with nonzero quasimomentum and exactly nonzero
//! totalcont — the certificate that generic potentials admit no flat band.

use crate::graph::ValidatedGraph;
use crate::lattice::{lattice_span, LatticeVector};
use crate::loops::{
    enumerate_configs, enumerate_simple_loops, loop_stats, resummed_table, Footprint, LoopConfig,
    LoopError, LoopLimits, ResummedTable, SimpleLoop, TableKey,
};
use crate::scalar::{Gaussian, RingOps};
use crate::ExecMode;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtremalError {
    #[error("NoNonzeroQuasiLoop: every closed walk at base {base} has zero quasimomentum")]
    NoNonzeroQuasiLoop { base: usize },
    #[error("SearchCapExceeded: no nonzero-quasimomentum loop within length {cap} at base {base}")]
    SearchCapExceeded { base: usize, cap: usize },
    #[error("ObstructionNotFound: no exact-nonzero certificate at base {base} through order {order}")]
    ObstructionNotFound { base: usize, order: usize },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Loop(#[from] LoopError),
}

/// Result of the extremal search at one base vertex.
#[derive(Debug, Clone)]
pub struct ExtremalSearch {
    pub base: usize,
    /// Minimal length of a nonzero-quasimomentum configuration.
    pub length: usize,
    /// All extremal configurations (they are always simple loops).
    pub loops: Vec<SimpleLoop>,
    /// Number of distinct footprint elements they share.
    pub distinct_footprint: usize,
}

/// Quasimomenta of closed walks at `base` span a subgroup of Z^d; when that
/// subgroup is trivial no extremal loop exists. Otherwise a conjugated
/// fundamental cycle gives one of length at most ~3N, so 4(N+1) bounds the
/// iterative deepening.
fn search_cap(g: &ValidatedGraph) -> usize {
    4 * (g.n() + 1)
}

fn quasi_span_is_trivial(g: &ValidatedGraph, base: usize) -> bool {
    let gens = g.cycle_quasimomenta(base);
    lattice_span(g.d(), &gens).basis.is_empty()
}

/// Finds the minimal length L of a loop with nonzero quasimomentum, then
/// filters length-L loops to the minimal number of distinct footprint
/// elements. Iterative deepening over simple loops is complete because any
/// configuration with an attachment at the minimal length would contain a
/// strictly shorter nonzero-quasimomentum loop; enumeration over all
/// configurations at L cross-validates that.
pub fn extremal_search(
    g: &ValidatedGraph,
    base: usize,
    limits: &LoopLimits,
) -> Result<ExtremalSearch, ExtremalError> {
    if quasi_span_is_trivial(g, base) {
        return Err(ExtremalError::NoNonzeroQuasiLoop { base });
    }
    let cap = search_cap(g);
    for len in 1..=cap {
        let loops: Vec<SimpleLoop> = enumerate_simple_loops(g, base, len, limits)?
            .into_iter()
            .filter(|l| l.len() == len && !l.quasi().is_zero())
            .collect();
        if loops.is_empty() {
            continue;
        }
        // cross-validation: at the minimal length, no configuration with
        // attachments may carry nonzero quasimomentum
        for cfg in enumerate_configs(g, base, len, limits)? {
            if !cfg.is_simple() {
                let st = loop_stats(g, &cfg);
                assert!(
                    st.quasi.is_zero(),
                    "attached configuration with nonzero quasimomentum below the extremal length"
                );
            }
        }
        let distinct = loops
            .iter()
            .map(|l| loop_stats(g, &LoopConfig::simple(l.clone())).footprint.distinct())
            .min()
            .unwrap();
        let extremals: Vec<SimpleLoop> = loops
            .into_iter()
            .filter(|l| {
                loop_stats(g, &LoopConfig::simple(l.clone())).footprint.distinct() == distinct
            })
            .collect();
        return Ok(ExtremalSearch { base, length: len, loops: extremals, distinct_footprint: distinct });
    }
    Err(ExtremalError::SearchCapExceeded { base, cap })
}

/// Symmetric extremal configurations: minimal length among configurations
/// with nonzero quasimomentum whose footprint has exactly one element of
/// multiplicity 1 and the rest of multiplicity 2.
#[derive(Debug, Clone)]
pub struct SymmetricExtremals {
    pub base: usize,
    pub length: usize,
    pub configs: Vec<LoopConfig>,
}

/// Searches lengths 1..=L+1 (L = extremal length); `None` when no
/// qualifying configuration exists in that range. The theorem only consumes
/// symmetric extremals of length L+1, so the bounded search is complete for
/// the obstruction argument.
pub fn symmetric_extremal_search(
    g: &ValidatedGraph,
    base: usize,
    limits: &LoopLimits,
) -> Result<Option<SymmetricExtremals>, ExtremalError> {
    let l = extremal_search(g, base, limits)?.length;
    for len in 1..=l + 1 {
        let configs: Vec<LoopConfig> = enumerate_configs(g, base, len, limits)?
            .into_iter()
            .filter(|cfg| {
                let st = loop_stats(g, cfg);
                !st.quasi.is_zero() && st.footprint.is_symmetric_pattern()
            })
            .collect();
        if !configs.is_empty() {
            return Ok(Some(SymmetricExtremals { base, length: len, configs }));
        }
    }
    Ok(None)
}

/// Outcome of the uniqueness check for a configuration's
/// (footprint, quasimomentum) class.
#[derive(Debug, Clone)]
pub struct NonCancelableCheck {
    pub unique: bool,
    pub competitors: Vec<LoopConfig>,
}

/// Enumerates all configurations of the same length with identical footprint
/// and quasimomentum; the input is non-cancelable iff it is alone there.
pub fn non_cancelable_check(
    g: &ValidatedGraph,
    base: usize,
    cfg: &LoopConfig,
    limits: &LoopLimits,
) -> Result<NonCancelableCheck, ExtremalError> {
    let st = loop_stats(g, cfg);
    if st.quasi.is_zero() {
        return Err(ExtremalError::InvalidConfig(
            "non-cancelability is only defined for nonzero quasimomentum".into(),
        ));
    }
    let competitors: Vec<LoopConfig> = enumerate_configs(g, base, st.length, limits)?
        .into_iter()
        .filter(|other| {
            if other == cfg {
                return false;
            }
            let so = loop_stats(g, other);
            so.quasi == st.quasi && so.footprint == st.footprint
        })
        .collect();
    Ok(NonCancelableCheck { unique: competitors.is_empty(), competitors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObstructionBranch {
    /// Certificate found at the extremal order L.
    Extremal,
    /// Certificate found among symmetric-extremal footprints at order L+1.
    Symmetric,
}

impl ObstructionBranch {
    pub fn name(&self) -> &'static str {
        match self {
            ObstructionBranch::Extremal => "extremal",
            ObstructionBranch::Symmetric => "symmetric",
        }
    }
}

/// A resummed-table entry with nonzero quasimomentum and exactly nonzero
/// totalcont, reproduced verbatim from the table.
#[derive(Debug, Clone)]
pub struct ObstructionCertificate {
    pub base: usize,
    /// Extremal length L of the base vertex.
    pub extremal_length: usize,
    /// Table order at which the certificate was found (L or L+1).
    pub order: usize,
    pub branch: ObstructionBranch,
    pub footprint: Footprint,
    pub quasi: LatticeVector,
    pub totalcont: Gaussian,
    /// In the symmetric branch: quasimomenta tieing the maximal Euclidean
    /// norm among symmetric-footprint entries (the geometric tie set).
    pub norm_ties: Vec<LatticeVector>,
}

/// Searches the resummed table at order L for an entry with nonzero
/// quasimomentum and exactly nonzero totalcont; if every such entry cancels,
/// searches order L+1 restricted to symmetric-extremal footprints, preferring
/// maximal Euclidean quasimomentum norm (the multi-edge tie-break). Failing
/// both is reported as `ObstructionNotFound` — a potential counterexample to
/// the dichotomy, never silent.
pub fn verify_obstruction(
    g: &ValidatedGraph,
    base: usize,
    limits: &LoopLimits,
) -> Result<ObstructionCertificate, ExtremalError> {
    let l = extremal_search(g, base, limits)?.length;
    let table = resummed_table(g, base, l, limits, ExecMode::default())?;
    if let Some((key, entry)) = first_noncancelled(&table) {
        return Ok(ObstructionCertificate {
            base,
            extremal_length: l,
            order: l,
            branch: ObstructionBranch::Extremal,
            footprint: key.footprint.clone(),
            quasi: key.quasi.clone(),
            totalcont: entry,
            norm_ties: Vec::new(),
        });
    }
    let table = resummed_table(g, base, l + 1, limits, ExecMode::default())?;
    let mut symmetric: Vec<(&TableKey, &crate::loops::TableEntry)> = table
        .entries
        .iter()
        .filter(|(key, _)| !key.quasi.is_zero() && key.footprint.is_symmetric_pattern())
        .collect();
    // decreasing Euclidean norm of the quasimomentum, then canonical order
    symmetric.sort_by(|a, b| b.0.quasi.norm2().cmp(&a.0.quasi.norm2()).then(a.0.cmp(b.0)));
    let max_norm = symmetric.first().map(|(key, _)| key.quasi.norm2());
    let norm_ties: Vec<LatticeVector> = match max_norm {
        Some(m) => {
            let set: std::collections::BTreeSet<LatticeVector> = symmetric
                .iter()
                .filter(|(key, _)| key.quasi.norm2() == m)
                .map(|(key, _)| key.quasi.clone())
                .collect();
            set.into_iter().collect()
        }
        None => Vec::new(),
    };
    for (key, entry) in symmetric {
        if !entry.totalcont.is_zero() {
            return Ok(ObstructionCertificate {
                base,
                extremal_length: l,
                order: l + 1,
                branch: ObstructionBranch::Symmetric,
                footprint: key.footprint.clone(),
                quasi: key.quasi.clone(),
                totalcont: entry.totalcont.clone(),
                norm_ties,
            });
        }
    }
    Err(ExtremalError::ObstructionNotFound { base, order: l + 1 })
}

fn first_noncancelled(table: &ResummedTable) -> Option<(&TableKey, Gaussian)> {
    table
        .entries
        .iter()
        .find(|(key, entry)| !key.quasi.is_zero() && !entry.totalcont.is_zero())
        .map(|(key, entry)| (key, entry.totalcont.clone()))
}

/// Maximal intervals of {0, …, n−1} on which a permutation acts as identity
/// or reflection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermBlock {
    pub start: usize,
    /// Inclusive.
    pub end: usize,
    pub reflected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermOutcome {
    Blocks(Vec<PermBlock>),
    /// An inversion pair (i < j, σ(i) > σ(j)) with |σ(i) − σ(j)| ≠ j − i.
    Violation { i: usize, j: usize },
}

/// Decomposes a permutation satisfying the distance condition — every
/// inversion pair moves values by exactly its index distance — into maximal
/// intervals of identity or reflection action. Violating permutations get
/// the offending pair back instead.
pub fn special_permutation_decompose(perm: &[usize]) -> PermOutcome {
    let n = perm.len();
    debug_assert!({
        let mut seen = vec![false; n];
        perm.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
    }, "input must be a permutation of 0..n");
    for i in 0..n {
        for j in i + 1..n {
            if perm[i] > perm[j] && perm[i] - perm[j] != j - i {
                return PermOutcome::Violation { i, j };
            }
        }
    }
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < n {
        if perm[i] == i {
            let mut end = i;
            while end + 1 < n && perm[end + 1] == end + 1 {
                end += 1;
            }
            blocks.push(PermBlock { start: i, end, reflected: false });
            i = end + 1;
        } else {
            // under the distance condition the block [i, σ(i)] is reflected
            let end = perm[i];
            assert!(end > i, "prefix blocks exhaust smaller values");
            for t in 0..=end - i {
                assert_eq!(perm[i + t], end - t, "reflection structure forced by the hypothesis");
            }
            blocks.push(PermBlock { start: i, end, reflected: true });
            i = end + 1;
        }
    }
    PermOutcome::Blocks(blocks)
}

/// Brute-force validity check of a decomposition: blocks partition the
/// domain and the permutation acts as claimed on each.
pub fn decomposition_is_valid(perm: &[usize], blocks: &[PermBlock]) -> bool {
    let mut next = 0usize;
    for b in blocks {
        if b.start != next || b.end < b.start || b.end >= perm.len() {
            return false;
        }
        for t in b.start..=b.end {
            let want = if b.reflected { b.end + b.start - t } else { t };
            if perm[t] != want {
                return false;
            }
        }
        next = b.end + 1;
    }
    next == perm.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::{validate_spec, PeriodicGraphSpec, Potential};
    use crate::loops::Step;

    fn lv(c: &[i64]) -> LatticeVector {
        LatticeVector::new(c.to_vec())
    }

    fn g(n: i64) -> Gaussian {
        Gaussian::from_int(n)
    }

    fn graph(spec: PeriodicGraphSpec) -> ValidatedGraph {
        validate_spec(&spec).unwrap()
    }

    fn lim() -> LoopLimits {
        LoopLimits::default()
    }

    #[test]
    fn extremal_single_vertex_chain() {
        let gr = graph(fixtures::single_vertex_chain(g(0)));
        let s = extremal_search(&gr, 0, &lim()).unwrap();
        assert_eq!(s.length, 1);
        assert_eq!(s.loops.len(), 2);
        assert_eq!(s.distinct_footprint, 0);
    }

    #[test]
    fn extremal_lieb_base1() {
        let gr = graph(fixtures::lieb(Potential::from_ints(&[0, 1, 2])));
        let s = extremal_search(&gr, 0, &lim()).unwrap();
        assert_eq!(s.length, 2);
        assert_eq!(s.distinct_footprint, 1);
        // two loops through vertex 2 with quasi ±(1,0), two through vertex 3
        // with quasi ±(0,1)
        assert_eq!(s.loops.len(), 4);
        let quasis: Vec<LatticeVector> = s.loops.iter().map(|l| l.quasi()).collect();
        for want in [lv(&[1, 0]), lv(&[-1, 0]), lv(&[0, 1]), lv(&[0, -1])] {
            assert!(quasis.contains(&want));
        }
    }

    #[test]
    fn extremal_long_edge_chain_base3() {
        let gr = graph(fixtures::long_edge_chain(Potential::from_ints(&[0, 1, 2])));
        let s = extremal_search(&gr, 2, &lim()).unwrap();
        assert_eq!(s.length, 3, "length-2 loops all have zero quasimomentum");
        assert_eq!(s.loops.len(), 4);
    }

    #[test]
    fn extremal_requires_nonzero_quasi_somewhere() {
        let gr = graph(fixtures::finite_dumbbell(Potential::from_ints(&[0, 1])));
        assert_eq!(
            extremal_search(&gr, 0, &lim()).unwrap_err(),
            ExtremalError::NoNonzeroQuasiLoop { base: 0 }
        );
    }

    #[test]
    fn symmetric_extremal_long_edge_chain() {
        let gr = graph(fixtures::long_edge_chain(Potential::from_ints(&[0, 1, 2])));
        let s = symmetric_extremal_search(&gr, 2, &lim()).unwrap().unwrap();
        assert_eq!(s.length, 4);
        // 3->1->2->1->3 and 3->2->1->2->3 with quasi ±2
        assert_eq!(s.configs.len(), 4);
        for cfg in &s.configs {
            let st = loop_stats(&gr, cfg);
            assert_eq!(st.quasi.norm2(), 4);
            assert!(st.footprint.is_symmetric_pattern());
        }
    }

    #[test]
    fn symmetric_extremal_none_for_single_vertex() {
        let gr = graph(fixtures::single_vertex_chain(g(0)));
        assert!(symmetric_extremal_search(&gr, 0, &lim()).unwrap().is_none());
    }

    #[test]
    fn symmetric_extremal_dimer_is_the_length_two_loop() {
        // footprint {2} qualifies: one element of multiplicity 1
        let gr = graph(fixtures::dimer(Potential::from_ints(&[0, 3])));
        let s = symmetric_extremal_search(&gr, 0, &lim()).unwrap().unwrap();
        assert_eq!(s.length, 2);
        assert_eq!(s.configs.len(), 2, "quasi ±1 out of the four length-2 loops");
    }

    #[test]
    fn non_cancelable_long_edge_chain_loop() {
        let gr = graph(fixtures::long_edge_chain(Potential::from_ints(&[0, 1, 2])));
        let cfg = LoopConfig::simple(SimpleLoop {
            base: 2,
            steps: vec![
                Step { to: 1, shift: lv(&[0]) },
                Step { to: 0, shift: lv(&[0]) },
                Step { to: 2, shift: lv(&[1]) },
            ],
        });
        let chk = non_cancelable_check(&gr, 2, &cfg, &lim()).unwrap();
        assert!(chk.unique, "sole config in its class: {:?}", chk.competitors);
    }

    #[test]
    fn cancelable_competitors_on_flipped_chain() {
        let gr = graph(fixtures::long_edge_chain_flipped(Potential::from_ints(&[0, 1, 2])));
        let cfg = LoopConfig::simple(SimpleLoop {
            base: 2,
            steps: vec![
                Step { to: 1, shift: lv(&[0]) },
                Step { to: 0, shift: lv(&[0]) },
                Step { to: 2, shift: lv(&[1]) },
            ],
        });
        let chk = non_cancelable_check(&gr, 2, &cfg, &lim()).unwrap();
        assert!(!chk.unique);
        assert_eq!(chk.competitors.len(), 1, "the opposite-orientation loop lands in the same class");
    }

    #[test]
    fn zero_quasi_config_rejected() {
        let gr = graph(fixtures::dimer(Potential::from_ints(&[0, 3])));
        let cfg = LoopConfig::simple(SimpleLoop {
            base: 0,
            steps: vec![Step { to: 1, shift: lv(&[0]) }, Step { to: 0, shift: lv(&[0]) }],
        });
        assert!(matches!(
            non_cancelable_check(&gr, 0, &cfg, &lim()),
            Err(ExtremalError::InvalidConfig(_))
        ));
    }

    #[test]
    fn obstruction_single_vertex_chain() {
        let gr = graph(fixtures::single_vertex_chain(g(0)));
        let cert = verify_obstruction(&gr, 0, &lim()).unwrap();
        assert_eq!(cert.order, 1);
        assert_eq!(cert.branch, ObstructionBranch::Extremal);
        assert_eq!(cert.footprint, Footprint::empty());
        assert_eq!(cert.totalcont, g(1));
        assert_eq!(cert.quasi.norm2(), 1);
    }

    #[test]
    fn obstruction_lieb_all_bases() {
        let gr = graph(fixtures::lieb(Potential::from_ints(&[0, 1, 2])));
        for base in 0..3 {
            let cert = verify_obstruction(&gr, base, &lim()).unwrap();
            assert_eq!(cert.branch, ObstructionBranch::Extremal, "base {base}");
            assert_eq!(cert.order, 2);
            assert!(!cert.totalcont.is_zero());
            assert_eq!(cert.totalcont, g(1), "each off-zero class holds one loop");
        }
    }

    #[test]
    fn obstruction_long_edge_chain_is_extremal_branch() {
        // with the printed edge assignment nothing cancels at order 3
        let gr = graph(fixtures::long_edge_chain(Potential::from_ints(&[0, 1, 2])));
        let cert = verify_obstruction(&gr, 2, &lim()).unwrap();
        assert_eq!(cert.branch, ObstructionBranch::Extremal);
        assert_eq!(cert.order, 3);
        assert_eq!(cert.extremal_length, 3);
    }

    #[test]
    fn obstruction_flipped_chain_needs_symmetric_branch() {
        // the transposed assignment cancels both quasi ±1 classes at order 3;
        // the certificate appears among length-4 symmetric loops at quasi ±2
        let gr = graph(fixtures::long_edge_chain_flipped(Potential::from_ints(&[0, 1, 2])));
        let cert = verify_obstruction(&gr, 2, &lim()).unwrap();
        assert_eq!(cert.branch, ObstructionBranch::Symmetric);
        assert_eq!(cert.extremal_length, 3);
        assert_eq!(cert.order, 4);
        assert_eq!(cert.quasi.norm2(), 4);
        assert_eq!(cert.totalcont, g(-1));
        assert_eq!(cert.norm_ties.len(), 2, "quasi +2 and -2 tie the norm");
    }

    #[test]
    fn permutation_decomposition_examples() {
        // identity on 5 points: one identity block
        let out = special_permutation_decompose(&[0, 1, 2, 3, 4]);
        assert_eq!(
            out,
            PermOutcome::Blocks(vec![PermBlock { start: 0, end: 4, reflected: false }])
        );
        // full reversal
        let out = special_permutation_decompose(&[2, 1, 0]);
        assert_eq!(
            out,
            PermOutcome::Blocks(vec![PermBlock { start: 0, end: 2, reflected: true }])
        );
        // two swaps
        let out = special_permutation_decompose(&[1, 0, 3, 2]);
        assert_eq!(
            out,
            PermOutcome::Blocks(vec![
                PermBlock { start: 0, end: 1, reflected: true },
                PermBlock { start: 2, end: 3, reflected: true },
            ])
        );
        // violating pair: (0, 2) inverts with distance mismatch
        let out = special_permutation_decompose(&[2, 0, 1]);
        assert!(matches!(out, PermOutcome::Violation { .. }));
    }

    #[test]
    fn decomposition_validity_brute_force_small() {
        // exhaustive n ≤ 6 here; the acceptance suite pushes to n = 8
        fn permutations(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in permutations(n - 1) {
                for slot in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(slot, n - 1);
                    out.push(q);
                }
            }
            out
        }
        for n in 1..=6 {
            for p in permutations(n) {
                let hypothesis = (0..n).all(|i| {
                    (i + 1..n).all(|j| p[i] <= p[j] || p[i] - p[j] == j - i)
                });
                match special_permutation_decompose(&p) {
                    PermOutcome::Blocks(blocks) => {
                        assert!(hypothesis, "decomposed {p:?} despite violated hypothesis");
                        assert!(decomposition_is_valid(&p, &blocks));
                    }
                    PermOutcome::Violation { i, j } => {
                        assert!(!hypothesis);
                        assert!(p[i] > p[j] && p[i] - p[j] != j - i);
                    }
                }
            }
        }
    }
}
