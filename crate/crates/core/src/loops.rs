//! Loop-configuration calculus for the Rayleigh–Schrödinger series of the
//! eigenvalue branches λ_j(ε) of h_ε(z) = V + ε Σ_α z^α b_α.
//!
//! A simple j-loop is a closed walk j → n_1 → … → n_{k−1} → j with a chosen
//! edge (quasimomentum) per step and no interior visit to j. A loop
//! configuration is a simple loop with finitely many iterated attachments:
//! any interior occurrence n_s may absorb an ordered sequence of further
//! j-loop configurations, each contributing an extra factor −(V_j − V_{n_s})^{−1}.
//! The ε^k coefficient of λ_j is the sum over all configurations of length k
//! of z^{quasi} · cont, where
//!
//! ```text
//! cont = (−1)^{#attachments} · Π edge weights · Π_{v ∈ footprint} W_v,
//! W_v = (V_j − V_v)^{−1},   footprint = interior-vertex multiset.
//! ```
//!
//! Since cont is a monomial in the W's, configurations group by their
//! (footprint, quasimomentum) pair; the potential-independent totals of
//! sign·weight over each group form the resummed table. The footprint of a
//! length-k configuration always has k−1 elements counted with multiplicity,
//! so the table at order k is indexed by (k−1)-element footprints.

use crate::eigen::{self, EigenError};
use crate::exec::{self, ExecMode};
use crate::graph::{Potential, ValidatedGraph};
use crate::lattice::LatticeVector;
use crate::laurent::{AlgebraError, LaurentPoly};
use crate::scalar::{Approx, FieldScalar, Gaussian, Ring, RingOps};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("ExplosionGuard: enumeration needs {needed} items, cap is {cap}")]
    ExplosionGuard { cap: u64, needed: u128 },
    #[error("DegeneratePotential: V_{i} = V_{j} leaves a vertex factor undefined")]
    DegeneratePotential { i: usize, j: usize },
    #[error("BranchTrackingAmbiguity: two eigenvalues within {gap:.3e} of each other at epsilon = {epsilon:.3e}")]
    BranchTrackingAmbiguity { epsilon: f64, gap: f64 },
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Enumeration caps. `max_items` bounds the total number of loops, sequences
/// and configurations materialized by one call; exceeding it is an explicit
/// error, never a silent truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopLimits {
    pub max_items: u64,
}

impl Default for LoopLimits {
    fn default() -> Self {
        LoopLimits { max_items: 10_000_000 }
    }
}

/// One step of a loop: the target vertex and the quasimomentum of the edge
/// used. The weight is recovered from the graph, so steps order canonically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub to: usize,
    pub shift: LatticeVector,
}

/// A simple j-loop: base → n_1 → … → base with interior vertices ≠ base.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimpleLoop {
    pub base: usize,
    pub steps: Vec<Step>,
}

impl SimpleLoop {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Steps landing on interior vertices n_1 … n_{k−1}, in visit order.
    pub fn interior(&self) -> &[Step] {
        &self.steps[..self.steps.len() - 1]
    }

    pub fn quasi(&self) -> LatticeVector {
        let rank = self.steps[0].shift.rank();
        self.steps
            .iter()
            .fold(LatticeVector::zero(rank), |acc, s| acc.add(&s.shift))
    }

    /// The vertex at interior occurrence `pos` (1-based, 1 ≤ pos ≤ len−1).
    pub fn occurrence_vertex(&self, pos: usize) -> usize {
        self.steps[pos - 1].to
    }
}

/// A loop configuration: a root simple loop plus, per interior occurrence,
/// an ordered sequence of attached configurations. Order matters: two
/// attachments at one occurrence in different orders are distinct terms of
/// the series.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LoopConfig {
    pub root: SimpleLoop,
    pub attachments: BTreeMap<usize, Vec<LoopConfig>>,
}

impl LoopConfig {
    pub fn simple(root: SimpleLoop) -> Self {
        LoopConfig { root, attachments: BTreeMap::new() }
    }

    pub fn is_simple(&self) -> bool {
        self.attachments.is_empty()
    }

    pub fn total_len(&self) -> usize {
        self.root.len()
            + self
                .attachments
                .values()
                .flat_map(|seq| seq.iter().map(|c| c.total_len()))
                .sum::<usize>()
    }
}

/// Multiset of interior vertices, vertex → multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Footprint(BTreeMap<usize, usize>);

impl Footprint {
    pub fn empty() -> Self {
        Footprint(BTreeMap::new())
    }

    pub fn from_pairs(pairs: &[(usize, usize)]) -> Self {
        Footprint(pairs.iter().copied().collect())
    }

    pub fn add(&mut self, vertex: usize, count: usize) {
        if count > 0 {
            *self.0.entry(vertex).or_insert(0) += count;
        }
    }

    pub fn merge(&mut self, other: &Footprint) {
        for (&v, &c) in &other.0 {
            self.add(v, c);
        }
    }

    /// Total cardinality counted with multiplicity.
    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&usize, &usize)> {
        self.0.iter()
    }

    pub fn multiplicity(&self, vertex: usize) -> usize {
        self.0.get(&vertex).copied().unwrap_or(0)
    }

    /// Exactly one element of multiplicity 1, all others of multiplicity 2 —
    /// the symmetric-extremal footprint pattern.
    pub fn is_symmetric_pattern(&self) -> bool {
        let ones = self.0.values().filter(|&&c| c == 1).count();
        ones == 1 && self.0.values().all(|&c| c == 1 || c == 2)
    }
}

/// Derived quantities of a configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopStats {
    pub length: usize,
    pub quasi: LatticeVector,
    pub footprint: Footprint,
    pub attachment_count: usize,
    /// Product of all edge weights over all steps of all loops involved.
    pub weight_product: Gaussian,
}

impl LoopStats {
    /// (−1)^{#attachments} · weight product.
    pub fn signed_weight(&self) -> Gaussian {
        if self.attachment_count % 2 == 0 {
            self.weight_product.clone()
        } else {
            self.weight_product.neg()
        }
    }

    /// cont for a concrete potential: signed weight times the W-monomial of
    /// the footprint.
    pub fn cont(&self, potential: &Potential, base: usize) -> Result<Gaussian, LoopError> {
        let mut acc = self.signed_weight();
        let vj = potential.value(base);
        for (&v, &mult) in self.footprint.iter() {
            let diff = vj.sub(potential.value(v));
            if diff.is_zero() {
                return Err(LoopError::DegeneratePotential { i: base + 1, j: v + 1 });
            }
            let w = diff.inv();
            for _ in 0..mult {
                acc = acc.mul(&w);
            }
        }
        Ok(acc)
    }
}

fn edge_weight(g: &ValidatedGraph, from: usize, step: &Step) -> Gaussian {
    g.weight(from, step.to, &step.shift)
        .unwrap_or_else(|| {
            panic!("step ({from},{},{}) references no edge term", step.to, step.shift)
        })
        .clone()
}

fn simple_stats(g: &ValidatedGraph, lp: &SimpleLoop) -> LoopStats {
    let mut footprint = Footprint::empty();
    let mut weight = Gaussian::one();
    let mut from = lp.base;
    for (i, s) in lp.steps.iter().enumerate() {
        weight = weight.mul(&edge_weight(g, from, s));
        if i + 1 < lp.steps.len() {
            footprint.add(s.to, 1);
        }
        from = s.to;
    }
    LoopStats {
        length: lp.len(),
        quasi: lp.quasi(),
        footprint,
        attachment_count: 0,
        weight_product: weight,
    }
}

/// Computes derived quantities of a (valid) configuration. Panics if a step
/// references a nonexistent edge term or an attachment position is out of
/// range — both are construction errors, not runtime conditions.
pub fn loop_stats(g: &ValidatedGraph, cfg: &LoopConfig) -> LoopStats {
    let mut st = simple_stats(g, &cfg.root);
    for (&pos, seq) in &cfg.attachments {
        assert!(
            pos >= 1 && pos < cfg.root.len(),
            "attachment position {pos} outside interior of a length-{} loop",
            cfg.root.len()
        );
        let v = cfg.root.occurrence_vertex(pos);
        for a in seq {
            let sa = loop_stats(g, a);
            st.length += sa.length;
            st.quasi = st.quasi.add(&sa.quasi);
            st.footprint.merge(&sa.footprint);
            st.footprint.add(v, 1);
            st.attachment_count += 1 + sa.attachment_count;
            st.weight_product = st.weight_product.mul(&sa.weight_product);
        }
    }
    st
}

struct Counter {
    cap: u64,
    used: u128,
}

impl Counter {
    fn new(limits: &LoopLimits) -> Self {
        Counter { cap: limits.max_items, used: 0 }
    }

    fn charge(&mut self, n: u128) -> Result<(), LoopError> {
        self.used = self.used.saturating_add(n);
        if self.used > self.cap as u128 {
            Err(LoopError::ExplosionGuard { cap: self.cap, needed: self.used })
        } else {
            Ok(())
        }
    }
}

/// Depth-first enumeration of simple loops of exact length. Out-edges are
/// visited in canonical (to, shift) order, so the emitted stream is
/// lexicographic. `dist` prunes branches that cannot return in time.
fn for_each_simple_loop<F>(
    g: &ValidatedGraph,
    base: usize,
    len: usize,
    dist: &[usize],
    counter: &mut Counter,
    visit: &mut F,
) -> Result<(), LoopError>
where
    F: FnMut(&[Step]),
{
    fn dfs<F: FnMut(&[Step])>(
        g: &ValidatedGraph,
        base: usize,
        len: usize,
        dist: &[usize],
        stack: &mut Vec<Step>,
        at: usize,
        counter: &mut Counter,
        visit: &mut F,
    ) -> Result<(), LoopError> {
        let depth = stack.len();
        for e in g.out_edges(at) {
            if depth + 1 == len {
                if e.to == base {
                    counter.charge(1)?;
                    stack.push(Step { to: e.to, shift: e.shift.clone() });
                    visit(stack);
                    stack.pop();
                }
            } else if e.to != base && dist[e.to] <= len - depth - 1 {
                stack.push(Step { to: e.to, shift: e.shift.clone() });
                dfs(g, base, len, dist, stack, e.to, counter, visit)?;
                stack.pop();
            }
        }
        Ok(())
    }
    let mut stack = Vec::with_capacity(len);
    dfs(g, base, len, dist, &mut stack, base, counter, visit)
}

/// BFS distances to `base` along reversed edges (usize::MAX = unreachable).
fn distances_to_base(g: &ValidatedGraph, base: usize) -> Vec<usize> {
    let n = g.n();
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in g.edges() {
        rev[e.to].push(e.from);
    }
    let mut dist = vec![usize::MAX; n];
    dist[base] = 0;
    let mut queue = std::collections::VecDeque::from([base]);
    while let Some(v) = queue.pop_front() {
        for &w in &rev[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Every simple j-loop of length ≤ `max_len`, exactly once, ordered by
/// length then lexicographically by (vertex, shift) steps.
pub fn enumerate_simple_loops(
    g: &ValidatedGraph,
    base: usize,
    max_len: usize,
    limits: &LoopLimits,
) -> Result<Vec<SimpleLoop>, LoopError> {
    let mut counter = Counter::new(limits);
    let dist = distances_to_base(g, base);
    let mut out = Vec::new();
    for len in 1..=max_len {
        for_each_simple_loop(g, base, len, &dist, &mut counter, &mut |steps| {
            out.push(SimpleLoop { base, steps: steps.to_vec() })
        })?;
    }
    Ok(out)
}

fn simple_loops_exact(
    g: &ValidatedGraph,
    base: usize,
    len: usize,
    dist: &[usize],
    counter: &mut Counter,
) -> Result<Vec<SimpleLoop>, LoopError> {
    let mut out = Vec::new();
    for_each_simple_loop(g, base, len, dist, counter, &mut |steps| {
        out.push(SimpleLoop { base, steps: steps.to_vec() })
    })?;
    Ok(out)
}

fn count_simple_exact(
    g: &ValidatedGraph,
    base: usize,
    len: usize,
    dist: &[usize],
    counter: &mut Counter,
) -> Result<u128, LoopError> {
    let mut n: u128 = 0;
    for_each_simple_loop(g, base, len, dist, counter, &mut |_| n += 1)?;
    Ok(n)
}

/// Exact count of loop configurations of length `k`, by the same dynamic
/// program that guards materialization. Never builds the configurations.
pub fn count_configs(
    g: &ValidatedGraph,
    base: usize,
    k: usize,
    limits: &LoopLimits,
) -> Result<u128, LoopError> {
    let (counts, _) = config_counts(g, base, k, limits)?;
    Ok(counts[k])
}

/// Counting DP mirroring the enumeration: `c[t]` configurations of length t
/// and `s[t]` ordered attachment sequences of total length t. The running
/// total of everything a materialization would allocate is checked against
/// the cap.
fn config_counts(
    g: &ValidatedGraph,
    base: usize,
    k: usize,
    limits: &LoopLimits,
) -> Result<(Vec<u128>, Vec<u128>), LoopError> {
    let mut counter = Counter::new(limits);
    let dist = distances_to_base(g, base);
    let mut simple_count = vec![0u128; k + 1];
    for m in 1..=k {
        simple_count[m] = count_simple_exact(g, base, m, &dist, &mut counter)?;
    }
    let mut c = vec![0u128; k + 1];
    let mut s = vec![0u128; k + 1];
    s[0] = 1;
    for t in 1..=k {
        if t >= 2 {
            s[t - 1] = (1..t).map(|f| c[f].saturating_mul(s[t - 1 - f])).sum();
        }
        // assignments[p][e]: ways to distribute extra length e over p ordered
        // positions, each taking one (possibly empty) sequence.
        let mut assignments = vec![vec![0u128; t]; t.max(1)];
        for p in 0..t {
            for e in 0..t {
                assignments[p][e] = if p == 0 {
                    u128::from(e == 0)
                } else {
                    (0..=e).map(|x| s[x].saturating_mul(assignments[p - 1][e - x])).sum()
                };
            }
        }
        c[t] = (1..=t)
            .map(|m| simple_count[m].saturating_mul(assignments[m - 1][t - m]))
            .sum();
        let total: u128 = c.iter().chain(s.iter()).sum();
        if total > limits.max_items as u128 {
            return Err(LoopError::ExplosionGuard { cap: limits.max_items, needed: total });
        }
    }
    Ok((c, s))
}

/// An ordered sequence of configurations referenced by (length, index) into
/// the memo, with aggregate statistics (excluding the attachment-point
/// factors, which depend on the position the sequence binds to).
struct SeqEntry {
    elems: Vec<(usize, usize)>,
    len: usize,
    quasi: LatticeVector,
    foot: Footprint,
    inner_attachments: usize,
    weight: Gaussian,
    n_elems: usize,
}

/// Per-call enumeration state.
struct Workspace {
    /// simple[m−1] = simple loops of length m, with stats.
    simple: Vec<Vec<(SimpleLoop, LoopStats)>>,
    /// memo[t−1] = configurations of total length t, with stats.
    memo: Vec<Vec<(LoopConfig, LoopStats)>>,
    /// seqs[t] = attachment sequences of total length t (seqs[0] unused;
    /// empty sequences are represented by skipping the position).
    seqs: Vec<Vec<SeqEntry>>,
}

impl Workspace {
    /// Builds enumeration state for order `k`; memo depth k when the top
    /// level itself must be materialized, k−2 when it will be streamed.
    fn build(
        g: &ValidatedGraph,
        base: usize,
        k: usize,
        limits: &LoopLimits,
        top_level: bool,
    ) -> Result<Workspace, LoopError> {
        config_counts(g, base, k, limits)?;
        let mut counter = Counter::new(limits);
        let dist = distances_to_base(g, base);
        let mut simple: Vec<Vec<(SimpleLoop, LoopStats)>> = Vec::new();
        for m in 1..=k {
            let loops = simple_loops_exact(g, base, m, &dist, &mut counter)?;
            simple.push(
                loops
                    .into_iter()
                    .map(|l| {
                        let st = simple_stats(g, &l);
                        (l, st)
                    })
                    .collect(),
            );
        }
        let memo_depth = if top_level { k } else { k.saturating_sub(2) };
        let seq_depth = k.saturating_sub(2);
        let mut ws = Workspace { simple, memo: Vec::new(), seqs: vec![Vec::new()] };
        for t in 1..=memo_depth.max(0) {
            // sequences of total ≤ t−1 feed configurations of length t
            while ws.seqs.len() <= (t - 1).min(seq_depth) {
                let next = ws.seqs.len();
                let entries = ws.build_seq_level(next);
                ws.seqs.push(entries);
            }
            let mut level = Vec::new();
            ws.for_each_config_at(t, &mut |cfg, st| level.push((cfg.clone(), st.clone())));
            ws.memo.push(level);
        }
        while ws.seqs.len() <= seq_depth {
            let next = ws.seqs.len();
            let entries = ws.build_seq_level(next);
            ws.seqs.push(entries);
        }
        Ok(ws)
    }

    fn build_seq_level(&self, t: usize) -> Vec<SeqEntry> {
        debug_assert!(t >= 1);
        let mut out = Vec::new();
        for first_len in 1..=t.min(self.memo.len()) {
            let rest_total = t - first_len;
            if rest_total > 0 && rest_total >= self.seqs.len() {
                continue;
            }
            for (idx, (_, st)) in self.memo[first_len - 1].iter().enumerate() {
                if rest_total == 0 {
                    out.push(SeqEntry {
                        elems: vec![(first_len, idx)],
                        len: st.length,
                        quasi: st.quasi.clone(),
                        foot: st.footprint.clone(),
                        inner_attachments: st.attachment_count,
                        weight: st.weight_product.clone(),
                        n_elems: 1,
                    });
                } else {
                    for rest in &self.seqs[rest_total] {
                        let mut elems = Vec::with_capacity(1 + rest.elems.len());
                        elems.push((first_len, idx));
                        elems.extend_from_slice(&rest.elems);
                        let mut foot = st.footprint.clone();
                        foot.merge(&rest.foot);
                        out.push(SeqEntry {
                            elems,
                            len: st.length + rest.len,
                            quasi: st.quasi.add(&rest.quasi),
                            foot,
                            inner_attachments: st.attachment_count + rest.inner_attachments,
                            weight: st.weight_product.mul(&rest.weight),
                            n_elems: 1 + rest.n_elems,
                        });
                    }
                }
            }
        }
        out
    }

    /// Visits every configuration of exact length `t` in canonical order
    /// (root length ascending, roots lexicographic, assignments recursive).
    fn for_each_config_at<F>(&self, t: usize, visit: &mut F)
    where
        F: FnMut(&LoopConfig, &LoopStats),
    {
        for m in 1..=t.min(self.simple.len()) {
            let extra = t - m;
            for (root, root_stats) in &self.simple[m - 1] {
                self.for_each_assignment(root, root_stats, extra, visit);
            }
        }
    }

    fn for_each_assignment<F>(
        &self,
        root: &SimpleLoop,
        root_stats: &LoopStats,
        extra: usize,
        visit: &mut F,
    ) where
        F: FnMut(&LoopConfig, &LoopStats),
    {
        if extra == 0 {
            let cfg = LoopConfig::simple(root.clone());
            visit(&cfg, root_stats);
            return;
        }
        let positions = root.len().saturating_sub(1);
        if positions == 0 {
            return;
        }
        let mut chosen: Vec<(usize, &SeqEntry)> = Vec::new();
        self.assign_rec(root, root_stats, 1, positions, extra, &mut chosen, visit);
    }

    fn assign_rec<'a, F>(
        &'a self,
        root: &SimpleLoop,
        root_stats: &LoopStats,
        pos: usize,
        positions: usize,
        remaining: usize,
        chosen: &mut Vec<(usize, &'a SeqEntry)>,
        visit: &mut F,
    ) where
        F: FnMut(&LoopConfig, &LoopStats),
    {
        if pos > positions {
            if remaining == 0 {
                self.emit(root, root_stats, chosen, visit);
            }
            return;
        }
        self.assign_rec(root, root_stats, pos + 1, positions, remaining, chosen, visit);
        for take in 1..=remaining {
            if take >= self.seqs.len() {
                break;
            }
            for entry in &self.seqs[take] {
                chosen.push((pos, entry));
                self.assign_rec(root, root_stats, pos + 1, positions, remaining - take, chosen, visit);
                chosen.pop();
            }
        }
    }

    fn emit<F>(
        &self,
        root: &SimpleLoop,
        root_stats: &LoopStats,
        chosen: &[(usize, &SeqEntry)],
        visit: &mut F,
    ) where
        F: FnMut(&LoopConfig, &LoopStats),
    {
        let mut st = root_stats.clone();
        let mut attachments: BTreeMap<usize, Vec<LoopConfig>> = BTreeMap::new();
        for (pos, entry) in chosen {
            let v = root.occurrence_vertex(*pos);
            st.length += entry.len;
            st.quasi = st.quasi.add(&entry.quasi);
            st.footprint.merge(&entry.foot);
            st.footprint.add(v, entry.n_elems);
            st.attachment_count += entry.n_elems + entry.inner_attachments;
            st.weight_product = st.weight_product.mul(&entry.weight);
            let seq: Vec<LoopConfig> = entry
                .elems
                .iter()
                .map(|&(len, idx)| self.memo[len - 1][idx].0.clone())
                .collect();
            attachments.insert(*pos, seq);
        }
        let cfg = LoopConfig { root: root.clone(), attachments };
        visit(&cfg, &st);
    }

    /// (root length, root index) pairs for parallel partitioning.
    fn roots_up_to(&self, k: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for m in 1..=k.min(self.simple.len()) {
            for idx in 0..self.simple[m - 1].len() {
                out.push((m, idx));
            }
        }
        out
    }
}

/// Every loop configuration of exact length `k`, in a deterministic
/// canonical order.
pub fn enumerate_configs(
    g: &ValidatedGraph,
    base: usize,
    k: usize,
    limits: &LoopLimits,
) -> Result<Vec<LoopConfig>, LoopError> {
    assert!(k >= 1, "configuration length must be positive");
    let ws = Workspace::build(g, base, k, limits, true)?;
    Ok(ws.memo[k - 1].iter().map(|(c, _)| c.clone()).collect())
}

/// Key of a resummed-table entry.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TableKey {
    pub footprint: Footprint,
    pub quasi: LatticeVector,
}

/// Aggregated, potential-independent contribution of one (footprint,
/// quasimomentum) class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub totalcont: Gaussian,
    pub configs: usize,
}

impl TableEntry {
    /// Exact-zero total over a nonempty class witnesses a cancellation.
    pub fn cancelled(&self) -> bool {
        self.totalcont.is_zero() && self.configs > 0
    }
}

/// The (footprint, quasimomentum) → totalcont map at a fixed base vertex and
/// order. Exact-zero entries are retained.
#[derive(Clone, Debug)]
pub struct ResummedTable {
    pub base: usize,
    pub order: usize,
    pub entries: BTreeMap<TableKey, TableEntry>,
}

impl ResummedTable {
    pub fn get(&self, footprint: &Footprint, quasi: &LatticeVector) -> Option<&TableEntry> {
        self.entries
            .get(&TableKey { footprint: footprint.clone(), quasi: quasi.clone() })
    }
}

/// Groups all configurations of length `k` by (footprint, quasimomentum) and
/// sums sign·weight per class. Partitioned by root loop under
/// `ExecMode::Parallel`; the merge is exact addition, so the result is
/// mode-independent.
pub fn resummed_table(
    g: &ValidatedGraph,
    base: usize,
    k: usize,
    limits: &LoopLimits,
    mode: ExecMode,
) -> Result<ResummedTable, LoopError> {
    assert!(k >= 1, "order must be positive");
    let ws = Workspace::build(g, base, k, limits, false)?;
    let roots = ws.roots_up_to(k);
    let fold_root = |(m, idx): (usize, usize)| -> BTreeMap<TableKey, TableEntry> {
        let mut local: BTreeMap<TableKey, TableEntry> = BTreeMap::new();
        let (root, root_stats) = &ws.simple[m - 1][idx];
        ws.for_each_assignment(root, root_stats, k - m, &mut |_cfg, st| {
            let key = TableKey { footprint: st.footprint.clone(), quasi: st.quasi.clone() };
            let entry = local
                .entry(key)
                .or_insert_with(|| TableEntry { totalcont: Gaussian::zero(), configs: 0 });
            entry.totalcont = entry.totalcont.add(&st.signed_weight());
            entry.configs += 1;
        });
        local
    };
    let merge = |mut a: BTreeMap<TableKey, TableEntry>, b: BTreeMap<TableKey, TableEntry>| {
        for (key, v) in b {
            match a.entry(key) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(v);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    e.get_mut().totalcont = e.get().totalcont.add(&v.totalcont);
                    e.get_mut().configs += v.configs;
                }
            }
        }
        a
    };
    let entries = exec::map_reduce(mode, roots, BTreeMap::new, fold_root, merge);
    Ok(ResummedTable { base, order: k, entries })
}

/// The ε^k coefficient of the series for λ_base as a Laurent polynomial in
/// z, for a concrete potential: Σ_{|P| = k} z^{quasi(P)} cont(P).
pub fn series_coefficient(
    g: &ValidatedGraph,
    potential: &Potential,
    base: usize,
    k: usize,
    limits: &LoopLimits,
) -> Result<LaurentPoly<Gaussian>, LoopError> {
    assert!(k >= 1, "order must be positive");
    if let Some(s) = potential.distinct_from(base) {
        return Err(LoopError::DegeneratePotential { i: base + 1, j: s + 1 });
    }
    let ws = Workspace::build(g, base, k, limits, false)?;
    let mut acc = LaurentPoly::zero(g.d());
    let mut err: Option<LoopError> = None;
    ws.for_each_config_at(k, &mut |_cfg, st| {
        if err.is_some() {
            return;
        }
        match st.cont(potential, base) {
            Ok(c) => acc.insert_add(st.quasi.clone(), c),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc),
    }
}

/// Fitted branching constant: max over 1 ≤ t ≤ k of count(t)^{1/t}. A purely
/// empirical stand-in for the exponential-growth constant; diagnostic only.
pub fn fitted_growth_constant(
    g: &ValidatedGraph,
    base: usize,
    k: usize,
    limits: &LoopLimits,
) -> Result<f64, LoopError> {
    let (c, _) = config_counts(g, base, k, limits)?;
    Ok((1..=k)
        .map(|t| (c[t] as f64).powf(1.0 / t as f64))
        .fold(0.0, f64::max))
}

/// Numeric hopping matrix B(z) = Σ_α z^α b_α.
pub fn hopping_matrix(
    g: &ValidatedGraph,
    z: &[Complex64],
) -> Result<DMatrix<Complex64>, LoopError> {
    if let Some(index) = z.iter().position(|c| c.re == 0.0 && c.im == 0.0) {
        return Err(LoopError::Algebra(AlgebraError::ZeroComponent { index }));
    }
    let n = g.n();
    let mut b = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for e in g.edges() {
        let mut phase = Complex64::new(1.0, 0.0);
        for (k, &p) in e.shift.components().iter().enumerate() {
            phase *= z[k].powi(p as i32);
        }
        b[(e.from, e.to)] += e.weight.approx() * phase;
    }
    Ok(b)
}

/// The eigenvalue branch of h_ε(z) continued from V_base at ε = 0, evaluated
/// at each ε of `eps_list` in the given order by nearest-neighbor tracking.
pub fn eigenvalue_branch(
    g: &ValidatedGraph,
    potential: &Potential,
    base: usize,
    z: &[Complex64],
    eps_list: &[f64],
) -> Result<Vec<Complex64>, LoopError> {
    let b = hopping_matrix(g, z)?;
    let n = g.n();
    let diag: Vec<Complex64> = (0..n).map(|i| potential.value(i).approx()).collect();
    let mut prev = diag[base];
    let mut out = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let mut m = b.clone() * Complex64::new(eps, 0.0);
        for i in 0..n {
            m[(i, i)] += diag[i];
        }
        let eigs = eigen::general_eigenvalues(&m)?;
        let mut best = (f64::INFINITY, Complex64::new(0.0, 0.0));
        let mut second = f64::INFINITY;
        for &lam in &eigs {
            let dd = (lam - prev).norm();
            if dd < best.0 {
                second = best.0;
                best = (dd, lam);
            } else if dd < second {
                second = dd;
            }
        }
        let tol = 1e-9 * (1.0 + prev.norm());
        if eigs.len() > 1 && second - best.0 < tol {
            return Err(LoopError::BranchTrackingAmbiguity {
                epsilon: eps,
                gap: second - best.0,
            });
        }
        prev = best.1;
        out.push(prev);
    }
    Ok(out)
}

/// Result of comparing the truncated series S_K(ε) against the tracked
/// eigenvalue branch.
#[derive(Clone, Debug)]
pub struct SeriesCheck {
    /// Fitted log–log slope of |λ(ε) − S_K(ε)| against ε over the samples
    /// above the noise floor; `None` when the series is exact to noise.
    pub slope: Option<f64>,
    /// (ε, |λ(ε) − S_K(ε)|) in decreasing ε order.
    pub samples: Vec<(f64, f64)>,
    pub max_error: f64,
    /// Series coefficients evaluated at z, orders 1..=K.
    pub coefficients: Vec<Complex64>,
}

/// Default ε list for the series check: ε_max = 0.01·r/(N·M_b) with r the
/// potential separation, halved four times, decreasing.
pub fn default_epsilon_list(g: &ValidatedGraph, potential: &Potential) -> Vec<f64> {
    let r = potential.separation();
    let m = g.quotient().weight_bound().max(f64::MIN_POSITIVE);
    let top = 0.01 * r / (g.n() as f64 * m);
    (0..5).map(|i| top / f64::powi(2.0, i)).collect()
}

/// Compares the truncated Rayleigh–Schrödinger series with the tracked
/// eigenvalue branch over an ε list inside the perturbative cap and fits the
/// observed convergence order. The truncation error is O(ε^{K+1}), so the
/// slope is at least K+1, and larger exactly when the (K+1)-st coefficient
/// vanishes at z.
pub fn series_vs_eigenvalue_check(
    g: &ValidatedGraph,
    potential: &Potential,
    base: usize,
    order: usize,
    eps_list: &[f64],
    z: &[Complex64],
    limits: &LoopLimits,
) -> Result<SeriesCheck, LoopError> {
    if eps_list.is_empty() {
        return Err(LoopError::InvalidArgument("empty epsilon list".into()));
    }
    let r = potential.separation();
    if !(r > 0.0) {
        let s = potential.distinct_from(base).unwrap_or(base);
        return Err(LoopError::DegeneratePotential { i: base + 1, j: s + 1 });
    }
    for &zc in z {
        let m = zc.norm();
        if !(0.5..=2.0).contains(&m) {
            return Err(LoopError::InvalidArgument(format!(
                "z component modulus {m:.3} outside [1/2, 2]"
            )));
        }
    }
    if eps_list.iter().any(|&e| !(e > 0.0)) {
        return Err(LoopError::InvalidArgument("epsilons must be positive".into()));
    }
    let cap = 0.01 * r / (g.n() as f64 * g.quotient().weight_bound().max(f64::MIN_POSITIVE));
    let eps_max = eps_list.iter().copied().fold(0.0, f64::max);
    if eps_max > cap * (1.0 + 1e-9) {
        return Err(LoopError::InvalidArgument(format!(
            "max epsilon {eps_max:.3e} exceeds the perturbative cap {cap:.3e}"
        )));
    }

    let coefficients: Vec<Complex64> = (1..=order)
        .map(|k| {
            series_coefficient(g, potential, base, k, limits)
                .and_then(|p| p.eval(z).map_err(LoopError::from))
        })
        .collect::<Result<_, _>>()?;

    let mut order_asc: Vec<f64> = eps_list.to_vec();
    order_asc.sort_by(|a, b| a.total_cmp(b));
    let branch = eigenvalue_branch(g, potential, base, z, &order_asc)?;
    let vj = potential.value(base).approx();
    let mut samples: Vec<(f64, f64)> = order_asc
        .iter()
        .zip(&branch)
        .map(|(&eps, &lam)| {
            let mut s = vj;
            let mut p = Complex64::new(1.0, 0.0);
            for c in &coefficients {
                p *= eps;
                s += c * p;
            }
            (eps, (lam - s).norm())
        })
        .collect();
    samples.reverse();
    let max_error = samples.iter().map(|&(_, e)| e).fold(0.0, f64::max);

    let floor = 1e-13 * (1.0 + potential.max_abs());
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(_, e)| e > floor)
        .map(|&(eps, e)| (eps.ln(), e.ln()))
        .collect();
    let slope = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        Some(sxy / sxx)
    } else {
        None
    };
    Ok(SeriesCheck { slope, samples, max_error, coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::{validate_spec, PeriodicGraphSpec, Potential};

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
    fn simple_loops_single_vertex_chain() {
        let gr = graph(fixtures::single_vertex_chain(g(0)));
        let loops = enumerate_simple_loops(&gr, 0, 1, &lim()).unwrap();
        assert_eq!(loops.len(), 2);
        assert_eq!(loops[0].steps, vec![Step { to: 0, shift: lv(&[-1]) }]);
        assert_eq!(loops[1].steps, vec![Step { to: 0, shift: lv(&[1]) }]);
        // interior may never equal the base, so nothing longer exists
        let loops = enumerate_simple_loops(&gr, 0, 5, &lim()).unwrap();
        assert_eq!(loops.len(), 2);
    }

    #[test]
    fn simple_loops_lieb_length_two() {
        let gr = graph(fixtures::lieb(Potential::from_ints(&[0, 1, 2])));
        let loops = enumerate_simple_loops(&gr, 0, 2, &lim()).unwrap();
        assert!(loops.iter().all(|l| l.len() == 2), "no length-1 loops in Lieb");
        assert_eq!(loops.len(), 8, "2 shift choices out x 2 back, per neighbor");
    }

    #[test]
    fn simple_loops_long_edge_chain_base3() {
        let gr = graph(fixtures::long_edge_chain(Potential::from_ints(&[0, 1, 2])));
        let loops = enumerate_simple_loops(&gr, 2, 2, &lim()).unwrap();
        // 3->1->3 and 3->2->3, one shift choice each
        assert_eq!(loops.len(), 2);
        assert!(loops.iter().all(|l| l.quasi().is_zero()));
    }

    #[test]
    fn loop_stats_long_edge_chain() {
        let gr = graph(fixtures::long_edge_chain(Potential::from_ints(&[0, 1, 2])));
        // 3 -> 2 -> 1 -> 3 with shifts (0, 0, +1)   [0-based: 2 -> 1 -> 0 -> 2]
        let lp = SimpleLoop {
            base: 2,
            steps: vec![
                Step { to: 1, shift: lv(&[0]) },
                Step { to: 0, shift: lv(&[0]) },
                Step { to: 2, shift: lv(&[1]) },
            ],
        };
        let st = loop_stats(&gr, &LoopConfig::simple(lp));
        assert_eq!(st.weight_product, g(1));
        assert_eq!(st.quasi, lv(&[1]));
        assert_eq!(st.footprint, Footprint::from_pairs(&[(0, 1), (1, 1)]));
        // shifts (0, +2, +1): the +2 edge carries weight -1
        let lp = SimpleLoop {
            base: 2,
            steps: vec![
                Step { to: 1, shift: lv(&[0]) },
                Step { to: 0, shift: lv(&[2]) },
                Step { to: 2, shift: lv(&[1]) },
            ],
        };
        let st = loop_stats(&gr, &LoopConfig::simple(lp));
        assert_eq!(st.weight_product, g(-1));
        assert_eq!(st.quasi, lv(&[3]));
    }

    #[test]
    fn attachment_sign_and_footprint() {
        let gr = graph(fixtures::dimer(Potential::from_ints(&[0, 3])));
        let two_loop = |s1: i64, s2: i64| SimpleLoop {
            base: 0,
            steps: vec![Step { to: 1, shift: lv(&[s1]) }, Step { to: 0, shift: lv(&[s2]) }],
        };
        let mut attachments = BTreeMap::new();
        attachments.insert(1, vec![LoopConfig::simple(two_loop(1, -1))]);
        let cfg = LoopConfig { root: two_loop(0, 0), attachments };
        let st = loop_stats(&gr, &cfg);
        assert_eq!(st.length, 4);
        assert_eq!(st.attachment_count, 1);
        assert_eq!(st.signed_weight(), g(-1), "one attachment flips the sign");
        assert_eq!(st.footprint, Footprint::from_pairs(&[(1, 3)]));
        assert_eq!(st.quasi, lv(&[0]));
    }

    #[test]
    fn configs_k1_are_simple_loops() {
        let gr = graph(fixtures::single_vertex_chain(g(0)));
        let cfgs = enumerate_configs(&gr, 0, 1, &lim()).unwrap();
        assert_eq!(cfgs.len(), 2);
        assert!(cfgs.iter().all(|c| c.is_simple()));
    }

    #[test]
    fn configs_empty_for_single_vertex_higher_order() {
        let gr = graph(fixtures::single_vertex_chain(g(0)));
        for k in 2..=5 {
            assert!(enumerate_configs(&gr, 0, k, &lim()).unwrap().is_empty());
            assert_eq!(count_configs(&gr, 0, k, &lim()).unwrap(), 0);
        }
    }

    #[test]
    fn counts_match_enumeration() {
        let gr = graph(fixtures::long_edge_chain(Potential::from_ints(&[0, 1, 2])));
        for base in 0..3 {
            for k in 1..=6 {
                let n = enumerate_configs(&gr, base, k, &lim()).unwrap().len();
                assert_eq!(count_configs(&gr, base, k, &lim()).unwrap(), n as u128, "base {base} k {k}");
            }
        }
        let gr = graph(fixtures::dimer(Potential::from_ints(&[0, 3])));
        for k in 1..=8 {
            let n = enumerate_configs(&gr, 0, k, &lim()).unwrap().len();
            assert_eq!(count_configs(&gr, 0, k, &lim()).unwrap(), n as u128, "dimer k {k}");
        }
    }

    #[test]
    fn dimer_attachment_census() {
        // length 4 at base 1: 4 roots x 4 attached simple loops
        let gr = graph(fixtures::dimer(Potential::from_ints(&[0, 3])));
        assert_eq!(count_configs(&gr, 0, 4, &lim()).unwrap(), 16);
        // length 6: 64 nested + 16 ordered pairs per root-and-pair choice
        assert_eq!(count_configs(&gr, 0, 6, &lim()).unwrap(), 128);
        let cfgs = enumerate_configs(&gr, 0, 6, &lim()).unwrap();
        let nested = cfgs
            .iter()
            .filter(|c| c.attachments.values().any(|seq| seq.iter().any(|a| !a.is_simple())))
            .count();
        let pairs = cfgs
            .iter()
            .filter(|c| c.attachments.values().any(|seq| seq.len() == 2))
            .count();
        assert_eq!(nested, 64);
        assert_eq!(pairs, 64);
    }

    #[test]
    fn footprint_cardinality_is_length_minus_one() {
        let gr = graph(fixtures::lieb(Potential::from_ints(&[0, 1, 2])));
        for k in 1..=5 {
            for cfg in enumerate_configs(&gr, 0, k, &lim()).unwrap() {
                let st = loop_stats(&gr, &cfg);
                assert_eq!(st.footprint.total(), k - 1);
                assert_eq!(st.length, k);
                assert_eq!(cfg.total_len(), k);
            }
        }
    }

    #[test]
    fn enumeration_is_deterministic() {
        let gr = graph(fixtures::long_edge_chain(Potential::from_ints(&[0, 1, 2])));
        let a = enumerate_configs(&gr, 2, 5, &lim()).unwrap();
        let b = enumerate_configs(&gr, 2, 5, &lim()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn explosion_guard_trips() {
        let gr = graph(fixtures::lieb(Potential::from_ints(&[0, 1, 2])));
        let tiny = LoopLimits { max_items: 4 };
        assert!(matches!(
            enumerate_simple_loops(&gr, 0, 2, &tiny),
            Err(LoopError::ExplosionGuard { cap: 4, .. })
        ));
        assert!(matches!(
            enumerate_configs(&gr, 0, 4, &tiny),
            Err(LoopError::ExplosionGuard { .. })
        ));
    }

    #[test]
    fn dimer_table_order_two() {
        let gr = graph(fixtures::dimer(Potential::from_ints(&[0, 3])));
        let t = resummed_table(&gr, 0, 2, &lim(), ExecMode::Sequential).unwrap();
        let foot = Footprint::from_pairs(&[(1, 1)]);
        assert_eq!(t.get(&foot, &lv(&[0])).unwrap().totalcont, g(2));
        assert_eq!(t.get(&foot, &lv(&[1])).unwrap().totalcont, g(1));
        assert_eq!(t.get(&foot, &lv(&[-1])).unwrap().totalcont, g(1));
        assert_eq!(t.entries.len(), 3);
    }

    #[test]
    fn long_edge_chain_table_order_three() {
        let gr = graph(fixtures::long_edge_chain(Potential::from_ints(&[0, 1, 2])));
        let t = resummed_table(&gr, 2, 3, &lim(), ExecMode::Sequential).unwrap();
        let foot = Footprint::from_pairs(&[(0, 1), (1, 1)]);
        assert_eq!(t.get(&foot, &lv(&[1])).unwrap().totalcont, g(1));
        assert_eq!(t.get(&foot, &lv(&[3])).unwrap().totalcont, g(-1));
        assert_eq!(t.get(&foot, &lv(&[-1])).unwrap().totalcont, g(1));
        assert_eq!(t.get(&foot, &lv(&[-3])).unwrap().totalcont, g(-1));
    }

    #[test]
    fn flipped_chain_cancels_at_order_three() {
        let gr = graph(fixtures::long_edge_chain_flipped(Potential::from_ints(&[0, 1, 2])));
        let t = resummed_table(&gr, 2, 3, &lim(), ExecMode::Sequential).unwrap();
        let mut cancelled = 0;
        for (key, entry) in &t.entries {
            if !key.quasi.is_zero() {
                assert!(entry.cancelled(), "expected cancellation at {key:?}");
                assert_eq!(entry.configs, 2);
                cancelled += 1;
            }
        }
        assert_eq!(cancelled, 2, "quasi ±1 classes both cancel");
    }

    #[test]
    fn table_modes_agree() {
        let gr = graph(fixtures::long_edge_chain(Potential::from_ints(&[0, 1, 2])));
        let a = resummed_table(&gr, 2, 5, &lim(), ExecMode::Sequential).unwrap();
        let b = resummed_table(&gr, 2, 5, &lim(), ExecMode::Parallel).unwrap();
        assert_eq!(a.entries, b.entries);
    }

    #[test]
    fn series_coefficient_single_vertex_chain() {
        let gr = graph(fixtures::single_vertex_chain(g(0)));
        let p = series_coefficient(&gr, gr.potential(), 0, 1, &lim()).unwrap();
        let mut want = LaurentPoly::zero(1);
        want.insert_add(lv(&[1]), g(1));
        want.insert_add(lv(&[-1]), g(1));
        assert_eq!(p, want);
    }

    #[test]
    fn series_coefficient_dimer_order_two() {
        // (2 + z + 1/z) * (V1 - V2)^{-1} with V = (0, 3)
        let pot = Potential::from_ints(&[0, 3]);
        let gr = graph(fixtures::dimer(pot.clone()));
        let p = series_coefficient(&gr, &pot, 0, 2, &lim()).unwrap();
        let w = Gaussian::from_ratio(-1, 3);
        assert_eq!(p.coeff(&lv(&[0])), Some(&w.mul(&g(2))));
        assert_eq!(p.coeff(&lv(&[1])), Some(&w));
        assert_eq!(p.coeff(&lv(&[-1])), Some(&w));
        // no length-1 loops at vertex 1 -> zero first-order coefficient
        let p1 = series_coefficient(&gr, &pot, 0, 1, &lim()).unwrap();
        assert!(p1.is_zero());
    }

    #[test]
    fn degenerate_potential_is_an_error() {
        let pot = Potential::from_ints(&[1, 1]);
        let gr = graph(fixtures::dimer(pot.clone()));
        assert!(matches!(
            series_coefficient(&gr, &pot, 0, 2, &lim()),
            Err(LoopError::DegeneratePotential { .. })
        ));
    }

    #[test]
    fn regrouping_identity() {
        // Direct sum over configurations equals the resummed reconstruction.
        let pot = Potential::from_ints(&[0, 2, 5]);
        let gr = graph(fixtures::long_edge_chain(pot.clone()));
        for base in 0..3 {
            for k in 1..=5 {
                let direct = series_coefficient(&gr, &pot, base, k, &lim()).unwrap();
                let table = resummed_table(&gr, base, k, &lim(), ExecMode::default()).unwrap();
                let mut regrouped = LaurentPoly::zero(gr.d());
                for (key, entry) in &table.entries {
                    let class = LoopStats {
                        length: k,
                        quasi: key.quasi.clone(),
                        footprint: key.footprint.clone(),
                        attachment_count: 0,
                        weight_product: entry.totalcont.clone(),
                    };
                    regrouped.insert_add(key.quasi.clone(), class.cont(&pot, base).unwrap());
                }
                assert_eq!(direct, regrouped, "base {base} order {k}");
            }
        }
    }

    #[test]
    fn growth_constant_is_finite_and_modest() {
        let gr = graph(fixtures::lieb(Potential::from_ints(&[0, 1, 2])));
        let c = fitted_growth_constant(&gr, 0, 6, &lim()).unwrap();
        assert!(c > 1.0 && c < 40.0, "fitted constant {c}");
        let (counts, _) = config_counts(&gr, 0, 8, &lim()).unwrap();
        for t in 1..=8 {
            assert!(counts[t] as f64 <= (1.5 * c).powi(t as i32));
        }
    }

    #[test]
    fn branch_tracking_single_vertex_chain_is_exact() {
        let gr = graph(fixtures::single_vertex_chain(g(2)));
        let z = [Complex64::new(1.0, 0.0)];
        let eps = [1e-4, 1e-3, 1e-2];
        let branch = eigenvalue_branch(&gr, gr.potential(), 0, &z, &eps).unwrap();
        for (&e, &lam) in eps.iter().zip(&branch) {
            let want = 2.0 + 2.0 * e;
            assert!((lam - want).norm() < 1e-12);
        }
    }

    #[test]
    fn series_check_single_vertex_chain_exact() {
        let gr = graph(fixtures::single_vertex_chain(g(2)));
        let z = [Complex64::from_polar(1.3, 0.7)];
        let eps = default_epsilon_list(&gr, gr.potential());
        for order in 1..=3 {
            let chk = series_vs_eigenvalue_check(&gr, gr.potential(), 0, order, &eps, &z, &lim())
                .unwrap();
            assert!(chk.max_error < 1e-13, "order {order}: {:.3e}", chk.max_error);
        }
    }

    #[test]
    fn series_check_dimer_orders() {
        let pot = Potential::from_ints(&[0, 5]);
        let gr = graph(fixtures::dimer(pot.clone()));
        let z = [Complex64::from_polar(1.2, 1.0)];
        let eps = default_epsilon_list(&gr, &pot);
        let chk = series_vs_eigenvalue_check(&gr, &pot, 0, 1, &eps, &z, &lim()).unwrap();
        let s = chk.slope.expect("error above floor");
        assert!((s - 2.0).abs() < 0.3, "K=1 slope {s}");
        // odd coefficients vanish for the dimer: K=2 behaves like K=3
        let chk = series_vs_eigenvalue_check(&gr, &pot, 0, 2, &eps, &z, &lim()).unwrap();
        let s = chk.slope.expect("error above floor");
        assert!(s >= 2.7, "K=2 slope {s}");
        assert!((s - 4.0).abs() < 0.3, "closed form says the remainder is O(eps^4): {s}");
    }

    #[test]
    fn series_check_validates_inputs() {
        let pot = Potential::from_ints(&[0, 5]);
        let gr = graph(fixtures::dimer(pot.clone()));
        let eps = default_epsilon_list(&gr, &pot);
        let bad_z = [Complex64::new(3.0, 0.0)];
        assert!(matches!(
            series_vs_eigenvalue_check(&gr, &pot, 0, 1, &eps, &bad_z, &lim()),
            Err(LoopError::InvalidArgument(_))
        ));
        let z = [Complex64::new(1.0, 0.0)];
        assert!(matches!(
            series_vs_eigenvalue_check(&gr, &pot, 0, 1, &[1.0], &z, &lim()),
            Err(LoopError::InvalidArgument(_))
        ));
    }

    #[test]
    fn single_vertex_chain_no_quasi_zero_entries_missing() {
        // order-1 table has the two unit-quasimomentum entries and nothing else
        let gr = graph(fixtures::single_vertex_chain(g(0)));
        let t = resummed_table(&gr, 0, 1, &lim(), ExecMode::Sequential).unwrap();
        assert_eq!(t.entries.len(), 2);
        assert_eq!(t.get(&Footprint::empty(), &lv(&[1])).unwrap().totalcont, g(1));
        assert_eq!(t.get(&Footprint::empty(), &lv(&[-1])).unwrap().totalcont, g(1));
    }
}
