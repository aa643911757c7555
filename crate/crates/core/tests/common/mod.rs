//! Test-only oracles, independent of the library's enumeration machinery.
//!
//! * A naive depth-first enumerator of loop configurations written straight
//!   from the definitions (no memoization, no sequence tables).
//! * A symbolic Rayleigh–Schrödinger recursion: eigenvector coefficients as
//!   polynomials in the vertex factors W_s with Laurent-z coefficients,
//!   derived from (V + εB)ψ = λψ alone. Grouping by W-monomial reproduces
//!   the (footprint, quasimomentum) tables through plain linear algebra.
//! * A contour-quadrature derivative estimator with Richardson extrapolation
//!   over two radii, for checking series coefficients against the tracked
//!   eigenvalue branch.

use flatband_core::eigen::general_eigenvalues;
use flatband_core::graph::{Potential, ValidatedGraph};
use flatband_core::lattice::LatticeVector;
use flatband_core::laurent::LaurentPoly;
use flatband_core::loops::hopping_matrix;
use flatband_core::scalar::{Approx, FieldScalar, Gaussian, Ring, RingOps};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::BTreeMap;

pub type OracleKey = (BTreeMap<usize, usize>, Vec<i64>);
pub type OracleTable = BTreeMap<OracleKey, (Gaussian, usize)>;

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub root: Vec<(usize, LatticeVector)>,
    pub attach: BTreeMap<usize, Vec<OracleConfig>>,
}

fn oracle_simple_loops(
    g: &ValidatedGraph,
    base: usize,
    len: usize,
) -> Vec<Vec<(usize, LatticeVector)>> {
    fn walk(
        g: &ValidatedGraph,
        base: usize,
        len: usize,
        at: usize,
        path: Vec<(usize, LatticeVector)>,
        out: &mut Vec<Vec<(usize, LatticeVector)>>,
    ) {
        if path.len() == len {
            if at == base {
                out.push(path);
            }
            return;
        }
        for e in g.out_edges(at) {
            let interior_ok = path.len() + 1 == len || e.to != base;
            if interior_ok {
                let mut next = path.clone();
                next.push((e.to, e.shift.clone()));
                walk(g, base, len, e.to, next, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(g, base, len, base, Vec::new(), &mut out);
    out
}

/// Ordered lists of configurations with the given total length.
fn oracle_sequences(g: &ValidatedGraph, base: usize, total: usize) -> Vec<Vec<OracleConfig>> {
    if total == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first_len in 1..=total {
        for first in oracle_configs(g, base, first_len) {
            for rest in oracle_sequences(g, base, total - first_len) {
                let mut seq = vec![first.clone()];
                seq.extend(rest);
                out.push(seq);
            }
        }
    }
    out
}

/// Assignments of sequences to the interior positions, spending `budget`.
fn oracle_decorations(
    g: &ValidatedGraph,
    base: usize,
    positions: &[usize],
    budget: usize,
) -> Vec<BTreeMap<usize, Vec<OracleConfig>>> {
    match positions.split_first() {
        None => {
            if budget == 0 {
                vec![BTreeMap::new()]
            } else {
                Vec::new()
            }
        }
        Some((&pos, rest)) => {
            let mut out = Vec::new();
            for spend in 0..=budget {
                for seq in oracle_sequences(g, base, spend) {
                    for mut deco in oracle_decorations(g, base, rest, budget - spend) {
                        if !seq.is_empty() {
                            deco.insert(pos, seq.clone());
                        }
                        out.push(deco);
                    }
                }
            }
            out
        }
    }
}

pub fn oracle_configs(g: &ValidatedGraph, base: usize, k: usize) -> Vec<OracleConfig> {
    let mut out = Vec::new();
    for m in 1..=k {
        for root in oracle_simple_loops(g, base, m) {
            let positions: Vec<usize> = (1..m).collect();
            for attach in oracle_decorations(g, base, &positions, k - m) {
                out.push(OracleConfig { root: root.clone(), attach });
            }
        }
    }
    out
}

/// (length, quasi, footprint, attachment count, weight product), straight
/// from the defining formulas.
pub fn oracle_stats(
    g: &ValidatedGraph,
    base: usize,
    cfg: &OracleConfig,
) -> (usize, Vec<i64>, BTreeMap<usize, usize>, usize, Gaussian) {
    let d = g.d();
    let mut length = cfg.root.len();
    let mut quasi = vec![0i64; d];
    let mut foot: BTreeMap<usize, usize> = BTreeMap::new();
    let mut attach_count = 0usize;
    let mut weight = Gaussian::one();
    let mut from = base;
    for (idx, (to, shift)) in cfg.root.iter().enumerate() {
        weight = weight.mul(g.weight(from, *to, shift).expect("edge exists"));
        for (q, s) in quasi.iter_mut().zip(shift.components()) {
            *q += s;
        }
        if idx + 1 < cfg.root.len() {
            *foot.entry(*to).or_insert(0) += 1;
        }
        from = *to;
    }
    for (&pos, seq) in &cfg.attach {
        let vertex = cfg.root[pos - 1].0;
        for sub in seq {
            let (sl, sq, sf, sa, sw) = oracle_stats(g, base, sub);
            length += sl;
            for (q, s) in quasi.iter_mut().zip(&sq) {
                *q += s;
            }
            for (v, c) in sf {
                *foot.entry(v).or_insert(0) += c;
            }
            *foot.entry(vertex).or_insert(0) += 1;
            attach_count += 1 + sa;
            weight = weight.mul(&sw);
        }
    }
    (length, quasi, foot, attach_count, weight)
}

/// Brute-force (footprint, quasimomentum) → (totalcont, #configs) at order k.
pub fn oracle_table(g: &ValidatedGraph, base: usize, k: usize) -> OracleTable {
    let mut table: OracleTable = BTreeMap::new();
    for cfg in oracle_configs(g, base, k) {
        let (len, quasi, foot, attach, weight) = oracle_stats(g, base, &cfg);
        assert_eq!(len, k);
        let signed = if attach % 2 == 0 { weight } else { weight.neg() };
        let entry = table.entry((foot, quasi)).or_insert_with(|| (Gaussian::zero(), 0));
        entry.0 = entry.0.add(&signed);
        entry.1 += 1;
    }
    table
}

// ---------------------------------------------------------------------------
// Rayleigh–Schrödinger recursion with symbolic W bookkeeping.
// ---------------------------------------------------------------------------

/// Polynomial in the vertex factors {W_s} whose coefficients are Laurent
/// polynomials in z; keyed by the W-monomial (a vertex multiset).
#[derive(Clone, Debug, PartialEq)]
pub struct WPoly {
    pub terms: BTreeMap<BTreeMap<usize, usize>, LaurentPoly<Gaussian>>,
}

impl WPoly {
    pub fn zero() -> Self {
        WPoly { terms: BTreeMap::new() }
    }

    pub fn constant(p: LaurentPoly<Gaussian>) -> Self {
        let mut terms = BTreeMap::new();
        if !p.is_zero() {
            terms.insert(BTreeMap::new(), p);
        }
        WPoly { terms }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (mono, p) in &rhs.terms {
            match out.terms.entry(mono.clone()) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(p.clone());
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let sum = e.get().add(p);
                    if sum.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = sum;
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        WPoly { terms: self.terms.iter().map(|(m, p)| (m.clone(), p.negated())).collect() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = WPoly::zero();
        for (ma, pa) in &self.terms {
            for (mb, pb) in &rhs.terms {
                let mut mono = ma.clone();
                for (&v, &c) in mb {
                    *mono.entry(v).or_insert(0) += c;
                }
                let prod = pa.mul(pb);
                match out.terms.entry(mono) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        if !prod.is_zero() {
                            e.insert(prod);
                        }
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let sum = e.get().add(&prod);
                        if sum.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = sum;
                        }
                    }
                }
            }
        }
        out
    }

    /// Multiply by W_s (footprint shift by one copy of `s`).
    pub fn times_w(&self, s: usize) -> Self {
        WPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, p)| {
                    let mut mono = m.clone();
                    *mono.entry(s).or_insert(0) += 1;
                    (mono, p.clone())
                })
                .collect(),
        }
    }

    pub fn scale(&self, c: &Gaussian) -> Self {
        let mut out = WPoly::zero();
        for (m, p) in &self.terms {
            let sp = p.scaled(c);
            if !sp.is_zero() {
                out.terms.insert(m.clone(), sp);
            }
        }
        out
    }
}

/// Symbolic ε^k coefficients of λ_base for k = 1..=kmax from the eigenvalue
/// recursion: with ψ normalized by ψ_base ≡ 1,
///
/// ```text
/// λ^(k) = (Bψ^(k−1))_base,
/// ψ_s^(k) = W_s [ (Bψ^(k−1))_s − Σ_{m<k} λ^(m) ψ_s^(k−m) ],  s ≠ base.
/// ```
pub fn rs_recursion_coefficients(g: &ValidatedGraph, base: usize, kmax: usize) -> Vec<WPoly> {
    let n = g.n();
    let d = g.d();
    // symbolic hopping matrix as Laurent polynomials
    let mut b = vec![vec![LaurentPoly::<Gaussian>::zero(d); n]; n];
    for e in g.edges() {
        b[e.from][e.to].insert_add(e.shift.clone(), e.weight.clone());
    }
    let apply_b = |psi: &[WPoly]| -> Vec<WPoly> {
        (0..n)
            .map(|s| {
                let mut acc = WPoly::zero();
                for t in 0..n {
                    if b[s][t].is_zero() {
                        continue;
                    }
                    acc = acc.add(&WPoly::constant(b[s][t].clone()).mul(&psi[t]));
                }
                acc
            })
            .collect()
    };
    let mut psi_levels: Vec<Vec<WPoly>> = Vec::with_capacity(kmax + 1);
    let mut psi0 = vec![WPoly::zero(); n];
    psi0[base] = WPoly::constant(LaurentPoly::constant(d, Gaussian::one()));
    psi_levels.push(psi0);
    let mut lambdas: Vec<WPoly> = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let bp = apply_b(&psi_levels[k - 1]);
        let lambda_k = bp[base].clone();
        let mut psi_k = vec![WPoly::zero(); n];
        for s in 0..n {
            if s == base {
                continue;
            }
            let mut rhs = bp[s].clone();
            for m in 1..k {
                rhs = rhs.sub(&lambdas[m - 1].mul(&psi_levels[k - m][s]));
            }
            psi_k[s] = rhs.times_w(s);
        }
        psi_levels.push(psi_k);
        lambdas.push(lambda_k);
    }
    lambdas
}

/// Converts the k-th RS coefficient into table form (nonzero entries only).
pub fn rs_table(g: &ValidatedGraph, base: usize, k: usize) -> BTreeMap<OracleKey, Gaussian> {
    let lambda = rs_recursion_coefficients(g, base, k).pop().expect("k >= 1");
    let mut out = BTreeMap::new();
    for (mono, p) in &lambda.terms {
        for (alpha, c) in p.terms() {
            out.insert((mono.clone(), alpha.components().to_vec()), c.clone());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Contour-quadrature derivative estimation with Richardson extrapolation.
// ---------------------------------------------------------------------------

fn branch_at_complex_eps(
    g: &ValidatedGraph,
    potential: &Potential,
    base: usize,
    z: &[Complex64],
    path: &[Complex64],
) -> Vec<Complex64> {
    let b = hopping_matrix(g, z).expect("nonzero z");
    let n = g.n();
    let diag: Vec<Complex64> = (0..n).map(|i| potential.value(i).approx()).collect();
    let mut prev = diag[base];
    let mut out = Vec::with_capacity(path.len());
    for &eps in path {
        let mut m: DMatrix<Complex64> = &b * eps;
        for i in 0..n {
            m[(i, i)] += diag[i];
        }
        let eigs = general_eigenvalues(&m).expect("schur converges");
        prev = eigs
            .into_iter()
            .min_by(|a, b| (a - prev).norm().total_cmp(&(b - prev).norm()))
            .unwrap();
        out.push(prev);
    }
    out
}

/// λ^{(k)}/k! = c_k via the trapezoidal contour rule at radius ρ: the branch
/// is tracked from ε = 0 out to ρ and once around the circle.
fn contour_ck(
    g: &ValidatedGraph,
    potential: &Potential,
    base: usize,
    z: &[Complex64],
    k: usize,
    rho: f64,
    nodes: usize,
) -> Complex64 {
    let mut path: Vec<Complex64> = (1..=8)
        .map(|i| Complex64::new(rho * i as f64 / 8.0, 0.0))
        .collect();
    let start = path.len() - 1;
    for m in 1..nodes {
        path.push(Complex64::from_polar(rho, std::f64::consts::TAU * m as f64 / nodes as f64));
    }
    let branch = branch_at_complex_eps(g, potential, base, z, &path);
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..nodes {
        let lam = branch[start + m];
        let phase = Complex64::from_polar(1.0, -std::f64::consts::TAU * (k * m) as f64 / nodes as f64);
        acc += lam * phase;
    }
    acc / (nodes as f64 * rho.powi(k as i32))
}

/// Richardson extrapolation over two contour radii (ρ and ρ/2): the leading
/// aliasing term of the quadrature scales as ρ^M, so the combination
/// (2^M D(ρ/2) − D(ρ)) / (2^M − 1) removes it.
pub fn richardson_ck(
    g: &ValidatedGraph,
    potential: &Potential,
    base: usize,
    z: &[Complex64],
    k: usize,
    rho: f64,
) -> Complex64 {
    const NODES: usize = 12;
    let d_full = contour_ck(g, potential, base, z, k, rho, NODES);
    let d_half = contour_ck(g, potential, base, z, k, rho / 2.0, NODES);
    let w = (2.0f64).powi(NODES as i32);
    (d_half * w - d_full) / (w - 1.0)
}

/// A safe contour radius well inside the perturbative disc.
pub fn contour_radius(g: &ValidatedGraph, potential: &Potential, z: &[Complex64]) -> f64 {
    let b = hopping_matrix(g, z).expect("nonzero z");
    let n = g.n();
    let row_sum = (0..n)
        .map(|i| (0..n).map(|j| b[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    0.15 * potential.separation() / row_sum
}
