//! Fiber matrices h_ε(z) = V + ε Σ_α z^α b_α, torus evaluation, band
//! sampling, and the finite-torus restriction check.
//!
//! The fiber family is the Floquet transform of the periodic operator H: the
//! transformed operator acts as multiplication by θ ↦ h(θ) on
//! L²([0,1)^d; C^N). The executable content of that identity is
//! [`finite_torus_check`]: restricting H to the discrete torus (Z/LZ)^d must
//! reproduce the union of the fiber spectra over the L-division points.

use crate::eigen::{self, EigenError};
use crate::exec::{self, ExecMode};
use crate::graph::{Potential, ValidatedGraph};
use crate::lattice::LatticeVector;
use crate::laurent::{AlgebraError, LaurentPoly};
use crate::scalar::{Approx, Gaussian, Ring, RingOps};
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FloquetError {
    #[error("SizeMismatch: potential has {found} values but the graph has {expected} vertices")]
    SizeMismatch { expected: usize, found: usize },
    #[error("DimensionTooLarge: torus restriction needs dimension {dim}, cap is {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// The symbolic N×N fiber matrix. Diagonal entries are V_i plus ε times the
/// diagonal hopping part (which has no z^0 term); off-diagonal entries are
/// ε times the corresponding Laurent entries of Σ z^α b_α.
#[derive(Clone, Debug)]
pub struct FiberMatrix {
    d: usize,
    n: usize,
    epsilon: Gaussian,
    potential: Potential,
    entries: Vec<LaurentPoly<Gaussian>>,
}

/// Builds h_ε(z) for a validated graph; ε = 1 gives the plain fiber operator.
pub fn build_fiber(
    g: &ValidatedGraph,
    potential: &Potential,
    epsilon: &Gaussian,
) -> Result<FiberMatrix, FloquetError> {
    if potential.len() != g.n() {
        return Err(FloquetError::SizeMismatch { expected: g.n(), found: potential.len() });
    }
    let n = g.n();
    let d = g.d();
    let mut entries = vec![LaurentPoly::zero(d); n * n];
    for e in g.edges() {
        entries[e.from * n + e.to].insert_add(e.shift.clone(), e.weight.mul(epsilon));
    }
    for i in 0..n {
        entries[i * n + i].insert_add(LatticeVector::zero(d), potential.value(i).clone());
    }
    Ok(FiberMatrix { d, n, epsilon: epsilon.clone(), potential: potential.clone(), entries })
}

impl FiberMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.d
    }

    pub fn epsilon(&self) -> &Gaussian {
        &self.epsilon
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentPoly<Gaussian> {
        &self.entries[i * self.n + j]
    }

    /// Evaluation at z_k = e^{2πiθ_k}.
    pub fn eval_theta(&self, theta: &[f64]) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j).eval_theta(theta))
    }

    /// Evaluation at a general point of (C \ {0})^d.
    pub fn eval_z(&self, z: &[Complex64]) -> Result<DMatrix<Complex64>, AlgebraError> {
        let mut m = DMatrix::from_element(self.n, self.n, Complex64::new(0.0, 0.0));
        for i in 0..self.n {
            for j in 0..self.n {
                m[(i, j)] = self.entry(i, j).eval(z)?;
            }
        }
        Ok(m)
    }

    /// Exact predicate: h(z) = h(z)* on the unit torus. Holds iff the
    /// potential is real, ε is real, and the weights are Hermitian.
    pub fn is_self_adjoint(&self) -> bool {
        (0..self.n).all(|i| {
            (i..self.n).all(|j| *self.entry(i, j) == self.entry(j, i).conj_reverse())
        })
    }
}

/// Uniform tensor grid {0, 1/side, …, (side−1)/side}^d in lexicographic
/// order. Odd side lengths avoid the symmetry-degenerate half-integer points.
pub fn uniform_grid(d: usize, side: usize) -> Vec<Vec<f64>> {
    assert!(side >= 1);
    let total = side.pow(d as u32);
    let mut grid = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut theta = vec![0.0; d];
        for k in (0..d).rev() {
            theta[k] = (idx % side) as f64 / side as f64;
            idx /= side;
        }
        grid.push(theta);
    }
    grid
}

/// Default grid side for band sampling.
pub const DEFAULT_GRID_SIDE: usize = 11;

/// Eigenvalues of h(θ) over a θ grid. In the self-adjoint case each row is
/// real and sorted ascending; otherwise rows carry the solver's order.
#[derive(Clone, Debug)]
pub struct BandSample {
    pub grid: Vec<Vec<f64>>,
    pub energies: Vec<Vec<Complex64>>,
    pub self_adjoint: bool,
}

impl BandSample {
    /// Per-band (min, max) over the grid; meaningful in the self-adjoint case.
    pub fn band_ranges(&self) -> Vec<(f64, f64)> {
        let n = self.energies.first().map(|r| r.len()).unwrap_or(0);
        (0..n)
            .map(|b| {
                let lo = self.energies.iter().map(|r| r[b].re).fold(f64::INFINITY, f64::min);
                let hi = self.energies.iter().map(|r| r[b].re).fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            })
            .collect()
    }
}

pub fn band_sample(
    fiber: &FiberMatrix,
    grid: &[Vec<f64>],
    mode: ExecMode,
) -> Result<BandSample, FloquetError> {
    let self_adjoint = fiber.is_self_adjoint();
    let rows: Vec<Result<Vec<Complex64>, EigenError>> =
        exec::map_collect(mode, grid.to_vec(), |theta| {
            let m = fiber.eval_theta(&theta);
            if self_adjoint {
                Ok(eigen::hermitian_eigenvalues(&m)
                    .into_iter()
                    .map(|e| Complex64::new(e, 0.0))
                    .collect())
            } else {
                eigen::general_eigenvalues(&m)
            }
        });
    let energies = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(BandSample { grid: grid.to_vec(), energies, self_adjoint })
}

/// Default cap on the torus restriction dimension N·L^d.
pub const TORUS_DIMENSION_CAP: usize = 4096;

#[derive(Clone, Debug)]
pub struct TorusCheck {
    pub pass: bool,
    pub max_deviation: f64,
    pub dimension: usize,
    pub tolerance: f64,
}

/// Compares the spectrum of H restricted to (Z/LZ)^d (shifts wrapped mod L)
/// with the union over θ ∈ {0, 1/L, …, (L−1)/L}^d of spec h(θ).
pub fn finite_torus_check(
    g: &ValidatedGraph,
    potential: &Potential,
    l: usize,
    mode: ExecMode,
) -> Result<TorusCheck, FloquetError> {
    finite_torus_check_with_cap(g, potential, l, TORUS_DIMENSION_CAP, mode)
}

pub fn finite_torus_check_with_cap(
    g: &ValidatedGraph,
    potential: &Potential,
    l: usize,
    cap: usize,
    mode: ExecMode,
) -> Result<TorusCheck, FloquetError> {
    assert!(l >= 1, "torus side must be positive");
    if potential.len() != g.n() {
        return Err(FloquetError::SizeMismatch { expected: g.n(), found: potential.len() });
    }
    let n = g.n();
    let d = g.d();
    let cells = l.pow(d as u32);
    let dim = n * cells;
    if dim > cap {
        return Err(FloquetError::DimensionTooLarge { dim, cap });
    }

    let cell_index = |coords: &[i64]| -> usize {
        coords.iter().fold(0usize, |acc, &c| acc * l + (c.rem_euclid(l as i64)) as usize)
    };
    let mut torus = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    let mut coords = vec![0i64; d];
    for cell in 0..cells {
        let mut idx = cell;
        for k in (0..d).rev() {
            coords[k] = (idx % l) as i64;
            idx /= l;
        }
        for e in g.edges() {
            let shifted: Vec<i64> = coords
                .iter()
                .zip(e.shift.components())
                .map(|(&c, &s)| c + s)
                .collect();
            let col = e.to * cells + cell_index(&shifted);
            let row = e.from * cells + cell;
            torus[(row, col)] += e.weight.approx();
        }
        for i in 0..n {
            torus[(i * cells + cell, i * cells + cell)] += potential.value(i).approx();
        }
    }

    let self_adjoint = g.is_self_adjoint_with(potential);
    let fiber = build_fiber(g, potential, &Gaussian::one())?;
    let grid = uniform_grid(d, l);

    let mut torus_eigs: Vec<Complex64>;
    let mut fiber_eigs: Vec<Complex64>;
    if self_adjoint {
        torus_eigs = eigen::hermitian_eigenvalues(&torus)
            .into_iter()
            .map(|e| Complex64::new(e, 0.0))
            .collect();
        let rows = exec::map_collect(mode, grid, |theta| {
            eigen::hermitian_eigenvalues(&fiber.eval_theta(&theta))
        });
        fiber_eigs = rows
            .into_iter()
            .flatten()
            .map(|e| Complex64::new(e, 0.0))
            .collect();
    } else {
        torus_eigs = eigen::general_eigenvalues(&torus)?;
        let rows: Vec<Result<Vec<Complex64>, EigenError>> =
            exec::map_collect(mode, grid, |theta| {
                eigen::general_eigenvalues(&fiber.eval_theta(&theta))
            });
        fiber_eigs = rows.into_iter().collect::<Result<Vec<Vec<_>>, _>>()?.concat();
    }
    eigen::sort_complex(&mut torus_eigs);
    eigen::sort_complex(&mut fiber_eigs);
    debug_assert_eq!(torus_eigs.len(), fiber_eigs.len());

    let max_deviation = torus_eigs
        .iter()
        .zip(&fiber_eigs)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let tolerance = 1e-8 * (1.0 + potential.max_abs() + g.quotient().weight_bound());
    Ok(TorusCheck { pass: max_deviation <= tolerance, max_deviation, dimension: dim, tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::validate_spec;

    fn g(n: i64) -> Gaussian {
        Gaussian::from_int(n)
    }

    fn lieb_graph(p: &[i64]) -> ValidatedGraph {
        validate_spec(&fixtures::lieb(Potential::from_ints(p))).unwrap()
    }

    #[test]
    fn fiber_matches_printed_lieb_matrix() {
        let gr = lieb_graph(&[0, 1, 2]);
        let f = build_fiber(&gr, gr.potential(), &Gaussian::one()).unwrap();
        let lv = |c: &[i64]| LatticeVector::new(c.to_vec());
        // entry (1,2) = 1 + 1/z1
        assert_eq!(f.entry(0, 1).coeff(&lv(&[0, 0])), Some(&g(1)));
        assert_eq!(f.entry(0, 1).coeff(&lv(&[-1, 0])), Some(&g(1)));
        assert_eq!(f.entry(0, 1).num_terms(), 2);
        // entry (2,3) = 0
        assert!(f.entry(1, 2).is_zero());
        // diagonal carries the potential
        assert_eq!(f.entry(1, 1).coeff(&lv(&[0, 0])), Some(&g(1)));
        assert!(f.is_self_adjoint());
    }

    #[test]
    fn epsilon_zero_is_diagonal() {
        let gr = lieb_graph(&[0, 1, 2]);
        let f = build_fiber(&gr, gr.potential(), &Gaussian::zero()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert_eq!(f.entry(i, j).num_terms(), if i == 0 { 0 } else { 1 });
                } else {
                    assert!(f.entry(i, j).is_zero());
                }
            }
        }
    }

    #[test]
    fn fiber_matches_printed_chain_matrix() {
        let spec = fixtures::long_edge_chain(Potential::from_ints(&[0, 1, 2]));
        let gr = validate_spec(&spec).unwrap();
        let f = build_fiber(&gr, gr.potential(), &Gaussian::one()).unwrap();
        let lv = |c: &[i64]| LatticeVector::new(c.to_vec());
        assert_eq!(f.entry(0, 1).coeff(&lv(&[-2])), Some(&g(-1)));
        assert_eq!(f.entry(0, 1).coeff(&lv(&[0])), Some(&g(1)));
        assert_eq!(f.entry(0, 2).coeff(&lv(&[1])), Some(&g(1)));
        assert_eq!(f.entry(2, 0).coeff(&lv(&[-1])), Some(&g(1)));
        assert!(f.is_self_adjoint());
    }

    #[test]
    fn eval_theta_single_vertex_chain() {
        let spec = fixtures::single_vertex_chain(g(5));
        let gr = validate_spec(&spec).unwrap();
        let f = build_fiber(&gr, gr.potential(), &Gaussian::one()).unwrap();
        for theta in [0.0, 0.13, 0.25, 0.5] {
            let m = f.eval_theta(&[theta]);
            let want = 5.0 + 2.0 * (std::f64::consts::TAU * theta).cos();
            assert!((m[(0, 0)] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn eval_theta_lieb_origin() {
        let gr = lieb_graph(&[0, 1, 2]);
        let f = build_fiber(&gr, gr.potential(), &Gaussian::one()).unwrap();
        let m = f.eval_theta(&[0.0, 0.0]);
        assert!((m[(0, 1)] - 2.0).norm() < 1e-14);
        assert!((m[(1, 2)]).norm() < 1e-14);
    }

    #[test]
    fn self_adjoint_fiber_is_hermitian_on_torus() {
        let gr = lieb_graph(&[0, 1, 2]);
        let f = build_fiber(&gr, gr.potential(), &Gaussian::one()).unwrap();
        let m = f.eval_theta(&[0.311, 0.729]);
        assert!(eigen::is_hermitian(&m, 1e-12));
    }

    #[test]
    fn band_rows_single_vertex_chain() {
        let spec = fixtures::single_vertex_chain(g(0));
        let gr = validate_spec(&spec).unwrap();
        let f = build_fiber(&gr, gr.potential(), &Gaussian::one()).unwrap();
        let grid = vec![vec![0.0], vec![0.25], vec![0.5]];
        let s = band_sample(&f, &grid, ExecMode::Sequential).unwrap();
        assert!(s.self_adjoint);
        assert_eq!(s.energies.len(), 3);
        for (row, want) in s.energies.iter().zip([2.0, 0.0, -2.0]) {
            assert_eq!(row.len(), 1);
            assert!((row[0].re - want).abs() < 1e-12 && row[0].im == 0.0);
        }
    }

    #[test]
    fn lieb_flat_band_is_constant_middle_column() {
        let gr = lieb_graph(&[0, 1, 1]);
        let f = build_fiber(&gr, gr.potential(), &Gaussian::one()).unwrap();
        let grid = uniform_grid(2, 7);
        let s = band_sample(&f, &grid, ExecMode::default()).unwrap();
        for row in &s.energies {
            assert_eq!(row.len(), 3);
            assert!((row[1].re - 1.0).abs() < 1e-9, "middle band should sit at 1");
        }
    }

    #[test]
    fn band_ranges_refine_monotonically() {
        let gr = lieb_graph(&[0, 1, 2]);
        let f = build_fiber(&gr, gr.potential(), &Gaussian::one()).unwrap();
        let coarse = band_sample(&f, &uniform_grid(2, 5), ExecMode::default()).unwrap();
        let fine = band_sample(&f, &uniform_grid(2, 15), ExecMode::default()).unwrap();
        for (c, f) in coarse.band_ranges().iter().zip(fine.band_ranges()) {
            assert!(f.0 <= c.0 + 1e-12 && c.1 <= f.1 + 1e-12);
        }
    }

    #[test]
    fn torus_l1_and_l2_single_vertex_chain() {
        let spec = fixtures::single_vertex_chain(g(3));
        let gr = validate_spec(&spec).unwrap();
        let c = finite_torus_check(&gr, gr.potential(), 2, ExecMode::Sequential).unwrap();
        assert!(c.pass, "deviation {} tol {}", c.max_deviation, c.tolerance);
        assert_eq!(c.dimension, 2);
        let c = finite_torus_check(&gr, gr.potential(), 1, ExecMode::Sequential).unwrap();
        assert!(c.pass);
    }

    #[test]
    fn torus_lieb_l2() {
        let gr = lieb_graph(&[0, 1, 2]);
        let c = finite_torus_check(&gr, gr.potential(), 2, ExecMode::default()).unwrap();
        assert_eq!(c.dimension, 12);
        assert!(c.pass, "deviation {} tol {}", c.max_deviation, c.tolerance);
    }

    #[test]
    fn torus_dimension_cap() {
        let gr = lieb_graph(&[0, 1, 2]);
        let err = finite_torus_check_with_cap(&gr, gr.potential(), 2, 10, ExecMode::Sequential)
            .unwrap_err();
        assert_eq!(err, FloquetError::DimensionTooLarge { dim: 12, cap: 10 });
    }

    #[test]
    fn potential_size_mismatch() {
        let gr = lieb_graph(&[0, 1, 2]);
        let bad = Potential::from_ints(&[0, 1]);
        assert!(matches!(
            build_fiber(&gr, &bad, &Gaussian::one()),
            Err(FloquetError::SizeMismatch { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn grid_shape() {
        let grid = uniform_grid(2, 3);
        assert_eq!(grid.len(), 9);
        assert_eq!(grid[0], vec![0.0, 0.0]);
        assert_eq!(grid[1], vec![0.0, 1.0 / 3.0]);
        assert_eq!(grid[3], vec![1.0 / 3.0, 0.0]);
    }
}
