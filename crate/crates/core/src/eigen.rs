//! Thin numeric eigenvalue helpers over nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EigenError {
    #[error("EigenSolverFailure: Schur iteration did not converge for a {n}x{n} matrix")]
    NonConvergence { n: usize },
}

pub fn is_hermitian(m: &DMatrix<Complex64>, tol: f64) -> bool {
    let n = m.nrows();
    for i in 0..n {
        for j in i..n {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Eigenvalues of a Hermitian matrix, sorted ascending. The caller guarantees
/// Hermitian input.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// Eigenvalues of a general complex matrix via the Schur decomposition.
pub fn general_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>, EigenError> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = m
        .clone()
        .try_schur(1e-14, 100_000)
        .ok_or(EigenError::NonConvergence { n })?;
    schur
        .eigenvalues()
        .map(|ev| ev.iter().copied().collect())
        .ok_or(EigenError::NonConvergence { n })
}

/// Lexicographic (re, im) sort for multiset comparison of complex spectra.
pub fn sort_complex(ev: &mut [Complex64]) {
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}
