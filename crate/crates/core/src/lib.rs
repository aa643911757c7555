//! Exact symbolic/numeric toolkit for Z^d-periodic discrete Schrödinger-type
//! operators: Floquet fiber matrices, flat-band detection over the Gaussian
//! rationals, and the loop-configuration calculus behind the
//! Rayleigh–Schrödinger perturbation series, including the extremal-loop
//! search that certifies flat-band absence for generic potentials.

pub mod eigen;
pub mod energy;
pub mod exec;
pub mod extremal;
pub mod fixtures;
pub mod flatband;
pub mod floquet;
pub mod graph;
pub mod io;
pub mod lattice;
pub mod laurent;
pub mod loops;
pub mod random;
pub mod scalar;

pub use exec::ExecMode;
pub use graph::{validate_spec, PeriodicGraphSpec, Potential, ValidatedGraph};
pub use lattice::LatticeVector;
pub use scalar::Gaussian;
