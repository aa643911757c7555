//! Flat-band detection.
//!
//! E is a flat-band energy iff E is an eigenvalue of h(z) for every
//! z ∈ (C \ {0})^d, iff every z-coefficient q_α of det(h(z) − E·I) vanishes
//! at E. The exact detector takes the gcd of the q_α over the Gaussian
//! rationals and extracts its roots; the sampled detector thresholds |det|
//! at pseudo-random points of a polyannulus. Genericity is probed by running
//! the exact detector over randomly sampled potentials.

use crate::energy::{char_split, roots_energy, CharSplit, EnergyPoly};
use crate::exec::{self, ExecMode};
use crate::floquet::{build_fiber, FiberMatrix, FloquetError};
use crate::graph::{Potential, ValidatedGraph};
use crate::lattice::LatticeVector;
use crate::laurent::AlgebraError;
use crate::scalar::{Approx, Gaussian, Ring};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlatBandError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Floquet(#[from] FloquetError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionMethod {
    Exact,
    Sampled,
}

impl DetectionMethod {
    pub fn name(&self) -> &'static str {
        match self {
            DetectionMethod::Exact => "exact",
            DetectionMethod::Sampled => "sampled",
        }
    }
}

/// One flat-band energy with its certification status.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatBandEnergy {
    /// Present when the energy was certified in ℚ(i) by exact substitution
    /// into every q_α.
    pub exact: Option<Gaussian>,
    pub numeric: Complex64,
    /// Per-α residuals |q_α(E)| (exactly zero for certified energies).
    pub residuals: Vec<(LatticeVector, f64)>,
}

#[derive(Debug, Clone)]
pub struct FlatBandReport {
    pub energies: Vec<FlatBandEnergy>,
    /// Monic gcd of the characteristic z-coefficients.
    pub gcd: EnergyPoly<Gaussian>,
    pub method: DetectionMethod,
}

impl FlatBandReport {
    pub fn has_flat_band(&self) -> bool {
        !self.energies.is_empty()
    }

    pub fn gcd_degree(&self) -> usize {
        self.gcd.degree().unwrap_or(0)
    }
}

fn residuals_at(split: &CharSplit, e: Complex64) -> Vec<(LatticeVector, f64)> {
    split
        .parts()
        .map(|(alpha, q)| (alpha.clone(), q.eval_c64(e).norm()))
        .collect()
}

/// Exact flat-band energies of a fiber matrix: the roots of
/// gcd_α q_α, where det(h(z) − E) = Σ_α z^α q_α(E).
pub fn flat_band_energies(fiber: &FiberMatrix) -> Result<FlatBandReport, FlatBandError> {
    let split = char_split(fiber)?;
    let gcd = split.gcd_all()?;
    if gcd.degree().unwrap_or(0) == 0 {
        return Ok(FlatBandReport { energies: Vec::new(), gcd, method: DetectionMethod::Exact });
    }
    let roots = roots_energy(&gcd)?;
    let mut energies: Vec<FlatBandEnergy> = Vec::new();
    for r in &roots.exact {
        debug_assert!(split.vanishes_at(r), "gcd root must kill every part");
        if energies.iter().any(|e| e.exact.as_ref() == Some(r)) {
            continue;
        }
        let numeric = r.approx();
        energies.push(FlatBandEnergy {
            exact: Some(r.clone()),
            numeric,
            residuals: residuals_at(&split, numeric).into_iter().map(|(a, _)| (a, 0.0)).collect(),
        });
    }
    // numeric roots not matched by a certified one
    for &r in &roots.numeric {
        let near_exact = energies
            .iter()
            .any(|e| (e.numeric - r).norm() < 1e-6 * (1.0 + r.norm()));
        if !near_exact {
            let already = energies
                .iter()
                .any(|e| e.exact.is_none() && (e.numeric - r).norm() < 1e-9 * (1.0 + r.norm()));
            if !already {
                energies.push(FlatBandEnergy {
                    exact: None,
                    numeric: r,
                    residuals: residuals_at(&split, r),
                });
            }
        }
    }
    Ok(FlatBandReport { energies, gcd, method: DetectionMethod::Exact })
}

/// Exact test of a single energy: substitute into every q_α.
pub fn is_flat_band(fiber: &FiberMatrix, e: &Gaussian) -> Result<bool, FlatBandError> {
    Ok(char_split(fiber)?.vanishes_at(e))
}

/// Scale-aware threshold for the sampled determinant test.
fn sampled_threshold(fiber: &FiberMatrix, e: Complex64) -> f64 {
    let n = fiber.n();
    // hopping coefficient bound: the diagonal z^0 coefficients are exactly
    // the potential values ((b_0)_{ii} = 0), everything else is hopping
    let mut max_coeff = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for (alpha, c) in fiber.entry(i, j).terms() {
                if i == j && alpha.is_zero() {
                    continue;
                }
                max_coeff = max_coeff.max(c.abs());
            }
        }
    }
    let mb = max_coeff * n as f64;
    1e-8 * (1.0 + e.norm()).powi(n as i32) * (1.0 + mb).powi(n as i32)
}

/// Number of sample points derived from the z-support of the fiber entries.
pub fn default_sample_count(fiber: &FiberMatrix) -> usize {
    let n = fiber.n();
    let mut span_total = 0i64;
    for i in 0..n {
        for j in 0..n {
            for (lo, hi) in fiber.entry(i, j).support_span() {
                span_total = span_total.max(hi - lo);
            }
        }
    }
    // the determinant's per-axis degree spread is at most n times the entry
    // spread; 2·span + 1 samples, as for a coefficient count
    (2 * span_total as usize * n + 1).max(3)
}

/// Sampled flat-band test: evaluates |det(h(z) − E)| at `samples`
/// pseudo-random points of the polyannulus 1/2 ≤ |z_k| ≤ 2 and declares a
/// flat band when every value stays under the scale-aware threshold.
pub fn is_flat_band_sampled(
    fiber: &FiberMatrix,
    e: Complex64,
    samples: usize,
    seed: u64,
) -> Result<bool, FlatBandError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = fiber.rank();
    let threshold = sampled_threshold(fiber, e);
    for _ in 0..samples {
        let z: Vec<Complex64> = (0..d)
            .map(|_| {
                let r = (rng.gen_range(0.5f64.ln()..2.0f64.ln())).exp();
                Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let mut m = fiber.eval_z(&z).map_err(AlgebraError::from)?;
        for i in 0..fiber.n() {
            m[(i, i)] -= e;
        }
        if m.lu().determinant().norm() > threshold {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Numeric flat-band scan, independent of the exact pipeline: candidate
/// energies are eigenvalues of h(θ₀) that reappear in the spectrum of h(θ)
/// at every grid point; survivors are confirmed by the sampled determinant
/// test. Reported energies carry no exactness certificate.
pub fn flat_band_scan_sampled(
    fiber: &FiberMatrix,
    grid_side: usize,
    seed: u64,
) -> Result<FlatBandReport, FlatBandError> {
    use crate::eigen;
    let split = char_split(fiber)?;
    let gcd = split.gcd_all()?;
    let grid = crate::floquet::uniform_grid(fiber.rank(), grid_side);
    let tol = 1e-6 * (1.0 + fiber.potential().max_abs());
    let spectra: Vec<Vec<Complex64>> = grid
        .iter()
        .map(|theta| eigen::general_eigenvalues(&fiber.eval_theta(theta)).map_err(FloquetError::from))
        .collect::<Result<_, _>>()?;
    let mut energies = Vec::new();
    if let Some(first) = spectra.first() {
        let samples = default_sample_count(fiber);
        for &cand in first {
            let everywhere = spectra
                .iter()
                .all(|spec| spec.iter().any(|&e| (e - cand).norm() < tol));
            let duplicate = energies
                .iter()
                .any(|e: &FlatBandEnergy| (e.numeric - cand).norm() < tol);
            if everywhere
                && !duplicate
                && is_flat_band_sampled(fiber, cand, samples, seed)?
            {
                energies.push(FlatBandEnergy {
                    exact: None,
                    numeric: cand,
                    residuals: residuals_at(&split, cand),
                });
            }
        }
    }
    Ok(FlatBandReport { energies, gcd, method: DetectionMethod::Sampled })
}

/// Draws potentials for the genericity probe.
pub trait PotentialSampler: Sync {
    fn sample(&self, rng: &mut ChaCha8Rng, n: usize) -> Potential;
    fn describe(&self) -> String;
}

/// Independent uniform rationals a/b with a/b in [lo, hi] and b ≤
/// max_denominator; keeps the exact pipeline exact.
#[derive(Debug, Clone)]
pub struct UniformRationalSampler {
    pub lo: i64,
    pub hi: i64,
    pub max_denominator: u64,
}

impl Default for UniformRationalSampler {
    fn default() -> Self {
        UniformRationalSampler { lo: -10, hi: 10, max_denominator: 1000 }
    }
}

impl UniformRationalSampler {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Gaussian {
        let den = rng.gen_range(1..=self.max_denominator) as i64;
        let num = rng.gen_range(self.lo * den..=self.hi * den);
        Gaussian::from_ratio(num, den)
    }
}

impl PotentialSampler for UniformRationalSampler {
    fn sample(&self, rng: &mut ChaCha8Rng, n: usize) -> Potential {
        Potential::new((0..n).map(|_| self.draw(rng)).collect())
    }

    fn describe(&self) -> String {
        format!(
            "uniform rationals on [{}, {}], denominator <= {}",
            self.lo, self.hi, self.max_denominator
        )
    }
}

/// Wraps a sampler and forces V[copy_to] = V[copy_from]; used to sample a
/// constrained locus (e.g. V2 = V3 on the Lieb lattice).
#[derive(Debug, Clone)]
pub struct TiedSampler<S> {
    pub inner: S,
    pub copy_from: usize,
    pub copy_to: usize,
}

impl<S: PotentialSampler> PotentialSampler for TiedSampler<S> {
    fn sample(&self, rng: &mut ChaCha8Rng, n: usize) -> Potential {
        let p = self.inner.sample(rng, n);
        let mut values = p.values().to_vec();
        values[self.copy_to] = values[self.copy_from].clone();
        Potential::new(values)
    }

    fn describe(&self) -> String {
        format!(
            "{} with V_{} = V_{}",
            self.inner.describe(),
            self.copy_to + 1,
            self.copy_from + 1
        )
    }
}

/// One probe trial that found flat bands.
#[derive(Debug, Clone)]
pub struct ProbeWitness {
    pub trial: usize,
    pub potential: Potential,
    pub energies: Vec<FlatBandEnergy>,
}

#[derive(Debug, Clone)]
pub struct ProbeSummary {
    pub trials: usize,
    pub hits: usize,
    pub witnesses: Vec<ProbeWitness>,
    pub seed: u64,
    pub sampler: String,
}

/// Runs the exact detector over `trials` sampled potentials. Trials draw
/// from per-trial RNG streams derived from `seed`, so the summary is
/// identical in both execution modes.
pub fn genericity_probe(
    g: &ValidatedGraph,
    sampler: &dyn PotentialSampler,
    trials: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<ProbeSummary, FlatBandError> {
    let results: Vec<Result<Option<ProbeWitness>, FlatBandError>> =
        exec::map_collect(mode, (0..trials).collect(), |trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64 + 1);
            let potential = sampler.sample(&mut rng, g.n());
            let fiber = build_fiber(g, &potential, &Gaussian::one())?;
            let report = flat_band_energies(&fiber)?;
            Ok(report
                .has_flat_band()
                .then(|| ProbeWitness { trial, potential, energies: report.energies }))
        });
    let mut witnesses = Vec::new();
    for r in results {
        if let Some(w) = r? {
            witnesses.push(w);
        }
    }
    witnesses.sort_by_key(|w| w.trial);
    Ok(ProbeSummary {
        trials,
        hits: witnesses.len(),
        witnesses,
        seed,
        sampler: sampler.describe(),
    })
}
