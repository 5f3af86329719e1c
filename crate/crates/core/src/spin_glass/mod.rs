//! Desk-scale pure p-spin machinery: seeded Gaussian disorder, spiked
//! tensors, Hamiltonians, exact and Monte Carlo free energies, and the
//! detection experiments built on them (likelihood ratios, total-variation
//! estimates, overlap and fluctuation scaling).

mod disorder;
mod enumerate;
mod experiments;
mod hamiltonian;
pub mod io;
mod metropolis;

pub use disorder::{
    make_spiked_tensor, sample_disorder, Disorder, SpikedTensor, DEFAULT_TENSOR_ENTRY_LIMIT,
};
pub use enumerate::{
    free_energies_multi, free_energy_exact, lr_statistic, FreeEnergyMethod, FreeEnergySample,
    DEFAULT_ENUM_LIMIT,
};
pub use experiments::{
    detection_experiment, estimate_tv, estimate_tv_multi, fluctuation_scan, overlap_moment_exact,
    overlap_moment_mc, ChainOptions, DetectionReport, Estimate, FluctuationRow,
};
pub use hamiltonian::{hamiltonian, hamiltonian_x, overlap};
pub use metropolis::{metropolis_chain, MetropolisChain};

pub(crate) use enumerate::{
    accumulate_rank_one, gibbs_weighted_pass, GibbsEnumerator, LogSumExp,
};
pub(crate) use experiments::{mean_stderr, pairwise_sum};
pub(crate) use hamiltonian::auxiliary_hamiltonian_from_parts;

use crate::error::{Error, Result};
use crate::prior::Prior;

/// A k x N matrix of spin values; row r is the configuration sigma(r) drawn
/// from the support of prior r.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinAssignment {
    k: usize,
    n: usize,
    values: Vec<f64>,
}

impl SpinAssignment {
    pub fn new(k: usize, n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != k * n || k == 0 || n == 0 {
            return Err(Error::ShapeMismatch(format!(
                "spin assignment needs k*n = {} values, got {}",
                k * n,
                values.len()
            )));
        }
        Ok(SpinAssignment { k, n, values })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.n..(r + 1) * self.n]
    }

    pub fn get(&self, r: usize, i: usize) -> f64 {
        self.values[r * self.n + i]
    }

    pub(crate) fn set(&mut self, r: usize, i: usize, value: f64) {
        self.values[r * self.n + i] = value;
    }

    /// Every entry of row r must be a support point of prior r.
    pub fn validate_support(&self, priors: &[Prior]) -> Result<()> {
        if priors.len() != self.k {
            return Err(Error::ShapeMismatch(format!(
                "{} priors for {} rows",
                priors.len(),
                self.k
            )));
        }
        for (r, prior) in priors.iter().enumerate() {
            for &v in self.row(r) {
                if !prior.atoms().iter().any(|&(a, _)| a == v) {
                    return Err(Error::ShapeMismatch(format!(
                        "row {r} contains {v}, not a support point of `{}`",
                        prior.label()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// N^{-(p-1)/2}, the contraction normalization.
pub(crate) fn contraction_scale(n: usize, p: u32) -> f64 {
    (n as f64).powf(-0.5 * (p as f64 - 1.0))
}

pub(crate) fn check_beta_bar(beta_bar: &[f64], k: usize) -> Result<()> {
    if beta_bar.len() != k {
        return Err(Error::ShapeMismatch(format!(
            "beta_bar has {} entries for {} spike components",
            beta_bar.len(),
            k
        )));
    }
    for &b in beta_bar {
        if !b.is_finite() || b < 0.0 {
            return Err(Error::OutOfRange {
                what: "beta",
                value: b,
                expected: "finite and >= 0",
            });
        }
    }
    Ok(())
}
