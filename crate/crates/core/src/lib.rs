//! Detection thresholds for spiked symmetric Gaussian p-tensors, and a
//! desk-scale simulator for the pure p-spin glass models behind them.
//!
//! The crate computes the critical SNR beta_c for arbitrary bounded discrete
//! priors from the sign behavior of the auxiliary function Gamma_b(v), and
//! cross-validates the phase-transition picture at small N: exact and Monte
//! Carlo free energies, likelihood-ratio detection errors, total-variation
//! distance between the spiked and unspiked tensors, overlap and fluctuation
//! scaling, and the MMSE/Nishimori recovery diagnostics.

pub mod auxiliary;
pub mod calibration;
mod error;
pub mod mmse;
pub mod prior;
pub mod rng;
pub mod spin_glass;
pub mod threshold;
pub mod validate;

pub use auxiliary::{
    big_gamma, gamma, gauss_hermite, sup_big_gamma, GammaParams, QuadratureRule, SupGamma,
    TimeConvention,
};
pub use calibration::{convention_calibration, CalibrationOptions, CalibrationReport};
pub use error::{Error, Result};
pub use mmse::{
    auxiliary_free_energy, derivative_identity_check, dmse, mmse_exact, nishimori_residual,
    posterior_summary, DerivativeCheck, MmseEstimate, NishimoriPair, NishimoriReport,
    PosteriorSummary,
};
pub use prior::{MomentSummary, Prior};
pub use spin_glass::{
    detection_experiment, estimate_tv, estimate_tv_multi, fluctuation_scan, free_energies_multi,
    free_energy_exact, hamiltonian, hamiltonian_x, lr_statistic, make_spiked_tensor,
    metropolis_chain, overlap, overlap_moment_exact, overlap_moment_mc, sample_disorder,
    ChainOptions, DetectionReport, Disorder, Estimate, FluctuationRow, FreeEnergyMethod,
    FreeEnergySample, MetropolisChain, SpikedTensor, SpinAssignment,
};
pub use threshold::{
    critical_beta, h_upper_bound, in_undetectable_box, is_unimodal, multi_spike_region, sweep,
    SolveMethod, SolverOptions, SweepRow, SweepTable, ThresholdResult,
};
pub use validate::{run_suite, CheckOutcome, ValidateLevel};
