//! Replicated experiments over independent disorders: overlap moments, the
//! likelihood-ratio detection test, total-variation estimates, and
//! free-energy fluctuation scaling. Replicas draw their seeds from the
//! stream machinery, so parallel execution is reproducible, and aggregates
//! are pairwise sums in a fixed tree order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::Prior;
use crate::rng::{derive_seed, StreamPurpose};
use crate::spin_glass::enumerate::{
    accumulate_rank_one, free_energy_from_entries, gibbs_weighted_pass, lr_statistic,
    DEFAULT_ENUM_LIMIT,
};
use crate::spin_glass::hamiltonian::hamiltonian_from_parts;
use crate::spin_glass::metropolis::metropolis_chain_indexed;
use crate::spin_glass::{
    check_beta_bar, contraction_scale, free_energies_multi, make_spiked_tensor, overlap,
    sample_disorder,
};

/// Sum in a fixed balanced-tree order, independent of chunking or thread
/// count.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        len => {
            let mid = len / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}

/// A Monte Carlo estimate with its standard error across replicas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

pub(crate) fn mean_stderr(values: &[f64]) -> Estimate {
    let len = values.len();
    if len == 0 {
        return Estimate {
            value: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = pairwise_sum(values) / len as f64;
    if len == 1 {
        return Estimate {
            value: mean,
            stderr: 0.0,
        };
    }
    let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&squares) / (len - 1) as f64;
    Estimate {
        value: mean,
        stderr: (var / len as f64).sqrt(),
    }
}

pub(crate) fn sample_variance(values: &[f64]) -> f64 {
    let len = values.len();
    if len < 2 {
        return 0.0;
    }
    let mean = pairwise_sum(values) / len as f64;
    let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    pairwise_sum(&squares) / (len - 1) as f64
}

/// Sweep and burn-in lengths for chain-based estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainOptions {
    pub sweeps: u64,
    pub burn_in: u64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            sweeps: 2000,
            burn_in: 200,
        }
    }
}

/// E <R(sigma^1(r), sigma^2(r))^{2m}> per row r, with the inner two-replica
/// Gibbs average exact: <R^{2m}> = N^{-2m} sum_tuples <sigma_{i_1}...
/// sigma_{i_{2m}}>^2, accumulated in one enumeration pass per disorder and
/// averaged over `replicas` independent disorders.
pub fn overlap_moment_exact(
    n: usize,
    p: u32,
    priors: &[Prior],
    beta_bar: &[f64],
    m: u32,
    replicas: u64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if m < 1 {
        return Err(Error::OutOfRange {
            what: "m",
            value: m as f64,
            expected: "m >= 1",
        });
    }
    let k = priors.len();
    check_beta_bar(beta_bar, k)?;
    let acc_len = (n as u128)
        .checked_pow(2 * m)
        .filter(|&c| c <= DEFAULT_ENUM_LIMIT as u128)
        .ok_or(Error::EnumerationLimit {
            configs: (n as u128).saturating_pow(2 * m),
            limit: DEFAULT_ENUM_LIMIT,
        })? as usize;
    let scale = contraction_scale(n, p);

    let per_replica: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let d = sample_disorder(n, p, derive_seed(seed, StreamPurpose::Replica, rep))?;
            let mut acc: Vec<Vec<f64>> = (0..k).map(|_| vec![0.0; acc_len]).collect();
            gibbs_weighted_pass(
                d.entries(),
                n,
                p,
                priors,
                None,
                DEFAULT_ENUM_LIMIT,
                |view| hamiltonian_from_parts(view.contractions, view.dots, beta_bar, n, p, scale),
                |view, w| {
                    for r in 0..k {
                        accumulate_rank_one(&mut acc[r], view.spins.row(r), 2 * m, w);
                    }
                },
            )?;
            let norm = (n as f64).powi(-(2 * m as i32));
            Ok((0..k)
                .map(|r| norm * acc[r].iter().map(|&x| x * x).sum::<f64>())
                .collect::<Vec<f64>>())
        })
        .collect::<Result<_>>()?;

    Ok((0..k)
        .map(|r| {
            let values: Vec<f64> = per_replica.iter().map(|v| v[r]).collect();
            mean_stderr(&values)
        })
        .collect())
}

/// The same moment estimated from pairs of independent Metropolis chains.
pub fn overlap_moment_mc(
    n: usize,
    p: u32,
    priors: &[Prior],
    beta_bar: &[f64],
    m: u32,
    replicas: u64,
    chain: ChainOptions,
    seed: u64,
) -> Result<Vec<Estimate>> {
    if m < 1 {
        return Err(Error::OutOfRange {
            what: "m",
            value: m as f64,
            expected: "m >= 1",
        });
    }
    let k = priors.len();
    check_beta_bar(beta_bar, k)?;

    let per_replica: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = derive_seed(seed, StreamPurpose::Replica, rep);
            let d = sample_disorder(n, p, rep_seed)?;
            let chain_a =
                metropolis_chain_indexed(&d, priors, beta_bar, chain.sweeps, chain.burn_in, rep_seed, 0)?;
            let chain_b =
                metropolis_chain_indexed(&d, priors, beta_bar, chain.sweeps, chain.burn_in, rep_seed, 1)?;
            let mut sums = vec![0.0; k];
            let mut count = 0u64;
            for (sa, sb) in chain_a.zip(chain_b) {
                for r in 0..k {
                    let o = overlap(sa.row(r), sb.row(r))?;
                    sums[r] += o.powi(2 * m as i32);
                }
                count += 1;
            }
            Ok(sums.iter().map(|s| s / count as f64).collect::<Vec<f64>>())
        })
        .collect::<Result<_>>()?;

    Ok((0..k)
        .map(|r| {
            let values: Vec<f64> = per_replica.iter().map(|v| v[r]).collect();
            mean_stderr(&values)
        })
        .collect())
}

/// Error rates of the likelihood-ratio test deciding "spiked" iff the exact
/// log-likelihood ratio is nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub type1: f64,
    pub type2: f64,
    pub total_error: f64,
    pub trials: u64,
}

/// Per trial, draws a null tensor (pure noise) and an alternative tensor
/// (noise plus spikes) and applies the likelihood-ratio test to both.
pub fn detection_experiment(
    n: usize,
    p: u32,
    priors: &[Prior],
    beta_bar: &[f64],
    trials: u64,
    seed: u64,
) -> Result<DetectionReport> {
    check_beta_bar(beta_bar, priors.len())?;
    let outcomes: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let null = sample_disorder(n, p, derive_seed(seed, StreamPurpose::NullTrial, trial))?;
            let lr_null = lr_statistic(null.entries(), n, p, priors, beta_bar)?;
            let alt = make_spiked_tensor(
                n,
                p,
                priors,
                beta_bar,
                derive_seed(seed, StreamPurpose::AltTrial, trial),
            )?;
            let lr_alt = lr_statistic(alt.entries(), n, p, priors, beta_bar)?;
            // false alarm when the null tensor looks spiked; miss when the
            // spiked tensor does not
            Ok((lr_null >= 0.0, lr_alt < 0.0))
        })
        .collect::<Result<_>>()?;
    let false_alarms = outcomes.iter().filter(|&&(fa, _)| fa).count() as f64;
    let misses = outcomes.iter().filter(|&&(_, miss)| miss).count() as f64;
    let type1 = false_alarms / trials as f64;
    let type2 = misses / trials as f64;
    Ok(DetectionReport {
        type1,
        type2,
        total_error: type1 + type2,
        trials,
    })
}

/// d_TV(W, T_k) = E[(1 - e^{N F_N})_+], averaged over `replicas` independent
/// disorders. Each term lies in [0, 1), so the estimate lies in [0, 1).
pub fn estimate_tv(
    n: usize,
    p: u32,
    priors: &[Prior],
    beta_bar: &[f64],
    replicas: u64,
    seed: u64,
) -> Result<Estimate> {
    Ok(estimate_tv_multi(n, p, priors, &[beta_bar.to_vec()], replicas, seed)?.remove(0))
}

/// Total-variation estimates for several SNR vectors sharing the disorder
/// replicas and the enumeration pass.
pub fn estimate_tv_multi(
    n: usize,
    p: u32,
    priors: &[Prior],
    beta_bars: &[Vec<f64>],
    replicas: u64,
    seed: u64,
) -> Result<Vec<Estimate>> {
    for beta_bar in beta_bars {
        check_beta_bar(beta_bar, priors.len())?;
    }
    let per_replica: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let d = sample_disorder(n, p, derive_seed(seed, StreamPurpose::Replica, rep))?;
            let fs = free_energies_multi(d.entries(), n, p, priors, beta_bars)?;
            Ok(fs
                .iter()
                .map(|f| (1.0 - (n as f64 * f).exp()).max(0.0))
                .collect::<Vec<f64>>())
        })
        .collect::<Result<_>>()?;
    Ok((0..beta_bars.len())
        .map(|i| {
            let values: Vec<f64> = per_replica.iter().map(|v| v[i]).collect();
            mean_stderr(&values)
        })
        .collect())
}

/// Sample variance of F_N across disorders, per system size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationRow {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub replicas: u64,
}

/// Variance of the free energy over independent disorders for each N in
/// `n_list`. Callers are expected to stay below the critical threshold,
/// where the variance decays like N^{-(p/2+1)}.
pub fn fluctuation_scan(
    n_list: &[usize],
    p: u32,
    prior: &Prior,
    beta: f64,
    replicas: u64,
    seed: u64,
) -> Result<Vec<FluctuationRow>> {
    let priors = std::slice::from_ref(prior);
    n_list
        .iter()
        .map(|&n| {
            let n_seed = derive_seed(seed, StreamPurpose::Replica, n as u64);
            let values: Vec<f64> = (0..replicas)
                .into_par_iter()
                .map(|rep| {
                    let d =
                        sample_disorder(n, p, derive_seed(n_seed, StreamPurpose::Replica, rep))?;
                    Ok(
                        free_energy_from_entries(
                            d.entries(),
                            n,
                            p,
                            priors,
                            &[beta],
                            DEFAULT_ENUM_LIMIT,
                        )?
                        .0,
                    )
                })
                .collect::<Result<_>>()?;
            Ok(FluctuationRow {
                n,
                mean: pairwise_sum(&values) / values.len() as f64,
                variance: sample_variance(&values),
                replicas,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_sequential() {
        let values: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let seq: f64 = values.iter().sum();
        assert!((pairwise_sum(&values) - seq).abs() < 1e-9);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn zero_snr_overlap_second_moment_is_exact() {
        // at beta = 0 the Gibbs measure is the product prior and
        // E<R^2> = v_*^2 / N exactly
        for prior in [Prior::rademacher(), Prior::sparse_rademacher(0.4).unwrap()] {
            let n = 5;
            let v_star = prior.moments().second_moment;
            let est = overlap_moment_exact(n, 3, &[prior], &[0.0], 1, 3, 77).unwrap();
            let expected = v_star * v_star / n as f64;
            assert!(
                (est[0].value - expected).abs() < 1e-12,
                "{} vs {expected}",
                est[0].value
            );
            assert!(est[0].stderr < 1e-12);
        }
    }

    #[test]
    fn exact_and_mc_overlap_moments_agree() {
        let n = 6;
        let priors = [Prior::rademacher()];
        let beta = [0.5];
        let exact = overlap_moment_exact(n, 3, &priors, &beta, 1, 40, 5).unwrap();
        let mc = overlap_moment_mc(
            n,
            3,
            &priors,
            &beta,
            1,
            40,
            ChainOptions {
                sweeps: 1500,
                burn_in: 100,
            },
            5,
        )
        .unwrap();
        let gap = (exact[0].value - mc[0].value).abs();
        let sigma = (exact[0].stderr.powi(2) + mc[0].stderr.powi(2)).sqrt();
        assert!(gap < 3.0 * sigma.max(1e-4), "gap {gap}, sigma {sigma}");
    }

    #[test]
    fn detection_is_powerless_at_zero_snr() {
        let report =
            detection_experiment(6, 3, &[Prior::rademacher()], &[0.0], 50, 123).unwrap();
        // the log-likelihood ratio is identically zero, so everything is
        // declared spiked
        assert_eq!(report.type1, 1.0);
        assert_eq!(report.type2, 0.0);
        assert_eq!(report.total_error, 1.0);
    }

    #[test]
    fn tv_is_zero_at_zero_snr_and_within_range() {
        let est = estimate_tv(6, 3, &[Prior::rademacher()], &[0.0], 20, 9).unwrap();
        assert_eq!(est.value, 0.0);
        let est = estimate_tv(6, 3, &[Prior::rademacher()], &[2.0], 50, 9).unwrap();
        assert!(est.value > 0.0 && est.value < 1.0);
    }

    #[test]
    fn tv_multi_matches_single() {
        let priors = [Prior::rademacher()];
        let multi =
            estimate_tv_multi(5, 3, &priors, &[vec![0.4], vec![1.8]], 30, 4).unwrap();
        let single = estimate_tv(5, 3, &priors, &[1.8], 30, 4).unwrap();
        assert_eq!(multi[1], single);
        assert!(multi[0].value <= multi[1].value);
    }

    #[test]
    fn fluctuations_vanish_at_zero_snr() {
        let rows = fluctuation_scan(&[4, 6], 3, &Prior::rademacher(), 0.0, 10, 2).unwrap();
        for row in rows {
            assert_eq!(row.variance, 0.0);
            assert!(row.mean.abs() < 1e-12);
        }
    }

    #[test]
    fn estimates_are_reproducible() {
        let priors = [Prior::rademacher()];
        let a = estimate_tv(5, 3, &priors, &[1.0], 25, 42).unwrap();
        let b = estimate_tv(5, 3, &priors, &[1.0], 25, 42).unwrap();
        assert_eq!(a, b);
    }
}
