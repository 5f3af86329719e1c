//! Exact small-N recovery diagnostics: the auxiliary free energy of the
//! planted system, the minimum mean square error and its dummy baseline, and
//! the Nishimori/derivative identities that the posterior Gibbs measure must
//! satisfy.
//!
//! The spiked tensor at signal scale sqrt(t) is T_k(t) = Y + sqrt(t) S with
//! S the full-scale spike part; its auxiliary Hamiltonian expands over the
//! raw disorder, so the inner Gibbs average is always exact by enumeration
//! and only the outer (u, Y) expectation is Monte Carlo.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::Prior;
use crate::rng::{derive_seed, StreamPurpose};
use crate::spin_glass::{
    accumulate_rank_one, auxiliary_hamiltonian_from_parts, check_beta_bar, contraction_scale,
    gibbs_weighted_pass, make_spiked_tensor, mean_stderr, pairwise_sum, Estimate, GibbsEnumerator,
    LogSumExp, SpikedTensor, DEFAULT_ENUM_LIMIT,
};

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "t",
            value: t,
            expected: "0 <= t <= 1",
        })
    }
}

/// DMSE(beta_bar) = sum_r beta_r^2 v_{r,*}^p, the squared error of the best
/// estimator that ignores the data.
pub fn dmse(priors: &[Prior], beta_bar: &[f64], p: u32) -> Result<f64> {
    check_beta_bar(beta_bar, priors.len())?;
    Ok(priors
        .iter()
        .zip(beta_bar)
        .map(|(prior, &b)| b * b * prior.moments().second_moment.powi(p as i32))
        .sum())
}

/// F_N^A(t): the free energy of the auxiliary Hamiltonian of T_k(t), exact by
/// enumeration. Equals 0 at t = 0 and F_N(beta_bar) evaluated at the spiked
/// disorder at t = 1.
pub fn auxiliary_free_energy(t: f64, spiked: &SpikedTensor, priors: &[Prior]) -> Result<f64> {
    check_t(t)?;
    spiked.spike_vectors().validate_support(priors)?;
    let (n, p) = (spiked.n(), spiked.p());
    let beta_bar = spiked.beta_bar();
    let enumerator = GibbsEnumerator::new(
        spiked.disorder_entries(),
        n,
        p,
        priors,
        Some(spiked.spike_vectors()),
        DEFAULT_ENUM_LIMIT,
    )?;
    let scale = contraction_scale(n, p);
    let mut lse = LogSumExp::new();
    enumerator.run(|view| {
        let h = auxiliary_hamiltonian_from_parts(
            view.contractions,
            view.dots,
            view.ext_dots,
            beta_bar,
            t,
            n,
            p,
            scale,
        );
        lse.add(h + view.log_prior);
    });
    Ok(lse.value() / n as f64)
}

/// Posterior moment tensors under the auxiliary Gibbs measure:
/// `moment_tensors[r][offset]` is <sigma_{i_1}(r) ... sigma_{i_p}(r)> for the
/// row-major tuple offset. Every entry is bounded by M_r^p.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub t: f64,
    pub moment_tensors: Vec<Vec<f64>>,
    pub partition_log: f64,
}

/// One exact enumeration pass of the posterior at signal scale sqrt(t),
/// optionally also collecting the spike-overlap powers <R(sigma(r), u(r'))^p>.
fn posterior_pass(
    t: f64,
    spiked: &SpikedTensor,
    priors: &[Prior],
) -> Result<(PosteriorSummary, Vec<f64>)> {
    check_t(t)?;
    spiked.spike_vectors().validate_support(priors)?;
    let (n, p) = (spiked.n(), spiked.p());
    let k = spiked.k();
    let nf = n as f64;
    let beta_bar = spiked.beta_bar();
    let scale = contraction_scale(n, p);
    let tuple_count = n.pow(p);
    let mut moments: Vec<Vec<f64>> = (0..k).map(|_| vec![0.0; tuple_count]).collect();
    let mut spike_overlaps = vec![0.0; k * k];
    let log_z_over_n = gibbs_weighted_pass(
        spiked.disorder_entries(),
        n,
        p,
        priors,
        Some(spiked.spike_vectors()),
        DEFAULT_ENUM_LIMIT,
        |view| {
            auxiliary_hamiltonian_from_parts(
                view.contractions,
                view.dots,
                view.ext_dots,
                beta_bar,
                t,
                n,
                p,
                scale,
            )
        },
        |view, w| {
            for r in 0..k {
                accumulate_rank_one(&mut moments[r], view.spins.row(r), p, w);
            }
            for idx in 0..k * k {
                spike_overlaps[idx] += w * (view.ext_dots[idx] / nf).powi(p as i32);
            }
        },
    )?;
    Ok((
        PosteriorSummary {
            t,
            moment_tensors: moments,
            partition_log: log_z_over_n * nf,
        },
        spike_overlaps,
    ))
}

pub fn posterior_summary(t: f64, spiked: &SpikedTensor, priors: &[Prior]) -> Result<PosteriorSummary> {
    Ok(posterior_pass(t, spiked, priors)?.0)
}

/// <R(sigma^1(r), sigma^2(r'))^p> for independent posterior replicas, from
/// the moment tensors: N^{-p} sum_tuples m_r m_{r'}.
fn replica_overlap_power(moments: &[Vec<f64>], r: usize, r2: usize, n: usize, p: u32) -> f64 {
    let norm = (n as f64).powi(-(p as i32));
    norm * moments[r]
        .iter()
        .zip(&moments[r2])
        .map(|(&a, &b)| a * b)
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmseEstimate {
    pub mmse: f64,
    pub stderr: f64,
    pub dmse: f64,
}

/// Monte Carlo over fresh (u, Y) replicates of the exact posterior MMSE at
/// signal scale sqrt(t): per replicate, the estimator is theta_hat =
/// sum_r beta_r <sigma(r)^{tensor p}> and the loss is its mean squared
/// residual against the planted sum_r beta_r u(r)^{tensor p}.
pub fn mmse_exact(
    n: usize,
    p: u32,
    priors: &[Prior],
    beta_bar: &[f64],
    t: f64,
    replicas: u64,
    seed: u64,
) -> Result<MmseEstimate> {
    check_t(t)?;
    check_beta_bar(beta_bar, priors.len())?;
    let k = priors.len();
    let tuple_count = n.pow(p);
    let values: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let spiked = make_spiked_tensor(
                n,
                p,
                priors,
                beta_bar,
                derive_seed(seed, StreamPurpose::Replica, rep),
            )?;
            let summary = posterior_summary(t, &spiked, priors)?;
            let mut target = vec![0.0; tuple_count];
            for r in 0..k {
                accumulate_rank_one(&mut target, spiked.spike_vectors().row(r), p, beta_bar[r]);
            }
            let mut residual = 0.0;
            for idx in 0..tuple_count {
                let theta: f64 = (0..k)
                    .map(|r| beta_bar[r] * summary.moment_tensors[r][idx])
                    .sum();
                let d = target[idx] - theta;
                residual += d * d;
            }
            Ok(residual / tuple_count as f64)
        })
        .collect::<Result<_>>()?;
    let est = mean_stderr(&values);
    Ok(MmseEstimate {
        mmse: est.value,
        stderr: est.stderr,
        dmse: dmse(priors, beta_bar, p)?,
    })
}

fn paired_z(diffs: &[f64]) -> f64 {
    let est = mean_stderr(diffs);
    if est.stderr == 0.0 {
        if est.value == 0.0 {
            0.0
        } else {
            f64::INFINITY * est.value.signum()
        }
    } else {
        est.value / est.stderr
    }
}

/// Both sides of the Nishimori identity for one component pair: the
/// planted-vs-sample overlap power E<R(sigma(r), u(r'))^p> and the
/// sample-vs-sample power E<R(sigma^1(r), sigma^2(r'))^p>.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NishimoriPair {
    pub r: usize,
    pub r_prime: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NishimoriReport {
    pub pairs: Vec<NishimoriPair>,
    /// beta_r beta_{r'}-weighted totals of both sides and the z-score of
    /// their paired difference.
    pub lhs: f64,
    pub rhs: f64,
    pub z: f64,
    pub replicas: u64,
}

/// Checks E<R(sigma(r), u(r'))^p> = E<R(sigma^1(r), sigma^2(r'))^p> with the
/// inner Gibbs averages exact and the outer (u, Y) average Monte Carlo. The
/// two sides are evaluated on the same replicates, so the z-score is for the
/// paired difference.
pub fn nishimori_residual(
    n: usize,
    p: u32,
    priors: &[Prior],
    beta_bar: &[f64],
    t: f64,
    replicas: u64,
    seed: u64,
) -> Result<NishimoriReport> {
    check_t(t)?;
    check_beta_bar(beta_bar, priors.len())?;
    let k = priors.len();
    let samples: Vec<(Vec<f64>, Vec<f64>)> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let spiked = make_spiked_tensor(
                n,
                p,
                priors,
                beta_bar,
                derive_seed(seed, StreamPurpose::Replica, rep),
            )?;
            let (summary, spike_overlaps) = posterior_pass(t, &spiked, priors)?;
            let mut two_replica = vec![0.0; k * k];
            for r in 0..k {
                for r2 in 0..k {
                    two_replica[r * k + r2] =
                        replica_overlap_power(&summary.moment_tensors, r, r2, n, p);
                }
            }
            Ok((spike_overlaps, two_replica))
        })
        .collect::<Result<_>>()?;

    let mut pairs = Vec::with_capacity(k * k);
    for r in 0..k {
        for r2 in 0..k {
            let idx = r * k + r2;
            let lhs_values: Vec<f64> = samples.iter().map(|(l, _)| l[idx]).collect();
            let rhs_values: Vec<f64> = samples.iter().map(|(_, rr)| rr[idx]).collect();
            let diffs: Vec<f64> = lhs_values
                .iter()
                .zip(&rhs_values)
                .map(|(&a, &b)| a - b)
                .collect();
            pairs.push(NishimoriPair {
                r,
                r_prime: r2,
                lhs: pairwise_sum(&lhs_values) / replicas as f64,
                rhs: pairwise_sum(&rhs_values) / replicas as f64,
                z: paired_z(&diffs),
            });
        }
    }

    let weighted = |field: fn(&NishimoriPair) -> f64| -> f64 {
        pairs
            .iter()
            .map(|pair| beta_bar[pair.r] * beta_bar[pair.r_prime] * field(pair))
            .sum()
    };
    let diffs: Vec<f64> = samples
        .iter()
        .map(|(l, rr)| {
            let mut d = 0.0;
            for r in 0..k {
                for r2 in 0..k {
                    d += beta_bar[r] * beta_bar[r2] * (l[r * k + r2] - rr[r * k + r2]);
                }
            }
            d
        })
        .collect();
    Ok(NishimoriReport {
        lhs: weighted(|pair| pair.lhs),
        rhs: weighted(|pair| pair.rhs),
        z: paired_z(&diffs),
        pairs,
        replicas,
    })
}

/// Central finite difference of the disorder-averaged auxiliary free energy
/// against the two-replica overlap expression
/// (1/2) sum_{r,r'} beta_r beta_{r'} E<R(sigma^1(r), sigma^2(r'))^p>.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub finite_difference: Estimate,
    pub overlap_side: Estimate,
    pub z: f64,
    pub dt: f64,
    pub replicas: u64,
}

/// The finite difference carries an O(dt^2) discretization bias, so dt must
/// be small enough for that bias to sit well below the Monte Carlo error.
pub fn derivative_identity_check(
    n: usize,
    p: u32,
    priors: &[Prior],
    beta_bar: &[f64],
    t: f64,
    replicas: u64,
    dt: f64,
    seed: u64,
) -> Result<DerivativeCheck> {
    check_beta_bar(beta_bar, priors.len())?;
    if !(dt > 0.0 && t - dt > 0.0 && t + dt < 1.0) {
        return Err(Error::OutOfRange {
            what: "dt",
            value: dt,
            expected: "0 < t - dt and t + dt < 1",
        });
    }
    let k = priors.len();
    let samples: Vec<(f64, f64)> = (0..replicas)
        .into_par_iter()
        .map(|rep| {
            let spiked = make_spiked_tensor(
                n,
                p,
                priors,
                beta_bar,
                derive_seed(seed, StreamPurpose::Replica, rep),
            )?;
            let f_plus = auxiliary_free_energy(t + dt, &spiked, priors)?;
            let f_minus = auxiliary_free_energy(t - dt, &spiked, priors)?;
            let fd = (f_plus - f_minus) / (2.0 * dt);
            let summary = posterior_summary(t, &spiked, priors)?;
            let mut rhs = 0.0;
            for r in 0..k {
                for r2 in 0..k {
                    rhs += 0.5
                        * beta_bar[r]
                        * beta_bar[r2]
                        * replica_overlap_power(&summary.moment_tensors, r, r2, n, p);
                }
            }
            Ok((fd, rhs))
        })
        .collect::<Result<_>>()?;
    let fd_values: Vec<f64> = samples.iter().map(|&(fd, _)| fd).collect();
    let rhs_values: Vec<f64> = samples.iter().map(|&(_, rhs)| rhs).collect();
    let diffs: Vec<f64> = samples.iter().map(|&(fd, rhs)| fd - rhs).collect();
    Ok(DerivativeCheck {
        finite_difference: mean_stderr(&fd_values),
        overlap_side: mean_stderr(&rhs_values),
        z: paired_z(&diffs),
        dt,
        replicas,
    })
}
