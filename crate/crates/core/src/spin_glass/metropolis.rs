//! Single-site Metropolis sampling of the Gibbs measure G_{N, beta_bar}.
//!
//! A proposal picks a site and a row uniformly, draws a fresh atom from that
//! row's prior, and accepts with min(1, exp(Delta H)); the prior factors of
//! the target cancel against the proposal density, so Delta H is the bare
//! Hamiltonian change. The contraction change is computed through the
//! multilinear expansion at the flipped site, O(p N^{p-1}) per proposal.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::prior::Prior;
use crate::rng::{stream_rng, StreamPurpose};
use crate::spin_glass::hamiltonian::{contract_delta, contract_full};
use crate::spin_glass::{check_beta_bar, contraction_scale, Disorder, SpinAssignment};

pub struct MetropolisChain<'a> {
    disorder: &'a Disorder,
    priors: &'a [Prior],
    beta_bar: Vec<f64>,
    scale: f64,
    state: SpinAssignment,
    contractions: Vec<f64>,
    dots: Vec<f64>,
    rng: ChaCha8Rng,
    sweeps: u64,
    burn_in: u64,
    sweeps_done: u64,
    proposals: u64,
    accepted: u64,
}

/// A chain over the Gibbs measure of (disorder, priors, beta_bar), seeded by
/// the stream (seed, Chain, 0). Iterating yields the post-burn-in sweep
/// snapshots: `sweeps - burn_in` states, one per sweep of k*N proposals.
pub fn metropolis_chain<'a>(
    d: &'a Disorder,
    priors: &'a [Prior],
    beta_bar: &[f64],
    sweeps: u64,
    burn_in: u64,
    seed: u64,
) -> Result<MetropolisChain<'a>> {
    metropolis_chain_indexed(d, priors, beta_bar, sweeps, burn_in, seed, 0)
}

/// Same as `metropolis_chain` with an explicit chain index, so independent
/// replica chains can share one seed.
pub(crate) fn metropolis_chain_indexed<'a>(
    d: &'a Disorder,
    priors: &'a [Prior],
    beta_bar: &[f64],
    sweeps: u64,
    burn_in: u64,
    seed: u64,
    chain_index: u64,
) -> Result<MetropolisChain<'a>> {
    let k = priors.len();
    check_beta_bar(beta_bar, k)?;
    if sweeps <= burn_in {
        return Err(Error::OutOfRange {
            what: "sweeps",
            value: sweeps as f64,
            expected: "sweeps > burn_in",
        });
    }
    let n = d.n();
    let mut rng = stream_rng(seed, StreamPurpose::Chain, chain_index);
    let mut values = vec![0.0; k * n];
    for (r, prior) in priors.iter().enumerate() {
        for i in 0..n {
            values[r * n + i] = prior.sample(&mut rng);
        }
    }
    let state = SpinAssignment::new(k, n, values)?;
    let mut scratch = Vec::new();
    let contractions: Vec<f64> = (0..k)
        .map(|r| contract_full(d.entries(), n, d.p(), state.row(r), &mut scratch))
        .collect();
    let mut dots = vec![0.0; k * k];
    for r in 0..k {
        for r2 in 0..k {
            dots[r * k + r2] = state.row(r).iter().zip(state.row(r2)).map(|(&a, &b)| a * b).sum();
        }
    }
    Ok(MetropolisChain {
        disorder: d,
        priors,
        beta_bar: beta_bar.to_vec(),
        scale: contraction_scale(n, d.p()),
        state,
        contractions,
        dots,
        rng,
        sweeps,
        burn_in,
        sweeps_done: 0,
        proposals: 0,
        accepted: 0,
    })
}

impl<'a> MetropolisChain<'a> {
    pub fn state(&self) -> &SpinAssignment {
        &self.state
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            1.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }

    fn propose(&mut self) {
        let n = self.disorder.n();
        let p = self.disorder.p();
        let k = self.priors.len();
        let nf = n as f64;

        let site = self.rng.gen_range(0..n);
        let row = self.rng.gen_range(0..k);
        let proposal = self.priors[row].sample(&mut self.rng);
        let accept_draw: f64 = self.rng.gen();
        self.proposals += 1;

        let old = self.state.get(row, site);
        let delta = proposal - old;
        if delta == 0.0 {
            self.accepted += 1;
            return;
        }

        let d_contraction =
            contract_delta(self.disorder.entries(), n, p, self.state.row(row), site, delta);
        let mut dh = self.beta_bar[row] * self.scale * d_contraction;
        for r2 in 0..k {
            let bb = self.beta_bar[row] * self.beta_bar[r2];
            let d_old = self.dots[row * k + r2];
            if r2 == row {
                let d_new = d_old + 2.0 * old * delta + delta * delta;
                dh -= 0.5 * bb * nf * ((d_new / nf).powi(p as i32) - (d_old / nf).powi(p as i32));
            } else {
                // the (row, r2) and (r2, row) terms of the double sum move together
                let d_new = d_old + delta * self.state.get(r2, site);
                dh -= bb * nf * ((d_new / nf).powi(p as i32) - (d_old / nf).powi(p as i32));
            }
        }

        if accept_draw.ln() < dh {
            self.accepted += 1;
            self.contractions[row] += d_contraction;
            for r2 in 0..k {
                if r2 == row {
                    self.dots[row * k + row] += 2.0 * old * delta + delta * delta;
                } else {
                    let d = delta * self.state.get(r2, site);
                    self.dots[row * k + r2] += d;
                    self.dots[r2 * k + row] += d;
                }
            }
            self.state.set(row, site, proposal);
        }
    }

    /// Runs one sweep of k*N proposals.
    pub fn sweep(&mut self) {
        let proposals = self.disorder.n() * self.priors.len();
        for _ in 0..proposals {
            self.propose();
        }
        self.sweeps_done += 1;
    }
}

impl<'a> Iterator for MetropolisChain<'a> {
    type Item = SpinAssignment;

    fn next(&mut self) -> Option<SpinAssignment> {
        while self.sweeps_done < self.burn_in {
            self.sweep();
        }
        if self.sweeps_done >= self.sweeps {
            return None;
        }
        self.sweep();
        Some(self.state.clone())
    }
}
