//! Exact Gibbs sums by enumeration.
//!
//! Configurations are visited by a mixed-radix counter over the (site, row)
//! slots. A counter step changes a bounded number of single slots (amortized
//! under two per configuration), and each single-slot change updates the
//! tensor contraction through its multilinear expansion, so a full pass costs
//! O(configs * p * N^{p-1}) instead of O(configs * N^p). Free energies are
//! accumulated with a running-maximum log-sum-exp.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::Prior;
use crate::spin_glass::hamiltonian::{contract_delta, contract_full, hamiltonian_from_parts};
use crate::spin_glass::{check_beta_bar, contraction_scale, Disorder, SpinAssignment};

/// Default cap on the number of enumerated configurations.
pub const DEFAULT_ENUM_LIMIT: u64 = 1 << 24;

/// Streaming log-sum-exp with a running maximum.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogSumExp {
    max: f64,
    sum: f64,
}

impl LogSumExp {
    pub(crate) fn new() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub(crate) fn add(&mut self, value: f64) {
        if value <= self.max {
            self.sum += (value - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - value).exp() + 1.0;
            self.max = value;
        }
    }

    pub(crate) fn value(&self) -> f64 {
        self.max + self.sum.ln()
    }
}

/// Snapshot of the enumerator state handed to visitors. `contractions[r]`
/// is the raw <Y, sigma(r)^{tensor p}>, `dots` the k x k matrix of raw spin
/// dot products, `ext_dots` the k x k matrix of dot products against the
/// external rows (all zero when no external rows were supplied).
pub(crate) struct ConfigView<'a> {
    pub spins: &'a SpinAssignment,
    pub contractions: &'a [f64],
    pub dots: &'a [f64],
    pub ext_dots: &'a [f64],
    pub log_prior: f64,
}

pub(crate) struct GibbsEnumerator<'a> {
    entries: &'a [f64],
    n: usize,
    p: u32,
    k: usize,
    /// per row: (point, log weight) in atom order
    supports: Vec<Vec<(f64, f64)>>,
    external: Option<&'a SpinAssignment>,
    configs: u128,
}

impl<'a> GibbsEnumerator<'a> {
    pub(crate) fn new(
        entries: &'a [f64],
        n: usize,
        p: u32,
        priors: &'a [Prior],
        external: Option<&'a SpinAssignment>,
        limit: u64,
    ) -> Result<Self> {
        let k = priors.len();
        if k == 0 {
            return Err(Error::ShapeMismatch("no priors given".into()));
        }
        if entries.len() != n.pow(p) {
            return Err(Error::ShapeMismatch(format!(
                "{} tensor entries but n^p = {}",
                entries.len(),
                n.pow(p)
            )));
        }
        if let Some(ext) = external {
            if ext.k() != k || ext.n() != n {
                return Err(Error::ShapeMismatch(
                    "external rows must be k x N".into(),
                ));
            }
        }
        let mut configs: u128 = 1;
        for prior in priors {
            for _ in 0..n {
                configs = configs
                    .checked_mul(prior.num_atoms() as u128)
                    .ok_or(Error::EnumerationLimit {
                        configs: u128::MAX,
                        limit,
                    })?;
            }
        }
        if configs > limit as u128 {
            return Err(Error::EnumerationLimit { configs, limit });
        }
        let supports = priors
            .iter()
            .map(|prior| {
                prior
                    .atoms()
                    .iter()
                    .map(|&(a, w)| (a, w.ln()))
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(GibbsEnumerator {
            entries,
            n,
            p,
            k,
            supports,
            external,
            configs,
        })
    }

    pub(crate) fn config_count(&self) -> u128 {
        self.configs
    }

    /// One full pass over all configurations in counter order.
    pub(crate) fn run(&self, mut visit: impl FnMut(&ConfigView)) {
        let (n, p, k) = (self.n, self.p, self.k);
        let slots = n * k;
        let mut digits = vec![0usize; slots];

        // spins stored row-major (k x N); slot s = site * k + row
        let mut spins = {
            let mut v = vec![0.0; k * n];
            for site in 0..n {
                for row in 0..k {
                    v[row * n + site] = self.supports[row][0].0;
                }
            }
            SpinAssignment::new(k, n, v).unwrap()
        };

        let mut scratch = Vec::new();
        let mut contractions: Vec<f64> = (0..k)
            .map(|r| contract_full(self.entries, n, p, spins.row(r), &mut scratch))
            .collect();
        let mut dots = vec![0.0; k * k];
        for r in 0..k {
            for r2 in 0..k {
                dots[r * k + r2] = spins.row(r).iter().zip(spins.row(r2)).map(|(&a, &b)| a * b).sum();
            }
        }
        let mut ext_dots = vec![0.0; k * k];
        if let Some(ext) = self.external {
            for r in 0..k {
                for r2 in 0..k {
                    ext_dots[r * k + r2] =
                        spins.row(r).iter().zip(ext.row(r2)).map(|(&a, &b)| a * b).sum();
                }
            }
        }
        let mut log_prior: f64 = (0..k)
            .map(|r| self.supports[r][0].1 * n as f64)
            .sum();

        let mut remaining = self.configs;
        loop {
            visit(&ConfigView {
                spins: &spins,
                contractions: &contractions,
                dots: &dots,
                ext_dots: &ext_dots,
                log_prior,
            });
            remaining -= 1;
            if remaining == 0 {
                break;
            }
            // mixed-radix increment; each digit change is one single-site move
            let mut slot = 0usize;
            loop {
                let row = slot % k;
                let site = slot / k;
                let radix = self.supports[row].len();
                let old_idx = digits[slot];
                let new_idx = if old_idx + 1 == radix { 0 } else { old_idx + 1 };
                digits[slot] = new_idx;

                let (old_val, old_logw) = self.supports[row][old_idx];
                let (new_val, new_logw) = self.supports[row][new_idx];
                let delta = new_val - old_val;
                if delta != 0.0 {
                    contractions[row] +=
                        contract_delta(self.entries, n, p, spins.row(row), site, delta);
                    for r2 in 0..k {
                        if r2 == row {
                            dots[row * k + row] += 2.0 * old_val * delta + delta * delta;
                        } else {
                            let d = delta * spins.get(r2, site);
                            dots[row * k + r2] += d;
                            dots[r2 * k + row] += d;
                        }
                    }
                    if let Some(ext) = self.external {
                        for r2 in 0..k {
                            ext_dots[row * k + r2] += delta * ext.get(r2, site);
                        }
                    }
                    spins.set(row, site, new_val);
                }
                log_prior += new_logw - old_logw;

                if new_idx != 0 {
                    break;
                }
                slot += 1;
            }
        }
    }
}

/// How a free-energy sample was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreeEnergyMethod {
    #[serde(rename = "exact_enumeration")]
    ExactEnumeration,
    #[serde(rename = "metropolis_mc")]
    MetropolisMc,
}

/// One draw of F_N together with the provenance needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergySample {
    pub value: f64,
    pub n: usize,
    pub p: u32,
    pub beta_bar: Vec<f64>,
    pub method: FreeEnergyMethod,
    pub seed: u64,
    pub config_count: Option<u128>,
    pub sweep_count: Option<u64>,
}

pub(crate) fn free_energy_from_entries(
    entries: &[f64],
    n: usize,
    p: u32,
    priors: &[Prior],
    beta_bar: &[f64],
    limit: u64,
) -> Result<(f64, u128)> {
    check_beta_bar(beta_bar, priors.len())?;
    let enumerator = GibbsEnumerator::new(entries, n, p, priors, None, limit)?;
    let scale = contraction_scale(n, p);
    let mut lse = LogSumExp::new();
    enumerator.run(|view| {
        let h = hamiltonian_from_parts(view.contractions, view.dots, beta_bar, n, p, scale);
        lse.add(h + view.log_prior);
    });
    Ok((lse.value() / n as f64, enumerator.config_count()))
}

/// F_N(beta_bar) = (1/N) log integral of e^H over the product prior, exactly,
/// by enumerating all Pi_r |support_r|^N configurations.
pub fn free_energy_exact(
    d: &Disorder,
    priors: &[Prior],
    beta_bar: &[f64],
) -> Result<FreeEnergySample> {
    let (value, configs) = free_energy_from_entries(
        d.entries(),
        d.n(),
        d.p(),
        priors,
        beta_bar,
        DEFAULT_ENUM_LIMIT,
    )?;
    Ok(FreeEnergySample {
        value,
        n: d.n(),
        p: d.p(),
        beta_bar: beta_bar.to_vec(),
        method: FreeEnergyMethod::ExactEnumeration,
        seed: d.seed(),
        config_count: Some(configs),
        sweep_count: None,
    })
}

/// Free energies for several SNR vectors over the same disorder in a single
/// enumeration pass; the contraction work is shared across the list.
pub fn free_energies_multi(
    entries: &[f64],
    n: usize,
    p: u32,
    priors: &[Prior],
    beta_bars: &[Vec<f64>],
) -> Result<Vec<f64>> {
    for beta_bar in beta_bars {
        check_beta_bar(beta_bar, priors.len())?;
    }
    let enumerator = GibbsEnumerator::new(entries, n, p, priors, None, DEFAULT_ENUM_LIMIT)?;
    let scale = contraction_scale(n, p);
    let mut sums: Vec<LogSumExp> = beta_bars.iter().map(|_| LogSumExp::new()).collect();
    enumerator.run(|view| {
        for (beta_bar, lse) in beta_bars.iter().zip(&mut sums) {
            let h = hamiltonian_from_parts(view.contractions, view.dots, beta_bar, n, p, scale);
            lse.add(h + view.log_prior);
        }
    });
    Ok(sums.iter().map(|lse| lse.value() / n as f64).collect())
}

/// The exact log-likelihood ratio log f_{T_k}(w) / f_W(w) = N F_N evaluated
/// with the tensor entries `w` in place of the disorder.
pub fn lr_statistic(
    w: &[f64],
    n: usize,
    p: u32,
    priors: &[Prior],
    beta_bar: &[f64],
) -> Result<f64> {
    let (f, _) = free_energy_from_entries(w, n, p, priors, beta_bar, DEFAULT_ENUM_LIMIT)?;
    Ok(n as f64 * f)
}

/// Two-pass Gibbs expectation: the first pass fixes the log partition, the
/// second hands each configuration and its normalized Gibbs probability to
/// `accum`. `log_weight` maps a configuration to H(config); the prior weight
/// is added internally. Returns (1/N) log Z.
pub(crate) fn gibbs_weighted_pass(
    entries: &[f64],
    n: usize,
    p: u32,
    priors: &[Prior],
    external: Option<&SpinAssignment>,
    limit: u64,
    log_weight: impl Fn(&ConfigView) -> f64,
    mut accum: impl FnMut(&ConfigView, f64),
) -> Result<f64> {
    let enumerator = GibbsEnumerator::new(entries, n, p, priors, external, limit)?;
    let mut lse = LogSumExp::new();
    enumerator.run(|view| lse.add(log_weight(view) + view.log_prior));
    let log_z = lse.value();
    enumerator.run(|view| {
        let w = (log_weight(view) + view.log_prior - log_z).exp();
        accum(view, w);
    });
    Ok(log_z / n as f64)
}

/// Adds weight * prod_{j} row[i_j] over all n^order index tuples into `acc`.
pub(crate) fn accumulate_rank_one(acc: &mut [f64], row: &[f64], order: u32, weight: f64) {
    fn recurse(acc: &mut [f64], row: &[f64], depth: u32, offset: usize, partial: f64) {
        let n = row.len();
        if depth == 1 {
            let base = offset * n;
            for (i, &ri) in row.iter().enumerate() {
                acc[base + i] += partial * ri;
            }
            return;
        }
        for (i, &ri) in row.iter().enumerate() {
            recurse(acc, row, depth - 1, offset * n + i, partial * ri);
        }
    }
    recurse(acc, row, order, 0, weight);
}
