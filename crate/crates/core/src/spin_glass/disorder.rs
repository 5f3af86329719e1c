//! Seeded disorder tensors and spiked tensors.
//!
//! We store the raw i.i.d. tensor Y, never its symmetrization W: every
//! quantity in scope reads the disorder only through <., sigma^{tensor p}>,
//! and <W, x^{tensor p}> = <Y, x^{tensor p}>. Detection experiments therefore
//! run on Y plus spike; the likelihood-ratio statistic is identical to the
//! one computed on W plus spike. `Disorder::symmetrize` materializes W for
//! callers who want the symmetric tensor itself.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::prior::Prior;
use crate::rng::{stream_rng, StreamPurpose};
use crate::spin_glass::{check_beta_bar, contraction_scale, SpinAssignment};

/// Default cap on n^p.
pub const DEFAULT_TENSOR_ENTRY_LIMIT: u64 = 1 << 27;

/// An i.i.d. standard Gaussian p-tensor of size n^p, reproducible bit for bit
/// from (n, p, seed). Entries are row-major with the first index slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Disorder {
    n: usize,
    p: u32,
    seed: u64,
    entries: Vec<f64>,
}

pub(crate) fn entry_count(n: usize, p: u32, limit: u64) -> Result<usize> {
    let count = (n as u128)
        .checked_pow(p)
        .filter(|&c| c <= limit as u128)
        .ok_or(Error::TensorTooLarge {
            entries: (n as u128).saturating_pow(p),
            limit,
        })?;
    Ok(count as usize)
}

/// Draws the disorder tensor for (n, p) from the stream (seed, Disorder, 0).
pub fn sample_disorder(n: usize, p: u32, seed: u64) -> Result<Disorder> {
    sample_disorder_with_limit(n, p, seed, DEFAULT_TENSOR_ENTRY_LIMIT)
}

pub fn sample_disorder_with_limit(n: usize, p: u32, seed: u64, limit: u64) -> Result<Disorder> {
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as f64,
            expected: "n >= 2",
        });
    }
    if p < 2 {
        return Err(Error::OutOfRange {
            what: "p",
            value: p as f64,
            expected: "p >= 2",
        });
    }
    let count = entry_count(n, p, limit)?;
    let mut rng = stream_rng(seed, StreamPurpose::Disorder, 0);
    let entries: Vec<f64> = (0..count).map(|_| rng.sample(StandardNormal)).collect();
    Ok(Disorder {
        n,
        p,
        seed,
        entries,
    })
}

impl Disorder {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// W = (1/p!) sum_pi Y^pi, averaging over all axis permutations.
    pub fn symmetrize(&self) -> Vec<f64> {
        let perms = permutations(self.p as usize);
        let n = self.n;
        let p = self.p as usize;
        let mut digits = vec![0usize; p];
        let mut out = vec![0.0; self.entries.len()];
        for (offset, slot) in out.iter_mut().enumerate() {
            let mut rem = offset;
            for d in (0..p).rev() {
                digits[d] = rem % n;
                rem /= n;
            }
            let mut acc = 0.0;
            for perm in &perms {
                let mut src = 0usize;
                for &axis in perm {
                    src = src * n + digits[axis];
                }
                acc += self.entries[src];
            }
            *slot = acc / perms.len() as f64;
        }
        out
    }
}

fn permutations(p: usize) -> Vec<Vec<usize>> {
    let mut base: Vec<usize> = (0..p).collect();
    let mut out = Vec::new();
    heap_permute(&mut base, p, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

/// Adds coeff * u^{tensor p} to `entries` without decoding indices.
pub(crate) fn add_rank_one(entries: &mut [f64], n: usize, p: u32, coeff: f64, u: &[f64]) {
    fn recurse(entries: &mut [f64], n: usize, depth: u32, offset: usize, partial: f64, u: &[f64]) {
        if depth == 1 {
            let base = offset * n;
            for (i, &ui) in u.iter().enumerate() {
                entries[base + i] += partial * ui;
            }
            return;
        }
        for (i, &ui) in u.iter().enumerate() {
            recurse(entries, n, depth - 1, offset * n + i, partial * ui, u);
        }
    }
    recurse(entries, n, p, 0, coeff, u);
}

/// T_k = Y + N^{-(p-1)/2} sum_r beta_r u(r)^{tensor p}, with the spike
/// vectors drawn i.i.d. from the priors, independently of the disorder.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikedTensor {
    n: usize,
    p: u32,
    k: usize,
    beta_bar: Vec<f64>,
    seed: u64,
    spike_vectors: SpinAssignment,
    disorder: Vec<f64>,
    entries: Vec<f64>,
}

pub fn make_spiked_tensor(
    n: usize,
    p: u32,
    priors: &[Prior],
    beta_bar: &[f64],
    seed: u64,
) -> Result<SpikedTensor> {
    let k = priors.len();
    if k == 0 {
        return Err(Error::ShapeMismatch("no priors given".into()));
    }
    check_beta_bar(beta_bar, k)?;
    let disorder = sample_disorder(n, p, seed)?;

    let mut values = Vec::with_capacity(k * n);
    for (r, prior) in priors.iter().enumerate() {
        let mut rng = stream_rng(seed, StreamPurpose::Spike, r as u64);
        values.extend((0..n).map(|_| prior.sample(&mut rng)));
    }
    let spike_vectors = SpinAssignment::new(k, n, values)?;

    let scale = contraction_scale(n, p);
    let mut entries = disorder.entries.clone();
    for r in 0..k {
        add_rank_one(&mut entries, n, p, scale * beta_bar[r], spike_vectors.row(r));
    }

    Ok(SpikedTensor {
        n,
        p,
        k,
        beta_bar: beta_bar.to_vec(),
        seed,
        spike_vectors,
        disorder: disorder.entries,
        entries,
    })
}

impl SpikedTensor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn beta_bar(&self) -> &[f64] {
        &self.beta_bar
    }

    /// The ground-truth spike vectors u(r), kept for recovery evaluation.
    pub fn spike_vectors(&self) -> &SpinAssignment {
        &self.spike_vectors
    }

    /// The spiked entries T_k.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// The underlying noise Y alone.
    pub fn disorder_entries(&self) -> &[f64] {
        &self.disorder
    }
}
