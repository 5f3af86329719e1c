//! Contractions, overlaps, and the normalized Hamiltonians
//!
//!   X_N(sigma)        = N^{-(p-1)/2} <Y, sigma^{tensor p}>,
//!   H_{N,beta}(sigma) = sum_r beta_r X_N(sigma(r))
//!                       - sum_{r,r'} (beta_r beta_{r'}/2) N R(sigma(r), sigma(r'))^p,
//!
//! normalized so that E exp H = 1 for every fixed configuration.

use crate::error::{Error, Result};
use crate::spin_glass::{check_beta_bar, contraction_scale, Disorder, SpinAssignment};

/// <Y, row^{tensor p}> by contracting one axis at a time, fastest axis first.
pub(crate) fn contract_full(
    entries: &[f64],
    n: usize,
    p: u32,
    row: &[f64],
    scratch: &mut Vec<f64>,
) -> f64 {
    debug_assert_eq!(entries.len(), n.pow(p));
    debug_assert_eq!(row.len(), n);
    let mut len = entries.len() / n;
    scratch.clear();
    scratch.resize(len, 0.0);
    for j in 0..len {
        let base = j * n;
        let mut acc = 0.0;
        for (i, &ri) in row.iter().enumerate() {
            acc += entries[base + i] * ri;
        }
        scratch[j] = acc;
    }
    while len > n {
        len /= n;
        for j in 0..len {
            let base = j * n;
            let mut acc = 0.0;
            for (i, &ri) in row.iter().enumerate() {
                acc += scratch[base + i] * ri;
            }
            scratch[j] = acc;
        }
    }
    row.iter().zip(&scratch[..n]).map(|(&ri, &s)| ri * s).sum()
}

fn masked_contract(
    entries: &[f64],
    n: usize,
    p: u32,
    row: &[f64],
    mask: u32,
    site: usize,
    pos: u32,
    offset: usize,
) -> f64 {
    if pos == p {
        return entries[offset];
    }
    if mask & (1 << pos) != 0 {
        masked_contract(entries, n, p, row, mask, site, pos + 1, offset * n + site)
    } else {
        let mut acc = 0.0;
        for (i, &ri) in row.iter().enumerate() {
            acc += ri * masked_contract(entries, n, p, row, mask, site, pos + 1, offset * n + i);
        }
        acc
    }
}

/// Change of <Y, row^{tensor p}> when `row[site]` moves by `delta`, from the
/// multilinear expansion over the index positions equal to `site`. Costs
/// (n+1)^p - n^p ~ p n^{p-1} instead of a full recontraction. `row` is the
/// state before the change.
pub(crate) fn contract_delta(
    entries: &[f64],
    n: usize,
    p: u32,
    row: &[f64],
    site: usize,
    delta: f64,
) -> f64 {
    let mut total = 0.0;
    for mask in 1u32..(1 << p) {
        let j = mask.count_ones();
        total += delta.powi(j as i32) * masked_contract(entries, n, p, row, mask, site, 0, 0);
    }
    total
}

/// R(a, b) = (1/N) sum_i a_i b_i.
pub fn overlap(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "overlap of rows with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| x * y).sum::<f64>() / a.len() as f64)
}

/// X_N(row) for one configuration row.
pub fn hamiltonian_x(d: &Disorder, row: &[f64]) -> Result<f64> {
    if row.len() != d.n() {
        return Err(Error::ShapeMismatch(format!(
            "row length {} but N = {}",
            row.len(),
            d.n()
        )));
    }
    let mut scratch = Vec::new();
    Ok(contraction_scale(d.n(), d.p()) * contract_full(d.entries(), d.n(), d.p(), row, &mut scratch))
}

/// H from precomputed raw contractions C_r = <Y, sigma(r)^{tensor p}> and raw
/// dot products dots[r*k + r'] = sum_i sigma_i(r) sigma_i(r').
pub(crate) fn hamiltonian_from_parts(
    contractions: &[f64],
    dots: &[f64],
    beta_bar: &[f64],
    n: usize,
    p: u32,
    scale: f64,
) -> f64 {
    let k = beta_bar.len();
    let nf = n as f64;
    let mut h = 0.0;
    for r in 0..k {
        h += beta_bar[r] * scale * contractions[r];
    }
    for r in 0..k {
        for r2 in 0..k {
            let overlap = dots[r * k + r2] / nf;
            h -= 0.5 * beta_bar[r] * beta_bar[r2] * nf * overlap.powi(p as i32);
        }
    }
    h
}

/// The auxiliary Hamiltonian H^A_{N,t} expanded over the raw disorder:
///
///   sqrt(t) sum_r beta_r X_N(sigma(r))
///   - (t/2) sum_{r,r'} beta_r beta_{r'} N R(sigma(r), sigma(r'))^p
///   + t sum_{r,r'} beta_r beta_{r'} N R(sigma(r), u(r'))^p,
///
/// with ext_dots[r*k + r'] = sum_i sigma_i(r) u_i(r').
pub(crate) fn auxiliary_hamiltonian_from_parts(
    contractions: &[f64],
    dots: &[f64],
    ext_dots: &[f64],
    beta_bar: &[f64],
    t: f64,
    n: usize,
    p: u32,
    scale: f64,
) -> f64 {
    let k = beta_bar.len();
    let nf = n as f64;
    let sqrt_t = t.sqrt();
    let mut h = 0.0;
    for r in 0..k {
        h += sqrt_t * beta_bar[r] * scale * contractions[r];
    }
    for r in 0..k {
        for r2 in 0..k {
            let bb = beta_bar[r] * beta_bar[r2];
            let self_overlap = dots[r * k + r2] / nf;
            let spike_overlap = ext_dots[r * k + r2] / nf;
            h += bb * nf * (t * spike_overlap.powi(p as i32) - 0.5 * t * self_overlap.powi(p as i32));
        }
    }
    h
}

/// H_{N, beta_bar}(sigma_bar); k = 1 reduces to the scalar-valued model.
pub fn hamiltonian(d: &Disorder, s: &SpinAssignment, beta_bar: &[f64]) -> Result<f64> {
    if s.n() != d.n() {
        return Err(Error::ShapeMismatch(format!(
            "assignment has N = {} but disorder has N = {}",
            s.n(),
            d.n()
        )));
    }
    check_beta_bar(beta_bar, s.k())?;
    let k = s.k();
    let mut scratch = Vec::new();
    let contractions: Vec<f64> = (0..k)
        .map(|r| contract_full(d.entries(), d.n(), d.p(), s.row(r), &mut scratch))
        .collect();
    let mut dots = vec![0.0; k * k];
    for r in 0..k {
        for r2 in 0..k {
            dots[r * k + r2] = s.row(r).iter().zip(s.row(r2)).map(|(&a, &b)| a * b).sum();
        }
    }
    Ok(hamiltonian_from_parts(
        &contractions,
        &dots,
        beta_bar,
        d.n(),
        d.p(),
        contraction_scale(d.n(), d.p()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prior::Prior;
    use crate::spin_glass::sample_disorder;

    #[test]
    fn overlap_values() {
        assert_eq!(overlap(&[1.0, 1.0, -1.0, -1.0], &[1.0, 1.0, -1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(overlap(&[1.0, 1.0, -1.0, -1.0], &[1.0, -1.0, 1.0, -1.0]).unwrap(), 0.0);
        assert_eq!(overlap(&[2.0, 0.0], &[0.0, 2.0]).unwrap(), 0.0);
        assert!(overlap(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn zero_row_has_zero_energy() {
        let d = sample_disorder(5, 3, 1).unwrap();
        assert_eq!(hamiltonian_x(&d, &[0.0; 5]).unwrap(), 0.0);
        assert!(hamiltonian_x(&d, &[0.0; 4]).is_err());
    }

    #[test]
    fn contraction_is_linear_in_the_disorder() {
        let d = sample_disorder(4, 3, 2).unwrap();
        let row = [1.0, -1.0, 1.0, 1.0];
        let doubled: Vec<f64> = d.entries().iter().map(|y| 2.0 * y).collect();
        let mut scratch = Vec::new();
        let base = contract_full(d.entries(), 4, 3, &row, &mut scratch);
        let twice = contract_full(&doubled, 4, 3, &row, &mut scratch);
        assert!((twice - 2.0 * base).abs() < 1e-10 * base.abs().max(1.0));
    }

    #[test]
    fn contract_delta_matches_recontraction() {
        let d = sample_disorder(5, 3, 3).unwrap();
        let mut scratch = Vec::new();
        let row = [0.7, -1.3, 0.2, 1.0, -0.4];
        let before = contract_full(d.entries(), 5, 3, &row, &mut scratch);
        for site in 0..5 {
            let delta = 0.9 - row[site];
            let predicted = before + contract_delta(d.entries(), 5, 3, &row, site, delta);
            let mut moved = row;
            moved[site] = 0.9;
            let actual = contract_full(d.entries(), 5, 3, &moved, &mut scratch);
            assert!(
                (predicted - actual).abs() < 1e-9 * actual.abs().max(1.0),
                "site {site}: {predicted} vs {actual}"
            );
        }
    }

    #[test]
    fn x_variance_matches_covariance_formula() {
        // E X^2 = N R(sigma, sigma)^p = 6 for a +-1 row at n = 6, p = 3
        let n = 6;
        let row = [1.0, -1.0, 1.0, 1.0, -1.0, 1.0];
        let seeds = 2000u64;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for seed in 0..seeds {
            let d = sample_disorder(n, 3, seed).unwrap();
            let x = hamiltonian_x(&d, &row).unwrap();
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / seeds as f64;
        let var = sum_sq / seeds as f64 - mean * mean;
        assert!((var - 6.0).abs() < 0.6, "sample variance {var}");
    }

    #[test]
    fn zero_snr_hamiltonian_vanishes() {
        let d = sample_disorder(4, 3, 4).unwrap();
        let s = SpinAssignment::new(1, 4, vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(hamiltonian(&d, &s, &[0.0]).unwrap(), 0.0);
        assert!(hamiltonian(&d, &s, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn even_p_hamiltonian_is_parity_invariant() {
        let d = sample_disorder(6, 2, 5).unwrap();
        let row = vec![1.0, 1.0, -1.0, 1.0, -1.0, -1.0];
        let flipped: Vec<f64> = row.iter().map(|x| -x).collect();
        let s = SpinAssignment::new(1, 6, row).unwrap();
        let s_flipped = SpinAssignment::new(1, 6, flipped).unwrap();
        let a = hamiltonian(&d, &s, &[0.7]).unwrap();
        let b = hamiltonian(&d, &s_flipped, &[0.7]).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn exp_hamiltonian_is_normalized_over_the_disorder() {
        // E_Y exp H_{N, beta}(sigma) = 1 for fixed sigma
        let n = 5;
        let prior = Prior::rademacher();
        let mut rng = crate::rng::stream_rng(99, crate::rng::StreamPurpose::Spike, 0);
        let row: Vec<f64> = (0..n).map(|_| prior.sample(&mut rng)).collect();
        let s = SpinAssignment::new(1, n, row).unwrap();
        let seeds = 5000u64;
        let mut sum = 0.0;
        for seed in 0..seeds {
            let d = sample_disorder(n, 3, seed).unwrap();
            sum += hamiltonian(&d, &s, &[0.5]).unwrap().exp();
        }
        let mean = sum / seeds as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean exp H = {mean}");
    }
}
