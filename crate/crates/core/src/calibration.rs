//! Calibration of the effective-time convention by an independent simulation
//! oracle.
//!
//! The two candidate conventions put the Rademacher p = 3 threshold at very
//! different places (the alternative's value is roughly twice the square of
//! the default's), so a desk-scale bracket of the empirical transition
//! decides between them. The bracket comes from the total-variation
//! estimator: below the threshold d_TV(W, T) decays in N, above it d_TV
//! climbs towards 1, so we take
//!
//!   lo = the largest grid beta whose TV trend in N is decreasing,
//!   hi = the smallest grid beta whose TV at the largest N exceeds 1/2,
//!
//! and require the default-convention beta_c to fall inside [lo, hi] with
//! the alternative's value outside. "Decreasing trend" is the sign of the
//! least-squares slope of TV against N.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxiliary::TimeConvention;
use crate::error::Result;
use crate::prior::Prior;
use crate::spin_glass::{estimate_tv_multi, Estimate};
use crate::threshold::{critical_beta, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub p: u32,
    pub beta_step: f64,
    pub replicas: u64,
    pub seed: u64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            p: 3,
            beta_step: 0.1,
            replicas: 400,
            seed: 20240901,
        }
    }
}

/// One (beta, N) cell of the calibration table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvCell {
    pub beta: f64,
    pub n: usize,
    pub tv: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub beta_c_default: f64,
    pub beta_c_alternative: f64,
    pub n_list: Vec<usize>,
    pub cells: Vec<TvCell>,
    /// largest grid beta with a decreasing TV trend in N
    pub bracket_lo: f64,
    /// smallest grid beta with TV > 1/2 at the largest N
    pub bracket_hi: f64,
    pub default_inside: bool,
    pub alternative_excluded: bool,
}

impl CalibrationReport {
    pub fn passed(&self) -> bool {
        self.default_inside && self.alternative_excluded
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// Runs the convention calibration for the Rademacher prior.
pub fn convention_calibration(opts: &CalibrationOptions) -> Result<CalibrationReport> {
    let prior = Prior::rademacher();
    let solve = |convention: TimeConvention| -> Result<f64> {
        Ok(critical_beta(
            &prior,
            opts.p,
            &SolverOptions {
                convention,
                ..SolverOptions::default()
            },
        )?
        .beta_c)
    };
    let beta_c_default = solve(TimeConvention::BSquaredXiPrime)?;
    let beta_c_alternative = solve(TimeConvention::BXiPrime)?;

    // the beta grid must reach past both candidate thresholds
    let beta_max = (beta_c_default.max(beta_c_alternative) + 3.0 * opts.beta_step).min(4.0);
    let mut betas = Vec::new();
    let mut i = 1u32;
    loop {
        let beta = i as f64 * opts.beta_step;
        if beta > beta_max {
            break;
        }
        betas.push(beta);
        i += 1;
    }
    let n_list = vec![8usize, 10, 12, 14];

    let priors = [prior];
    let beta_bars: Vec<Vec<f64>> = betas.iter().map(|&b| vec![b]).collect();
    let per_n: Vec<Vec<Estimate>> = n_list
        .par_iter()
        .map(|&n| estimate_tv_multi(n, opts.p, &priors, &beta_bars, opts.replicas, opts.seed))
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for (bi, &beta) in betas.iter().enumerate() {
        for (ni, &n) in n_list.iter().enumerate() {
            let est = per_n[ni][bi];
            cells.push(TvCell {
                beta,
                n,
                tv: est.value,
                stderr: est.stderr,
            });
        }
    }

    let xs: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let mut bracket_lo = f64::NAN;
    let mut bracket_hi = f64::NAN;
    for (bi, &beta) in betas.iter().enumerate() {
        let ys: Vec<f64> = (0..n_list.len()).map(|ni| per_n[ni][bi].value).collect();
        if least_squares_slope(&xs, &ys) < 0.0 {
            bracket_lo = beta;
        }
        if bracket_hi.is_nan() && ys[n_list.len() - 1] > 0.5 {
            bracket_hi = beta;
        }
    }

    let inside = |beta: f64| {
        !bracket_lo.is_nan() && !bracket_hi.is_nan() && beta >= bracket_lo && beta <= bracket_hi
    };
    Ok(CalibrationReport {
        beta_c_default,
        beta_c_alternative,
        n_list,
        cells,
        bracket_lo,
        bracket_hi,
        default_inside: inside(beta_c_default),
        alternative_excluded: !inside(beta_c_alternative),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line_is_recovered() {
        let xs = [8.0, 10.0, 12.0, 14.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.25 * x).collect();
        assert!((least_squares_slope(&xs, &ys) + 0.25).abs() < 1e-12);
    }
}
