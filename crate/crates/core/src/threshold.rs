//! The critical SNR beta_c: the largest b at which sup_{v in (0, v_*]}
//! Gamma_b(v) is still nonpositive. Strict monotonicity of gamma_b in b makes
//! b -> sup Gamma_b nondecreasing, so the sign change is bracketed by a
//! coarse upward scan and then bisected to a certified interval.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxiliary::{
    gauss_hermite, sup_big_gamma, GammaParams, QuadratureRule, TimeConvention, CENTERING_TOL,
};
use crate::error::{Error, Result};
use crate::prior::Prior;

/// How the sign change of b -> sup Gamma_b is located.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SolveMethod {
    /// Coarse scan then bisection to width `b_tol`.
    Bisection,
    /// Pure upward scan in steps of `b_step`; replicates the original grid
    /// procedure. beta_c is the last grid value with nonpositive sup.
    Grid { b_step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Defaults to 0.001 * v_* when None.
    pub v_step: Option<f64>,
    pub b_tol: f64,
    pub quad_order: usize,
    pub convention: TimeConvention,
    pub method: SolveMethod,
    /// First point of the coarse scan and its increment.
    pub coarse_step: f64,
    /// Scanning past this value without a sign change is an error.
    pub b_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            v_step: None,
            b_tol: 1e-4,
            quad_order: GammaParams::DEFAULT_QUAD_ORDER,
            convention: TimeConvention::default(),
            method: SolveMethod::Bisection,
            coarse_step: 0.05,
            b_max: 50.0,
        }
    }
}

/// A solved threshold with its certificate: the bracket endpoints and the
/// sup values that witness the sign change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub beta_c: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub v_grid_step: f64,
    pub b_tolerance: f64,
    pub sup_gamma_at_lo: f64,
    pub sup_gamma_at_hi: f64,
    pub convention: TimeConvention,
    pub quad_order: usize,
}

struct SupEvaluator<'a> {
    prior: &'a Prior,
    params: GammaParams,
    rule: QuadratureRule,
    v_step: f64,
}

impl<'a> SupEvaluator<'a> {
    fn new(prior: &'a Prior, p: u32, opts: &SolverOptions) -> Result<Self> {
        prior.assert_centered(CENTERING_TOL)?;
        prior.assert_nondegenerate()?;
        let params = GammaParams::with_options(p, opts.convention, opts.quad_order)?;
        let rule = gauss_hermite(opts.quad_order)?;
        let v_star = prior.moments().second_moment;
        let v_step = opts.v_step.unwrap_or(1e-3 * v_star);
        Ok(SupEvaluator {
            prior,
            params,
            rule,
            v_step,
        })
    }

    fn sup(&self, b: f64) -> Result<f64> {
        Ok(sup_big_gamma(self.prior, &self.params, b, self.v_step, &self.rule)?.sup)
    }
}

/// The critical threshold for `prior` at tensor power `p`.
pub fn critical_beta(prior: &Prior, p: u32, opts: &SolverOptions) -> Result<ThresholdResult> {
    let eval = SupEvaluator::new(prior, p, opts)?;

    match opts.method {
        SolveMethod::Grid { b_step } => {
            if !(b_step > 0.0) {
                return Err(Error::OutOfRange {
                    what: "b_step",
                    value: b_step,
                    expected: "> 0",
                });
            }
            let mut prev = None;
            let mut i = 1u64;
            loop {
                let b = i as f64 * b_step;
                if b > opts.b_max {
                    return Err(Error::NoTransition { b_max: opts.b_max });
                }
                let sup = eval.sup(b)?;
                if sup > 0.0 {
                    let (lo, sup_lo) = prev.ok_or(Error::BracketFailure { b, sup })?;
                    return Ok(ThresholdResult {
                        beta_c: lo,
                        bracket_lo: lo,
                        bracket_hi: b,
                        v_grid_step: eval.v_step,
                        b_tolerance: b_step,
                        sup_gamma_at_lo: sup_lo,
                        sup_gamma_at_hi: sup,
                        convention: opts.convention,
                        quad_order: opts.quad_order,
                    });
                }
                prev = Some((b, sup));
                i += 1;
            }
        }
        SolveMethod::Bisection => {
            let step = opts.coarse_step;
            let mut lo = step;
            let mut sup_lo = eval.sup(lo)?;
            if sup_lo > 0.0 {
                return Err(Error::BracketFailure { b: lo, sup: sup_lo });
            }
            let mut hi;
            let mut sup_hi;
            let mut i = 2u64;
            loop {
                let b = i as f64 * step;
                if b > opts.b_max {
                    return Err(Error::NoTransition { b_max: opts.b_max });
                }
                let sup = eval.sup(b)?;
                if sup > 0.0 {
                    hi = b;
                    sup_hi = sup;
                    break;
                }
                lo = b;
                sup_lo = sup;
                i += 1;
            }
            while hi - lo > opts.b_tol {
                let mid = 0.5 * (lo + hi);
                let sup = eval.sup(mid)?;
                if sup > 0.0 {
                    hi = mid;
                    sup_hi = sup;
                } else {
                    lo = mid;
                    sup_lo = sup;
                }
            }
            Ok(ThresholdResult {
                beta_c: 0.5 * (lo + hi),
                bracket_lo: lo,
                bracket_hi: hi,
                v_grid_step: eval.v_step,
                b_tolerance: opts.b_tol,
                sup_gamma_at_lo: sup_lo,
                sup_gamma_at_hi: sup_hi,
                convention: opts.convention,
                quad_order: opts.quad_order,
            })
        }
    }
}

/// The entropy bound H(rho) = 2 sqrt(-rho ln rho - (1-rho) ln(1-rho) + rho ln 2),
/// an upper bound for beta_c under the sparse Rademacher prior. The
/// (1-rho) ln(1-rho) term is 0 at rho = 1.
pub fn h_upper_bound(rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::OutOfRange {
            what: "rho",
            value: rho,
            expected: "0 < rho <= 1",
        });
    }
    let complement = if rho < 1.0 {
        -(1.0 - rho) * (1.0 - rho).ln()
    } else {
        0.0
    };
    Ok(2.0 * (-rho * rho.ln() + complement + rho * std::f64::consts::LN_2).sqrt())
}

/// One cell of the sparse-Rademacher sweep. Failed solves are recorded as
/// error strings so the rest of the sweep survives them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: u32,
    pub rho: f64,
    pub h_bound: f64,
    pub outcome: std::result::Result<ThresholdResult, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// beta_c values of the successful rows for one p, in rho order.
    pub fn profile(&self, p: u32) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.p == p)
            .filter_map(|r| r.outcome.as_ref().ok().map(|t| (r.rho, t.beta_c)))
            .collect()
    }
}

/// Solves one threshold per (p, rho) cell with the sparse Rademacher prior.
/// Cells are independent and computed in parallel; the output order is
/// deterministic (p outer, rho inner).
pub fn sweep(p_list: &[u32], rho_list: &[f64], opts: &SolverOptions) -> SweepTable {
    let cells: Vec<(u32, f64)> = p_list
        .iter()
        .flat_map(|&p| rho_list.iter().map(move |&rho| (p, rho)))
        .collect();
    let rows = cells
        .par_iter()
        .map(|&(p, rho)| {
            let h_bound = h_upper_bound(rho).unwrap_or(f64::NAN);
            let outcome = Prior::sparse_rademacher(rho)
                .and_then(|prior| critical_beta(&prior, p, opts))
                .map_err(|e| e.to_string());
            SweepRow {
                p,
                rho,
                h_bound,
                outcome,
            }
        })
        .collect();
    SweepTable { rows }
}

/// Marginal thresholds for a vector of priors sharing one tensor power. The
/// joint high-temperature regime is the product box (0, beta_{1,c}] x ... x
/// (0, beta_{k,c}]; detection is possible exactly in the interior of its
/// complement.
pub fn multi_spike_region(
    priors: &[Prior],
    p: u32,
    opts: &SolverOptions,
) -> Result<Vec<ThresholdResult>> {
    priors
        .iter()
        .map(|prior| critical_beta(prior, p, opts))
        .collect()
}

/// True when every coordinate satisfies 0 < beta_r <= beta_{r,c}, i.e. the
/// SNR vector lies in the undetectable product box.
pub fn in_undetectable_box(beta_bar: &[f64], thresholds: &[ThresholdResult]) -> bool {
    beta_bar.len() == thresholds.len()
        && beta_bar
            .iter()
            .zip(thresholds)
            .all(|(&b, t)| b > 0.0 && b <= t.beta_c)
}

/// Whether a profile rises to a single peak and then falls, treating moves
/// within `tol` as flat.
pub fn is_unimodal(values: &[f64], tol: f64) -> bool {
    let mut falling = false;
    for pair in values.windows(2) {
        let step = pair[1] - pair[0];
        if step > tol && falling {
            return false;
        }
        if step < -tol {
            falling = true;
        }
    }
    true
}
