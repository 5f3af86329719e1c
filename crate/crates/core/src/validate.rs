//! Self-check suites behind the `validate` CLI subcommand. The fast level
//! runs the analytic identities; the full level adds the Monte Carlo and
//! enumeration oracles, including the convention calibration.

use crate::auxiliary::{big_gamma, gamma, gauss_hermite, GammaParams};
use crate::calibration::{convention_calibration, CalibrationOptions};
use crate::mmse::{derivative_identity_check, dmse, mmse_exact, nishimori_residual};
use crate::prior::Prior;
use crate::spin_glass::{
    estimate_tv, free_energy_exact, hamiltonian, metropolis_chain, overlap_moment_exact,
    sample_disorder, SpinAssignment,
};
use crate::threshold::{critical_beta, h_upper_bound, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidateLevel {
    Fast,
    Full,
}

impl std::str::FromStr for ValidateLevel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fast" => Ok(ValidateLevel::Fast),
            "full" => Ok(ValidateLevel::Full),
            _ => Err(format!("unknown level `{s}` (expected fast or full)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn run_check(
    out: &mut Vec<CheckOutcome>,
    name: &str,
    f: impl FnOnce() -> std::result::Result<String, String>,
) {
    let (passed, detail) = match f() {
        Ok(detail) => (true, detail),
        Err(detail) => (false, detail),
    };
    out.push(CheckOutcome {
        name: name.to_string(),
        passed,
        detail,
    });
}

fn ensure(cond: bool, detail: String) -> std::result::Result<String, String> {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

pub fn run_suite(level: ValidateLevel, seed: u64) -> Vec<CheckOutcome> {
    let mut out = Vec::new();

    run_check(&mut out, "prior.sparse_family_unit_second_moment", || {
        let mut worst = 0.0f64;
        for i in 1..=10 {
            let m = Prior::sparse_rademacher(i as f64 / 10.0)
                .map_err(|e| e.to_string())?
                .moments();
            worst = worst.max((m.second_moment - 1.0).abs()).max(m.mean.abs());
        }
        ensure(worst < 1e-12, format!("max deviation {worst:.3e}"))
    });

    run_check(&mut out, "quadrature.normal_moments", || {
        let mut worst = 0.0f64;
        for order in [61usize, 101, 201] {
            let rule = gauss_hermite(order).map_err(|e| e.to_string())?;
            let w: f64 = rule.weights().iter().sum();
            worst = worst
                .max((w - 1.0).abs())
                .max((rule.expect(|z| z * z) - 1.0).abs())
                .max((rule.expect(|z| z.powi(4)) - 3.0).abs() / 30.0);
        }
        ensure(worst < 1e-11, format!("max deviation {worst:.3e}"))
    });

    run_check(&mut out, "gamma.exact_zeros", || {
        let prior = Prior::rademacher();
        let params = GammaParams::new(3).map_err(|e| e.to_string())?;
        let rule = params.rule().map_err(|e| e.to_string())?;
        let a = gamma(&prior, &params, 1.7, 0.0, &rule).map_err(|e| e.to_string())?;
        let b = gamma(&prior, &params, 0.0, 0.8, &rule).map_err(|e| e.to_string())?;
        let c = big_gamma(&prior, &params, 1.1, 0.0, &rule).map_err(|e| e.to_string())?;
        ensure(
            a == 0.0 && b == 0.0 && c == 0.0,
            format!("gamma(s=0)={a}, gamma(b=0)={b}, Gamma(0)={c}"),
        )
    });

    run_check(&mut out, "big_gamma.zero_temperature_closed_form", || {
        let prior = Prior::rademacher();
        let params = GammaParams::new(3).map_err(|e| e.to_string())?;
        let rule = params.rule().map_err(|e| e.to_string())?;
        let v = big_gamma(&prior, &params, 0.0, 1.0, &rule).map_err(|e| e.to_string())?;
        ensure(v == -2.0, format!("Gamma_0(1) = {v}"))
    });

    run_check(&mut out, "threshold.bracket_certificate", || {
        let opts = SolverOptions {
            v_step: Some(0.01),
            b_tol: 1e-3,
            ..SolverOptions::default()
        };
        let t = critical_beta(&Prior::rademacher(), 3, &opts).map_err(|e| e.to_string())?;
        let h = h_upper_bound(1.0).map_err(|e| e.to_string())?;
        ensure(
            t.sup_gamma_at_lo <= 0.0
                && t.sup_gamma_at_hi > 0.0
                && t.bracket_hi - t.bracket_lo <= opts.b_tol * (1.0 + 1e-9)
                && t.beta_c > 0.0
                && t.beta_c <= h + 2.0 * opts.b_tol,
            format!("beta_c = {:.4} in [{:.4}, {:.4}], H(1) = {h:.4}", t.beta_c, t.bracket_lo, t.bracket_hi),
        )
    });

    run_check(&mut out, "free_energy.zero_snr_identity", || {
        let d = sample_disorder(6, 3, seed).map_err(|e| e.to_string())?;
        let f = free_energy_exact(&d, &[Prior::rademacher()], &[0.0])
            .map_err(|e| e.to_string())?
            .value;
        ensure(f.abs() < 1e-12, format!("F_N(0) = {f:.3e}"))
    });

    run_check(&mut out, "free_energy.two_site_hand_oracle", || {
        let d = sample_disorder(2, 2, seed).map_err(|e| e.to_string())?;
        let y = d.entries();
        let beta = 0.3f64;
        let scale = 1.0 / 2.0f64.sqrt();
        let mut terms = Vec::new();
        for (s1, s2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let x = scale * (y[0] * s1 * s1 + y[1] * s1 * s2 + y[2] * s2 * s1 + y[3] * s2 * s2);
            terms.push(beta * x - beta * beta + (0.25f64).ln());
        }
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let hand = (m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()) / 2.0;
        let f = free_energy_exact(&d, &[Prior::rademacher()], &[beta])
            .map_err(|e| e.to_string())?
            .value;
        ensure((f - hand).abs() < 1e-12, format!("|F - oracle| = {:.3e}", (f - hand).abs()))
    });

    run_check(&mut out, "tv.zero_snr_identity", || {
        let est = estimate_tv(5, 3, &[Prior::rademacher()], &[0.0], 10, seed)
            .map_err(|e| e.to_string())?;
        ensure(est.value == 0.0, format!("tv = {}", est.value))
    });

    run_check(&mut out, "dmse.formula_values", || {
        let rad = Prior::rademacher();
        let a = dmse(&[rad.clone()], &[2.0], 3).map_err(|e| e.to_string())?;
        let b = dmse(&[rad.clone(), rad], &[1.0, 1.0], 3).map_err(|e| e.to_string())?;
        ensure(a == 4.0 && b == 2.0, format!("dmse values {a}, {b}"))
    });

    run_check(&mut out, "determinism.seeded_streams", || {
        let a = sample_disorder(4, 3, seed).map_err(|e| e.to_string())?;
        let b = sample_disorder(4, 3, seed).map_err(|e| e.to_string())?;
        let priors = [Prior::rademacher()];
        let ca: Vec<SpinAssignment> = metropolis_chain(&a, &priors, &[0.7], 10, 2, seed)
            .map_err(|e| e.to_string())?
            .collect();
        let cb: Vec<SpinAssignment> = metropolis_chain(&b, &priors, &[0.7], 10, 2, seed)
            .map_err(|e| e.to_string())?
            .collect();
        ensure(a == b && ca == cb, "disorder and chain streams reproduce".into())
    });

    if level == ValidateLevel::Fast {
        return out;
    }

    run_check(&mut out, "gamma.strict_monotonicity_grid", || {
        let params = GammaParams::new(3).map_err(|e| e.to_string())?;
        let rule = params.rule().map_err(|e| e.to_string())?;
        let mut min_margin = f64::INFINITY;
        for prior in [Prior::rademacher(), Prior::sparse_rademacher(0.3).map_err(|e| e.to_string())?] {
            for bi in 1..=15 {
                let b = 0.2 * bi as f64;
                for si in 1..=10 {
                    let s = 0.1 * si as f64;
                    let lo = gamma(&prior, &params, b, s, &rule).map_err(|e| e.to_string())?;
                    let hi = gamma(&prior, &params, b + 0.2, s, &rule).map_err(|e| e.to_string())?;
                    min_margin = min_margin.min(hi - lo);
                }
            }
        }
        ensure(min_margin > 1e-8, format!("min increase over grid {min_margin:.3e}"))
    });

    run_check(&mut out, "quadrature.order_stability", || {
        let lo = gauss_hermite(101).map_err(|e| e.to_string())?;
        let hi = gauss_hermite(201).map_err(|e| e.to_string())?;
        let params = GammaParams::new(3).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for prior in [Prior::rademacher(), Prior::sparse_rademacher(0.3).map_err(|e| e.to_string())?] {
            for bi in 1..=15 {
                for si in 1..=10 {
                    let (b, s) = (0.2 * bi as f64, 0.1 * si as f64);
                    let a = gamma(&prior, &params, b, s, &lo).map_err(|e| e.to_string())?;
                    let c = gamma(&prior, &params, b, s, &hi).map_err(|e| e.to_string())?;
                    worst = worst.max((a - c).abs());
                }
            }
        }
        ensure(worst <= 1e-10, format!("max order-101 vs 201 gap {worst:.3e}"))
    });

    run_check(&mut out, "hamiltonian.unit_mean_exp", || {
        let n = 5;
        let s = SpinAssignment::new(1, n, vec![1.0, -1.0, 1.0, 1.0, -1.0]).map_err(|e| e.to_string())?;
        let reps = 2000u64;
        let mut sum = 0.0;
        for i in 0..reps {
            let d = sample_disorder(n, 3, seed.wrapping_add(i)).map_err(|e| e.to_string())?;
            sum += hamiltonian(&d, &s, &[0.5]).map_err(|e| e.to_string())?.exp();
        }
        let mean = sum / reps as f64;
        ensure((mean - 1.0).abs() < 0.1, format!("mean exp H = {mean:.4}"))
    });

    run_check(&mut out, "free_energy.jensen_nonpositive_mean", || {
        let reps = 200u64;
        let mut values = Vec::new();
        for i in 0..reps {
            let d = sample_disorder(8, 3, seed.wrapping_add(i)).map_err(|e| e.to_string())?;
            values.push(
                free_energy_exact(&d, &[Prior::rademacher()], &[1.0])
                    .map_err(|e| e.to_string())?
                    .value,
            );
        }
        let mean: f64 = values.iter().sum::<f64>() / reps as f64;
        let var: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps - 1) as f64;
        let stderr = (var / reps as f64).sqrt();
        ensure(mean <= 3.0 * stderr, format!("mean F = {mean:.4}, stderr = {stderr:.4}"))
    });

    run_check(&mut out, "overlap.zero_snr_exact_law", || {
        let mut worst = 0.0f64;
        for prior in [
            Prior::rademacher(),
            Prior::sparse_rademacher(0.5).map_err(|e| e.to_string())?,
            Prior::new("asym", vec![(-1.5, 0.4), (1.0, 0.6)]).map_err(|e| e.to_string())?,
        ] {
            let v_star = prior.moments().second_moment;
            for n in [4usize, 6, 8] {
                let est = overlap_moment_exact(n, 3, &[prior.clone()], &[0.0], 1, 2, seed)
                    .map_err(|e| e.to_string())?;
                worst = worst.max((est[0].value - v_star * v_star / n as f64).abs());
            }
        }
        ensure(worst < 1e-12, format!("max |E<R^2> - v_*^2/N| = {worst:.3e}"))
    });

    run_check(&mut out, "nishimori.identity_z_score", || {
        let report = nishimori_residual(5, 3, &[Prior::rademacher()], &[1.0], 0.7, 500, seed)
            .map_err(|e| e.to_string())?;
        ensure(report.z.abs() < 4.0, format!("z = {:.2}", report.z))
    });

    run_check(&mut out, "derivative.identity_z_score", || {
        let check = derivative_identity_check(4, 3, &[Prior::rademacher()], &[1.0], 0.5, 1000, 0.01, seed)
            .map_err(|e| e.to_string())?;
        ensure(check.z.abs() < 4.0, format!("z = {:.2}", check.z))
    });

    run_check(&mut out, "mmse.dummy_estimator_dominance", || {
        let mut worst = f64::NEG_INFINITY;
        for beta in [0.5, 2.5] {
            let est = mmse_exact(6, 3, &[Prior::rademacher()], &[beta], 1.0, 80, seed)
                .map_err(|e| e.to_string())?;
            worst = worst.max(est.mmse - est.dmse - 3.0 * est.stderr);
        }
        ensure(worst <= 0.0, format!("max mmse - dmse - 3 se = {worst:.3e}"))
    });

    run_check(&mut out, "calibration.time_convention", || {
        let report = convention_calibration(&CalibrationOptions {
            replicas: 250,
            ..CalibrationOptions::default()
        })
        .map_err(|e| e.to_string())?;
        ensure(
            report.passed(),
            format!(
                "default beta_c = {:.4} in [{:.2}, {:.2}], alternative = {:.4} excluded = {}",
                report.beta_c_default,
                report.bracket_lo,
                report.bracket_hi,
                report.beta_c_alternative,
                report.alternative_excluded
            ),
        )
    });

    out
}
