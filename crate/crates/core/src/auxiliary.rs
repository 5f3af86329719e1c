//! The auxiliary functions gamma_b(s) and Gamma_b(v) whose sign behavior
//! characterizes the high-temperature regime of the pure p-spin model.
//!
//! With g_j(t,x) = int a^j exp(ax - a^2 t/2) mu(da),
//!
//!   gamma_b(s) = E_z[ g_1(t, sqrt(t) z)^2 / g_0(t, sqrt(t) z) ],   z ~ N(0,1),
//!   Gamma_b(v) = int_0^v xi''(s) (gamma_b(s) - s) ds,              xi(s) = s^p,
//!
//! where the effective time t = t(b, s) is set by the convention below. The
//! expectation over z is a Gauss-Hermite quadrature in the probabilists'
//! normalization; the s-integral is adaptive Simpson.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prior::Prior;

/// Tolerance used by all threshold-side centering checks.
pub const CENTERING_TOL: f64 = 1e-12;

/// Largest accepted Gauss-Hermite order.
pub const MAX_QUAD_ORDER: usize = 500;

/// Absolute tolerance of the Gamma_b integral.
pub const SIMPSON_TOL: f64 = 1e-10;

/// Maps (b, s) to the time argument of the geometric-Brownian kernel.
///
/// `BSquaredXiPrime` (the default) uses t = b^2 xi'(s) with xi(s) = s^p; this
/// is the reading consistent with the Cole-Hopf expression for the coupled
/// free energy, and it is the one validated by the total-variation
/// calibration. `BXiPrime` uses t = b xi'(s) with xi(s) = s^p/2, the literal
/// transcription of the defining display; it is kept selectable so the
/// calibration can discriminate between the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TimeConvention {
    #[default]
    #[serde(rename = "b_squared_xi_prime")]
    BSquaredXiPrime,
    #[serde(rename = "b_xi_prime")]
    BXiPrime,
}

impl TimeConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            TimeConvention::BSquaredXiPrime => "b_squared_xi_prime",
            TimeConvention::BXiPrime => "b_xi_prime",
        }
    }
}

impl std::str::FromStr for TimeConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "b_squared_xi_prime" | "b2xi" | "default" => Ok(TimeConvention::BSquaredXiPrime),
            "b_xi_prime" | "bxi" | "alternative" => Ok(TimeConvention::BXiPrime),
            _ => Err(Error::InvalidPrior(format!(
                "unknown time convention `{s}` (expected b_squared_xi_prime or b_xi_prime)"
            ))),
        }
    }
}

/// Tensor power and evaluation settings for the auxiliary functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    p: u32,
    convention: TimeConvention,
    quad_order: usize,
}

impl GammaParams {
    pub const DEFAULT_QUAD_ORDER: usize = 101;

    pub fn new(p: u32) -> Result<Self> {
        Self::with_options(p, TimeConvention::default(), Self::DEFAULT_QUAD_ORDER)
    }

    pub fn with_options(p: u32, convention: TimeConvention, quad_order: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::OutOfRange {
                what: "p",
                value: p as f64,
                expected: "p >= 2",
            });
        }
        if quad_order < 21 {
            return Err(Error::OutOfRange {
                what: "quad_order",
                value: quad_order as f64,
                expected: "quad_order >= 21",
            });
        }
        Ok(GammaParams {
            p,
            convention,
            quad_order,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn convention(&self) -> TimeConvention {
        self.convention
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    pub fn rule(&self) -> Result<QuadratureRule> {
        gauss_hermite(self.quad_order)
    }

    /// Effective time t(b, s) of the kernel.
    pub fn effective_time(&self, b: f64, s: f64) -> f64 {
        let p = self.p as f64;
        match self.convention {
            // xi(s) = s^p, t = b^2 xi'(s)
            TimeConvention::BSquaredXiPrime => b * b * p * s.powi(self.p as i32 - 1),
            // xi(s) = s^p / 2, t = b xi'(s)
            TimeConvention::BXiPrime => b * 0.5 * p * s.powi(self.p as i32 - 1),
        }
    }

    /// xi''(s) with xi(s) = s^p. The choice of the constant in front of xi
    /// rescales Gamma_b by a positive factor, which cannot move its sign or
    /// the threshold.
    pub fn xi_second(&self, s: f64) -> f64 {
        let p = self.p as f64;
        p * (p - 1.0) * s.powi(self.p as i32 - 2)
    }
}

/// A quadrature rule integrating against the standard normal density:
/// sum_q w_q f(z_q) approximates E f(Z), Z ~ N(0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    order: usize,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// E f(Z) by the rule, accumulated in fixed node order.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * f(z))
            .sum()
    }
}

/// Orthonormal probabilists' Hermite values (h_order, h_{order-1}) at x,
/// both scaled by e^{-log_scale} to stay inside f64 range. The recurrence is
/// h_{m+1} = (x h_m - sqrt(m) h_{m-1}) / sqrt(m+1) with h_0 = 1, h_1 = x.
fn orthonormal_hermite(order: usize, x: f64) -> (f64, f64, f64) {
    debug_assert!(order >= 1);
    let mut log_scale = 0.0f64;
    let mut prev = 1.0f64;
    let mut cur = x;
    for m in 1..order {
        let next = (x * cur - (m as f64).sqrt() * prev) / ((m + 1) as f64).sqrt();
        prev = cur;
        cur = next;
        let magnitude = cur.abs().max(prev.abs());
        if magnitude > 1e100 {
            cur *= 1e-100;
            prev *= 1e-100;
            log_scale += 1e100f64.ln();
        }
    }
    (cur, prev, log_scale)
}

/// Nodes and weights for the probabilists' Gauss-Hermite rule. Following
/// Golub-Welsch, the nodes are the eigenvalues of the symmetric tridiagonal
/// Jacobi matrix with off-diagonal sqrt(k); each is polished by Newton steps
/// on the orthonormal recurrence, and the weight comes from the stable
/// formula w = 1 / (n h_{n-1}(x)^2). Eigenvector-based weights would lose
/// all relative accuracy at the extreme nodes (true weights ~1e-80 drown in
/// absolute eigenvector noise), which matters here because gamma multiplies
/// the log-weights by large exponential shifts.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if order < 1 {
        return Err(Error::OutOfRange {
            what: "order",
            value: order as f64,
            expected: "order >= 1",
        });
    }
    if order > MAX_QUAD_ORDER {
        return Err(Error::QuadratureOrder {
            order,
            limit: MAX_QUAD_ORDER,
        });
    }

    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for k in 1..order {
        let off = (k as f64).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().cloned().collect();
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let sqrt_n = (order as f64).sqrt();
    let mut log_weights = Vec::with_capacity(order);
    for x in &mut nodes {
        for _ in 0..3 {
            let (h_n, h_nm1, _) = orthonormal_hermite(order, *x);
            let step = h_n / (sqrt_n * h_nm1);
            *x -= step;
            if step.abs() <= 1e-15 * (1.0 + x.abs()) {
                break;
            }
        }
        let (_, h_nm1, log_scale) = orthonormal_hermite(order, *x);
        log_weights.push(-(order as f64).ln() - 2.0 * (h_nm1.abs().ln() + log_scale));
    }

    // The rule is symmetric about the origin; enforce that exactly by
    // averaging mirrored pairs (and pinning the middle node of odd orders).
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let node = 0.5 * (nodes[j] - nodes[i]);
        let lw = 0.5 * (log_weights[i] + log_weights[j]);
        nodes[i] = -node;
        nodes[j] = node;
        log_weights[i] = lw;
        log_weights[j] = lw;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }

    let weights: Vec<f64> = log_weights.iter().map(|lw| lw.exp()).collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        log_weights,
        order,
    })
}

fn check_nonnegative(what: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value,
            expected: "finite and >= 0",
        })
    }
}

fn validate_gamma_inputs(prior: &Prior, b: f64, s: f64) -> Result<()> {
    prior.assert_centered(CENTERING_TOL)?;
    prior.assert_nondegenerate()?;
    check_nonnegative("b", b)?;
    check_nonnegative("s", s)
}

/// The integrand of gamma at one point x = sqrt(t) z: g_1(t,x)^2 / g_0(t,x)
/// as (log shift, shifted ratio). The exponent of every g_j is shifted by
/// its maximum over the atoms, so large times cannot overflow.
#[inline]
fn gamma_ratio(atoms: &[(f64, f64)], t: f64, x: f64) -> (f64, f64) {
    let mut max_exp = f64::NEG_INFINITY;
    for &(a, _) in atoms {
        let e = a * x - a * a * t * 0.5;
        if e > max_exp {
            max_exp = e;
        }
    }
    let mut g0 = 0.0;
    let mut g1 = 0.0;
    for &(a, w) in atoms {
        let e = (a * x - a * a * t * 0.5 - max_exp).exp();
        g0 += w * e;
        g1 += w * a * e;
    }
    (max_exp, g1 * g1 / g0)
}

/// gamma_b(s) at effective time t.
///
/// As a function of z the integrand is analytic only in a strip of half
/// width pi / (gap * sqrt(t)) around the real axis (gap = support diameter):
/// the zeros of g_0 sit that close. Gauss-Hermite converges like
/// exp(-2 * strip * sqrt(2 order)), so the rule is used where that bound
/// puts it at machine precision, and beyond that the expectation switches to
/// a trapezoid refinement in z whose step is chosen from the same strip
/// width; for strip-analytic integrands the trapezoid error decays like
/// exp(-2 pi strip / step), so both paths are converged to ~1e-13 and the
/// result is insensitive to the quadrature order everywhere.
fn gamma_at_time(prior: &Prior, t: f64, rule: &QuadratureRule) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let sqrt_t = t.sqrt();
    let atoms = prior.atoms();
    let lo = atoms.iter().map(|&(a, _)| a).fold(f64::INFINITY, f64::min);
    let hi = atoms.iter().map(|&(a, _)| a).fold(f64::NEG_INFINITY, f64::max);
    let gap = hi - lo;
    debug_assert!(gap > 0.0);
    let strip = std::f64::consts::PI / (gap * sqrt_t);

    if 2.0 * strip * (2.0 * rule.order as f64 + 1.0).sqrt() >= 32.0 {
        let mut total = 0.0;
        for (q, &z) in rule.nodes.iter().enumerate() {
            let (shift, ratio) = gamma_ratio(atoms, t, sqrt_t * z);
            total += (rule.log_weights[q] + shift).exp() * ratio;
        }
        return total;
    }

    // target exp(-2 pi strip / h) ~ 1e-15
    let h = 2.0 * std::f64::consts::PI * strip / 34.5;
    let z_max = prior.support_bound() * sqrt_t + 13.0;
    let steps = ((2.0 * z_max / h).ceil() as usize).clamp(64, 2_000_000);
    let h = 2.0 * z_max / steps as f64;
    let log_norm = -0.5 * (2.0 * std::f64::consts::PI).ln();
    let mut total = 0.0;
    for i in 0..=steps {
        let z = -z_max + i as f64 * h;
        let (shift, ratio) = gamma_ratio(atoms, t, sqrt_t * z);
        let term = (log_norm - 0.5 * z * z + shift).exp() * ratio;
        total += if i == 0 || i == steps { 0.5 * term } else { term };
    }
    total * h
}

/// gamma_b(s): the Gibbs-mean-squared magnetization of the one-body measure
/// tilted by the kernel at time t(b, s). Lies in [0, v_*]; equals 0 at s = 0
/// or b = 0; strictly increasing in b for s > 0.
pub fn gamma(prior: &Prior, params: &GammaParams, b: f64, s: f64, rule: &QuadratureRule) -> Result<f64> {
    validate_gamma_inputs(prior, b, s)?;
    Ok(gamma_at_time(prior, params.effective_time(b, s), rule))
}

/// Adaptive Simpson with Richardson acceptance, absolute tolerance.
fn simpson_recurse(
    f: &impl Fn(f64) -> f64,
    a: f64,
    fa: f64,
    b: f64,
    fb: f64,
    m: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let refined = left + right;
    if depth == 0 || (refined - whole).abs() <= 15.0 * tol {
        refined + (refined - whole) / 15.0
    } else {
        let half = 0.5 * tol;
        simpson_recurse(f, a, fa, m, fm, lm, flm, left, half, depth - 1)
            + simpson_recurse(f, m, fm, b, fb, rm, frm, right, half, depth - 1)
    }
}

pub(crate) fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fb = f(b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_recurse(&f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// Gamma_b(v) = int_0^v xi''(s) (gamma_b(s) - s) ds. At b = 0 this reduces to
/// the closed form -(p-1) v^p.
pub fn big_gamma(
    prior: &Prior,
    params: &GammaParams,
    b: f64,
    v: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    validate_gamma_inputs(prior, b, 0.0)?;
    let v_star = prior.moments().second_moment;
    if !(v >= 0.0 && v <= v_star * (1.0 + 1e-12) + 1e-300) {
        return Err(Error::OutOfRange {
            what: "v",
            value: v,
            expected: "0 <= v <= v_*",
        });
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    if b == 0.0 {
        let p = params.p() as f64;
        return Ok(-(p - 1.0) * v.powi(params.p() as i32));
    }
    let integrand =
        |s: f64| params.xi_second(s) * (gamma_at_time(prior, params.effective_time(b, s), rule) - s);
    Ok(adaptive_simpson(integrand, 0.0, v, SIMPSON_TOL))
}

/// The grid maximum of Gamma_b and its location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupGamma {
    pub sup: f64,
    pub argmax_v: f64,
}

/// Maximum of Gamma_b over the grid {v_step, 2 v_step, ..., v_*}, with the
/// endpoint v_* always included (the sup in the threshold criterion runs over
/// (0, v_*], and v = 0 would trivially contribute Gamma_b(0) = 0).
///
/// Panels between grid points are integrated once and prefix-summed, so the
/// whole grid costs a single pass of adaptive Simpson over [0, v_*] with the
/// panel tolerances summing to the global tolerance.
pub fn sup_big_gamma(
    prior: &Prior,
    params: &GammaParams,
    b: f64,
    v_step: f64,
    rule: &QuadratureRule,
) -> Result<SupGamma> {
    validate_gamma_inputs(prior, b, 0.0)?;
    let v_star = prior.moments().second_moment;
    if !(v_step > 0.0 && v_step <= v_star / 10.0) {
        return Err(Error::OutOfRange {
            what: "v_step",
            value: v_step,
            expected: "0 < v_step <= v_*/10",
        });
    }

    let mut grid = Vec::with_capacity((v_star / v_step) as usize + 2);
    let mut i = 1u64;
    loop {
        let v = i as f64 * v_step;
        if v >= v_star * (1.0 - 1e-12) {
            break;
        }
        grid.push(v);
        i += 1;
    }
    grid.push(v_star);

    if b == 0.0 {
        let p = params.p() as f64;
        let mut best = SupGamma {
            sup: f64::NEG_INFINITY,
            argmax_v: grid[0],
        };
        for &v in &grid {
            let value = -(p - 1.0) * v.powi(params.p() as i32);
            if value > best.sup {
                best = SupGamma {
                    sup: value,
                    argmax_v: v,
                };
            }
        }
        return Ok(best);
    }

    let integrand =
        |s: f64| params.xi_second(s) * (gamma_at_time(prior, params.effective_time(b, s), rule) - s);

    let mut best = SupGamma {
        sup: f64::NEG_INFINITY,
        argmax_v: grid[0],
    };
    let mut acc = 0.0;
    let mut prev_v = 0.0;
    let mut prev_f = integrand(0.0);
    for &v in &grid {
        let fv = integrand(v);
        let width = v - prev_v;
        let m = 0.5 * (prev_v + v);
        let fm = integrand(m);
        let whole = width / 6.0 * (prev_f + 4.0 * fm + fv);
        let panel_tol = SIMPSON_TOL * (width / v_star).max(1e-6);
        acc += simpson_recurse(&integrand, prev_v, prev_f, v, fv, m, fm, whole, panel_tol, 48);
        if acc > best.sup {
            best = SupGamma {
                sup: acc,
                argmax_v: v,
            };
        }
        prev_v = v;
        prev_f = fv;
    }
    Ok(best)
}
