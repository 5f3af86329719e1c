//! Bounded discrete priors: centered probability measures mu on a bounded
//! subset of the real line, stored as weighted atoms. Continuous priors enter
//! only through user-supplied discretizations, which keeps every inner
//! integral over mu exact.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weight sums further than this from 1 are rejected; anything closer is
/// renormalized, so decimal literals like 0.1 are tolerated without silently
/// accepting bad input.
const WEIGHT_SUM_SLACK: f64 = 1e-9;

/// A probability measure with finitely many atoms on a bounded subset of R.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    atoms: Vec<(f64, f64)>,
    label: String,
    support_bound: f64,
}

/// First and second moments of a prior; `second_moment` is the self-overlap
/// concentration point v_*, `support_bound` is M = max |point|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub second_moment: f64,
    pub support_bound: f64,
}

/// Serialized form: `{"label": str, "atoms": [[point, weight], ...]}`.
#[derive(Serialize, Deserialize)]
struct PriorJson {
    label: String,
    atoms: Vec<(f64, f64)>,
}

fn validate_atoms(atoms: &[(f64, f64)], label: &str) -> Result<(Vec<(f64, f64)>, f64)> {
    if atoms.is_empty() {
        return Err(Error::InvalidPrior(format!("`{label}` has no atoms")));
    }
    for &(point, weight) in atoms {
        if !point.is_finite() {
            return Err(Error::InvalidPrior(format!(
                "`{label}` has a non-finite support point {point}"
            )));
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::InvalidPrior(format!(
                "`{label}` has a non-positive weight {weight} at point {point}"
            )));
        }
    }
    let sum: f64 = atoms.iter().map(|&(_, w)| w).sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_SLACK {
        return Err(Error::InvalidPrior(format!(
            "`{label}` weights sum to {sum}, not 1"
        )));
    }
    let atoms: Vec<(f64, f64)> = atoms.iter().map(|&(a, w)| (a, w / sum)).collect();
    let bound = atoms.iter().map(|&(a, _)| a.abs()).fold(0.0, f64::max);
    Ok((atoms, bound))
}

fn distinct_points(atoms: &[(f64, f64)]) -> usize {
    let mut points: Vec<f64> = atoms.iter().map(|&(a, _)| a).collect();
    points.sort_by(|x, y| x.partial_cmp(y).unwrap());
    points.dedup();
    points.len()
}

impl Prior {
    /// Builds a prior from `(point, weight)` atoms. Weights must be positive
    /// and sum to 1 within 1e-9 (they are renormalized exactly); the support
    /// must contain at least two distinct points, as the threshold theory
    /// requires.
    pub fn new(label: impl Into<String>, atoms: impl Into<Vec<(f64, f64)>>) -> Result<Self> {
        let label = label.into();
        let (atoms, support_bound) = validate_atoms(&atoms.into(), &label)?;
        if distinct_points(&atoms) < 2 {
            return Err(Error::DegeneratePrior { label });
        }
        Ok(Prior {
            atoms,
            label,
            support_bound,
        })
    }

    /// A single-atom point mass. Useful as a deterministic spike fixture in
    /// simulations; rejected by every threshold computation.
    pub fn point_mass(point: f64) -> Result<Self> {
        let label = format!("point:{point}");
        let (atoms, support_bound) = validate_atoms(&[(point, 1.0)], &label)?;
        Ok(Prior {
            atoms,
            label,
            support_bound,
        })
    }

    /// The balanced Bernoulli +-1 prior.
    pub fn rademacher() -> Self {
        Prior::new("rademacher", vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    /// The sparse Rademacher prior: atoms +-1/sqrt(rho) with weight rho/2 each
    /// and 0 with weight 1-rho. At rho = 1 the zero atom is dropped and the
    /// prior reduces to the regular Rademacher prior.
    pub fn sparse_rademacher(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(Error::OutOfRange {
                what: "rho",
                value: rho,
                expected: "0 < rho <= 1",
            });
        }
        let jump = 1.0 / rho.sqrt();
        let mut atoms = vec![(-jump, rho / 2.0)];
        if rho < 1.0 {
            atoms.push((0.0, 1.0 - rho));
        }
        atoms.push((jump, rho / 2.0));
        Prior::new(format!("sparse:{rho}"), atoms)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// M = max |point|.
    pub fn support_bound(&self) -> f64 {
        self.support_bound
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_degenerate(&self) -> bool {
        distinct_points(&self.atoms) < 2
    }

    pub fn moments(&self) -> MomentSummary {
        let mean = self.atoms.iter().map(|&(a, w)| w * a).sum();
        let second_moment = self.atoms.iter().map(|&(a, w)| w * a * a).sum();
        MomentSummary {
            mean,
            second_moment,
            support_bound: self.support_bound,
        }
    }

    /// Fails unless |mean| <= tol. Threshold computations refuse non-centered
    /// priors: with a non-zero mean the spike is detectable by a law of large
    /// numbers on the entry sum, and the auxiliary-function theory does not
    /// apply.
    pub fn assert_centered(&self, tol: f64) -> Result<()> {
        let mean = self.moments().mean;
        if mean.abs() <= tol {
            Ok(())
        } else {
            Err(Error::NotCentered {
                label: self.label.clone(),
                mean,
                tol,
            })
        }
    }

    pub fn assert_nondegenerate(&self) -> Result<()> {
        if self.is_degenerate() {
            Err(Error::DegeneratePrior {
                label: self.label.clone(),
            })
        } else {
            Ok(())
        }
    }

    /// One draw from the prior by cumulative inversion.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for &(a, w) in &self.atoms {
            acc += w;
            if u < acc {
                return a;
            }
        }
        self.atoms.last().unwrap().0
    }

    /// Parses `rademacher` or `sparse:<rho>`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        if spec == "rademacher" {
            return Ok(Prior::rademacher());
        }
        if let Some(rho) = spec.strip_prefix("sparse:") {
            let rho: f64 = rho
                .parse()
                .map_err(|_| Error::InvalidPrior(format!("bad rho in prior spec `{spec}`")))?;
            return Prior::sparse_rademacher(rho);
        }
        Err(Error::InvalidPrior(format!(
            "unknown prior spec `{spec}` (expected `rademacher` or `sparse:<rho>`)"
        )))
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let raw: PriorJson = serde_json::from_str(json)
            .map_err(|e| Error::InvalidPrior(format!("bad prior JSON: {e}")))?;
        Prior::new(raw.label, raw.atoms)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&PriorJson {
            label: self.label.clone(),
            atoms: self.atoms.clone(),
        })
        .expect("prior serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rademacher_atoms_and_moments() {
        let p = Prior::rademacher();
        assert_eq!(p.atoms(), &[(-1.0, 0.5), (1.0, 0.5)]);
        let m = p.moments();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.second_moment, 1.0);
        assert_eq!(m.support_bound, 1.0);
    }

    #[test]
    fn sparse_rademacher_rho_one_is_rademacher() {
        let p = Prior::sparse_rademacher(1.0).unwrap();
        assert_eq!(p.atoms(), &[(-1.0, 0.5), (1.0, 0.5)]);
    }

    #[test]
    fn sparse_rademacher_atoms_at_quarter() {
        let p = Prior::sparse_rademacher(0.25).unwrap();
        assert_eq!(p.atoms(), &[(-2.0, 0.125), (0.0, 0.75), (2.0, 0.125)]);
    }

    #[test]
    fn sparse_rademacher_unit_second_moment_on_a_grid() {
        for i in 1..=10 {
            let rho = i as f64 / 10.0;
            let m = Prior::sparse_rademacher(rho).unwrap().moments();
            assert!((m.second_moment - 1.0).abs() < 1e-12, "rho = {rho}");
            assert!(m.mean.abs() < 1e-15);
        }
    }

    #[test]
    fn sparse_rademacher_rejects_bad_rho() {
        assert!(Prior::sparse_rademacher(0.0).is_err());
        assert!(Prior::sparse_rademacher(1.5).is_err());
        assert!(Prior::sparse_rademacher(-0.2).is_err());
    }

    #[test]
    fn moments_of_asymmetric_prior() {
        let p = Prior::new("lopsided", vec![(1.0, 0.5), (-3.0, 0.5)]).unwrap();
        let m = p.moments();
        assert_eq!(m.mean, -1.0);
        assert_eq!(m.second_moment, 5.0);
        assert_eq!(m.support_bound, 3.0);
    }

    #[test]
    fn sparse_half_support_bound() {
        let m = Prior::sparse_rademacher(0.5).unwrap().moments();
        assert!((m.support_bound - 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((m.second_moment - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centered_check() {
        assert!(Prior::rademacher().assert_centered(1e-12).is_ok());
        for i in 1..=10 {
            let p = Prior::sparse_rademacher(i as f64 / 10.0).unwrap();
            assert!(p.assert_centered(1e-12).is_ok());
        }
        let shifted = Prior::new("shifted", vec![(0.5, 0.5), (0.6, 0.5)]).unwrap();
        match shifted.assert_centered(1e-12) {
            Err(Error::NotCentered { mean, .. }) => assert!((mean - 0.55).abs() < 1e-15),
            other => panic!("expected NotCentered, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(Prior::new("neg", vec![(0.0, -0.5), (1.0, 1.5)]).is_err());
        assert!(Prior::new("sum", vec![(0.0, 0.3), (1.0, 0.3)]).is_err());
        assert!(Prior::new("nan", vec![(f64::NAN, 0.5), (1.0, 0.5)]).is_err());
        assert!(Prior::new("empty", vec![]).is_err());
    }

    #[test]
    fn renormalizes_near_one() {
        let eps = 3e-10;
        let p = Prior::new("near", vec![(-1.0, 0.5 + eps), (1.0, 0.5)]).unwrap();
        let sum: f64 = p.atoms().iter().map(|&(_, w)| w).sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_rules() {
        assert!(Prior::new("pm", vec![(1.0, 1.0)]).is_err());
        assert!(Prior::new("dup", vec![(1.0, 0.5), (1.0, 0.5)]).is_err());
        let pm = Prior::point_mass(1.0).unwrap();
        assert!(pm.is_degenerate());
        assert!(pm.assert_nondegenerate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = Prior::sparse_rademacher(0.25).unwrap();
        let back = Prior::from_json_str(&p.to_json_string()).unwrap();
        assert_eq!(p, back);
        let explicit = r#"{"label":"x","atoms":[[-1.0,0.5],[1.0,0.5]]}"#;
        assert_eq!(Prior::from_json_str(explicit).unwrap().atoms(), Prior::rademacher().atoms());
    }

    #[test]
    fn spec_parsing() {
        assert_eq!(Prior::from_spec("rademacher").unwrap(), Prior::rademacher());
        assert_eq!(
            Prior::from_spec("sparse:0.25").unwrap().atoms(),
            Prior::sparse_rademacher(0.25).unwrap().atoms()
        );
        assert!(Prior::from_spec("cauchy").is_err());
        assert!(Prior::from_spec("sparse:zzz").is_err());
    }

    #[test]
    fn sampling_hits_only_support_points() {
        use crate::rng::{stream_rng, StreamPurpose};
        let p = Prior::sparse_rademacher(0.3).unwrap();
        let mut rng = stream_rng(11, StreamPurpose::Spike, 0);
        for _ in 0..1000 {
            let x = p.sample(&mut rng);
            assert!(p.atoms().iter().any(|&(a, _)| a == x));
        }
    }

    proptest! {
        /// Scaling the support by c scales the second moment by c^2.
        #[test]
        fn second_moment_scaling_law(
            c in -4.0f64..4.0,
            w in 0.05f64..0.95,
            a in 0.1f64..3.0,
            b in 0.1f64..3.0,
        ) {
            prop_assume!(c.abs() > 1e-3);
            let base = Prior::new("base", vec![(-a, w), (b, 1.0 - w)]).unwrap();
            let scaled = Prior::new("scaled", vec![(-a * c, w), (b * c, 1.0 - w)]).unwrap();
            let ratio = scaled.moments().second_moment / base.moments().second_moment;
            prop_assert!((ratio - c * c).abs() < 1e-9 * c * c);
        }

        /// Constructed priors always pass the normalization checks.
        #[test]
        fn construction_normalizes(points in proptest::collection::vec((-5.0f64..5.0, 0.01f64..1.0), 2..6)) {
            let total: f64 = points.iter().map(|&(_, w)| w).sum();
            let atoms: Vec<(f64, f64)> = points.iter().map(|&(a, w)| (a, w / total)).collect();
            if let Ok(p) = Prior::new("prop", atoms) {
                let sum: f64 = p.atoms().iter().map(|&(_, w)| w).sum();
                prop_assert!((sum - 1.0).abs() < 1e-12);
                prop_assert!(p.atoms().iter().all(|&(_, w)| w > 0.0));
                prop_assert!(p.moments().second_moment <= p.support_bound().powi(2) + 1e-12);
                prop_assert!(p.moments().second_moment >= p.moments().mean.powi(2) - 1e-12);
            }
        }
    }
}
