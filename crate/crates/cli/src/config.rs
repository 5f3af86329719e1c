//! Run configuration: CLI flags merged over an optional JSON config file,
//! with flags taking precedence. The resolved configuration is what the
//! meta sidecar records.

use serde::{Deserialize, Serialize};

use spikeglass_core::{Error as CoreError, Prior, Result as CoreResult, TimeConvention};

/// Every knob a subcommand can consume. Unused fields keep their defaults;
/// the sidecar records the whole resolved struct.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub subcommand: String,
    pub prior: Option<String>,
    pub prior_file: Option<String>,
    pub p: u32,
    pub p_list: Vec<u32>,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub beta: Option<f64>,
    pub beta_bar: Vec<f64>,
    pub beta_grid: Option<String>,
    pub rho_list: Vec<f64>,
    pub s_grid: Option<String>,
    pub b: f64,
    pub quad_order: usize,
    pub convention: String,
    pub v_step: Option<f64>,
    pub b_tol: f64,
    pub method: String,
    pub b_step: f64,
    pub t: f64,
    pub t_grid: Option<String>,
    pub dt: f64,
    pub replicas: u64,
    pub trials: u64,
    pub sweeps: u64,
    pub burn_in: u64,
    pub level: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<String>,
    pub format: String,
    pub export_tensor: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subcommand: String::new(),
            prior: None,
            prior_file: None,
            p: 3,
            p_list: vec![3, 4, 5, 10],
            n: 8,
            n_list: vec![6, 8, 10, 12],
            beta: None,
            beta_bar: Vec::new(),
            beta_grid: None,
            rho_list: (1..=10).map(|i| i as f64 / 10.0).collect(),
            s_grid: None,
            b: 1.0,
            quad_order: 101,
            convention: "b_squared_xi_prime".into(),
            v_step: None,
            b_tol: 1e-4,
            method: "bisection".into(),
            b_step: 0.001,
            t: 1.0,
            t_grid: None,
            dt: 0.01,
            replicas: 200,
            trials: 200,
            sweeps: 2000,
            burn_in: 200,
            level: "fast".into(),
            seed: 1,
            threads: None,
            out: None,
            format: "csv".into(),
            export_tensor: None,
        }
    }
}

impl RunConfig {
    /// The prior(s) selected by `--prior` / `--prior-file`. A comma-separated
    /// spec list yields one prior per spike component.
    pub fn resolve_priors(&self) -> CoreResult<Vec<Prior>> {
        if let Some(path) = &self.prior_file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CoreError::InvalidPrior(format!("cannot read prior file `{path}`: {e}"))
            })?;
            return Ok(vec![Prior::from_json_str(&text)?]);
        }
        let spec = self.prior.as_deref().unwrap_or("rademacher");
        spec.split(',').map(Prior::from_spec).collect()
    }

    /// The SNR vector: `--beta-bar` wins, then `--beta`, then 1.0 per prior.
    pub fn resolve_beta_bar(&self, k: usize) -> Vec<f64> {
        if !self.beta_bar.is_empty() {
            return self.beta_bar.clone();
        }
        vec![self.beta.unwrap_or(1.0); k]
    }

    pub fn resolve_convention(&self) -> CoreResult<TimeConvention> {
        self.convention.parse()
    }
}

/// Parses `lo:hi:step` into an inclusive grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid `{spec}` is not of the form lo:hi:step"));
    }
    let lo: f64 = parts[0].parse().map_err(|_| format!("bad grid lower bound in `{spec}`"))?;
    let hi: f64 = parts[1].parse().map_err(|_| format!("bad grid upper bound in `{spec}`"))?;
    let step: f64 = parts[2].parse().map_err(|_| format!("bad grid step in `{spec}`"))?;
    if !(step > 0.0) || hi < lo {
        return Err(format!("grid `{spec}` must have step > 0 and hi >= lo"));
    }
    let mut out = Vec::new();
    let mut i = 0u64;
    loop {
        let x = lo + i as f64 * step;
        if x > hi + 1e-12 * step {
            break;
        }
        out.push(x);
        i += 1;
    }
    Ok(out)
}
