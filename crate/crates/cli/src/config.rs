use std::path::Path;

use serde::{Deserialize, Serialize};

/// Tolerances, seeds and sizes shared by every command. Loaded from a TOML
/// file and then overridden by flags; the effective values are copied into
/// each report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub workers: usize,
    /// Eigenvalue floor for Gram positivity.
    pub psd_tol: f64,
    pub fd_step: f64,
    pub richardson: bool,
    /// Truncation used when an expression is expanded for symbolic work.
    pub expand_maxdeg: usize,
    pub sampler_samples: usize,
    pub sampler_radius: f64,
    pub null_cutoff: f64,
    pub basis_seed: Option<u64>,
    pub verify_radius: f64,
    pub verify_tol: f64,
    pub continuation_order: Option<usize>,
    pub continuation_tol: f64,
    pub overlap_samples: usize,
    pub overlap_tol: f64,
    pub bch_samples: usize,
    pub divergence_degree: usize,
    pub triangular_tol: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 7,
            workers: 1,
            psd_tol: 1e-9,
            fd_step: 1e-3,
            richardson: true,
            expand_maxdeg: 8,
            sampler_samples: 200,
            sampler_radius: 0.5,
            null_cutoff: 1e-10,
            basis_seed: None,
            verify_radius: 0.1,
            verify_tol: 1e-6,
            continuation_order: None,
            continuation_tol: 1e-3,
            overlap_samples: 8,
            overlap_tol: 1e-6,
            bch_samples: 20,
            divergence_degree: 200,
            triangular_tol: 1e-9,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let c: Config = toml::from_str("seed = 3\npsd_tol = 1e-7\n").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.psd_tol, 1e-7);
        assert_eq!(c.fd_step, Config::default().fd_step);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("sede = 3").is_err());
    }
}
