//! TOML configuration. Every field is optional; missing values fall back to
//! the calibrated hardware constants and the optimizer defaults.
//!
//! ```toml
//! [noise]
//! c_slope = 14.8e-4
//! c_offset = 2.7e-4
//! eps_mem = 8e-5
//!
//! [seeds]
//! default = 7
//!
//! [paths]
//! out_dir = "runs"
//!
//! [tolerances]
//! verify_abs = 0.0
//! grad_inf = 1e-8
//! rel_change = 1e-12
//! max_iters = 10000
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::variational::{NoiseConstants, OptOptions};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub noise: NoiseConstants,
    pub seeds: Seeds,
    pub paths: Paths,
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    /// Used by randomized commands when `--seed` is absent.
    pub default: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Directory for outputs given as bare file names.
    pub out_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            out_dir: PathBuf::from("."),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed absolute score difference in `verify records` (0 = bit-exact).
    pub verify_abs: f64,
    pub grad_inf: f64,
    pub rel_change: f64,
    pub max_iters: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let o = OptOptions::default();
        Self {
            verify_abs: 0.0,
            grad_inf: o.grad_tol,
            rel_change: o.rel_tol,
            max_iters: o.max_iters,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serializable")
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        let t = &self.tolerances;
        for (what, v) in [
            ("tolerances.verify_abs", t.verify_abs),
            ("tolerances.grad_inf", t.grad_inf),
            ("tolerances.rel_change", t.rel_change),
        ] {
            if !(v >= 0.0) {
                return Err(Error::OutOfRange {
                    what,
                    value: v,
                    range: "[0, ∞)",
                });
            }
        }
        Ok(())
    }

    pub fn opt_options(&self) -> OptOptions {
        OptOptions {
            grad_tol: self.tolerances.grad_inf,
            rel_tol: self.tolerances.rel_change,
            max_iters: self.tolerances.max_iters,
            ..OptOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_hardware_defaults() {
        let cfg = Config::from_toml("").unwrap();
        assert_eq!(cfg.noise.c_slope, 14.8e-4);
        assert_eq!(cfg.noise.c_offset, 2.7e-4);
        assert_eq!(cfg.noise.eps_mem, 8e-5);
        assert_eq!(cfg.tolerances.max_iters, 10_000);
        assert_eq!(cfg.seeds.default, None);
    }

    #[test]
    fn partial_override() {
        let cfg = Config::from_toml("[noise]\neps_mem = 0.0\n[seeds]\ndefault = 3\n").unwrap();
        assert_eq!(cfg.noise.eps_mem, 0.0);
        assert_eq!(cfg.noise.c_slope, 14.8e-4);
        assert_eq!(cfg.seeds.default, Some(3));
    }

    #[test]
    fn rejects_negative_and_unknown() {
        assert!(Config::from_toml("[noise]\nc_slope = -1.0\n").is_err());
        assert!(Config::from_toml("[noise]\nslope = 1.0\n").is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = Config::default();
        assert_eq!(Config::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
