//! Configuration files: TOML tables (or dotted keys) for every model
//! parameter. Command-line flags are applied on top afterwards.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{AlleePredationModel, DriverOrbit, PeriodicModel};
use crate::transition::TransitionConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriverSection {
    pub t_ref: f64,
    pub omega_ref: f64,
}

impl Default for DriverSection {
    fn default() -> Self {
        let d = DriverOrbit::default();
        Self {
            t_ref: d.t_ref,
            omega_ref: d.omega_ref,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeriodicSection {
    pub d: f64,
    pub g_minus: f64,
    pub g_plus: f64,
    pub lambda: f64,
}

impl Default for PeriodicSection {
    fn default() -> Self {
        Self {
            d: 0.1,
            g_minus: 0.005,
            g_plus: 0.005,
            lambda: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransitionSection {
    pub rho: f64,
    pub t_past: f64,
    pub burn_in: f64,
    pub tol: f64,
    pub h_max: f64,
}

impl Default for TransitionSection {
    fn default() -> Self {
        let c = TransitionConfig::default();
        Self {
            rho: 0.0,
            t_past: c.t_past,
            burn_in: c.burn_in,
            tol: c.integrator.rel_tol,
            h_max: c.integrator.h_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSection {
    pub window: [f64; 2],
    pub n_scan: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            window: [-30.0, 30.0],
            n_scan: 200,
        }
    }
}

/// Everything a configuration file may set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: AlleePredationModel,
    pub driver: DriverSection,
    pub periodic: PeriodicSection,
    pub transition: TransitionSection,
    pub scan: ScanSection,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn driver(&self) -> Result<DriverOrbit> {
        DriverOrbit::new(self.driver.t_ref, self.driver.omega_ref)
    }

    pub fn periodic_model(&self) -> PeriodicModel {
        let p = &self.periodic;
        PeriodicModel::new(p.d, p.g_minus, p.g_plus).with_lambda(p.lambda)
    }

    pub fn transition_config(&self) -> TransitionConfig {
        let t = &self.transition;
        let mut cfg = TransitionConfig {
            t_past: t.t_past,
            burn_in: t.burn_in,
            ..TransitionConfig::default()
        };
        cfg.integrator = cfg.integrator.with_tolerances(t.tol, t.tol).with_h_max(t.h_max);
        cfg
    }
}
