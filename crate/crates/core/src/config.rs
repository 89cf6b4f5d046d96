//! Scenario configuration file.
//!
//! TOML with one table per subsystem. Every key is optional and falls back to
//! the reference parameter set; unknown keys are rejected by name.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::controller::{ControlCase, ControllerParams, VirtualInit};
use crate::error::{Result, SimError};
use crate::plant::PlantConfig;
use crate::sensor::{SensorParams, SurfaceReflectance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSettings {
    pub case: ControlCase,
    /// Reflectance ratio of the face seen by finger 1.
    pub alpha1: f64,
    /// Reflectance ratio of the face seen by finger 2.
    pub alpha2: f64,
    /// Simulated duration, s.
    pub t_end: f64,
    pub virtual_init: VirtualInit,
    /// Time a contact must persist before it counts as first contact, s.
    pub contact_dwell: f64,
    /// Trailing window averaged for steady-state quantities, s.
    pub steady_window: f64,
}

impl Default for ScenarioSettings {
    fn default() -> Self {
        Self {
            case: ControlCase::Case2,
            alpha1: 1.0,
            alpha2: 1.0,
            t_end: 6.0,
            virtual_init: VirtualInit::default(),
            contact_dwell: 0.01,
            steady_window: 0.5,
        }
    }
}

/// Full effective parameter set for one closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub sensor: SensorParams,
    pub controller: ControllerParams,
    pub plant: PlantConfig,
    pub scenario: ScenarioSettings,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text)
            .map_err(|e| SimError::InvalidConfig(vec![e.message().trim().to_string()]))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn reflectance(&self) -> SurfaceReflectance {
        SurfaceReflectance::new(self.scenario.alpha1, self.scenario.alpha2)
    }

    pub fn set_reflectance(&mut self, alpha: SurfaceReflectance) {
        self.scenario.alpha1 = alpha.alpha_rel_1;
        self.scenario.alpha2 = alpha.alpha_rel_2;
    }

    pub fn with_case(mut self, case: ControlCase) -> Self {
        self.scenario.case = case;
        self
    }

    pub fn with_object_center(mut self, x_m: f64) -> Self {
        self.plant.object.center = x_m;
        self
    }

    pub fn with_reflectance(mut self, alpha: SurfaceReflectance) -> Self {
        self.set_reflectance(alpha);
        self
    }

    /// Number of control steps in a run.
    pub fn steps(&self) -> u64 {
        (self.scenario.t_end / self.plant.dt).round() as u64
    }

    /// Every violated invariant, one message per violation.
    pub fn violations(&self) -> Vec<String> {
        let mut out = self.sensor.violations();
        out.extend(self.controller.violations());
        out.extend(self.plant.violations());
        out.extend(self.reflectance().violations());
        let s = &self.scenario;
        if !(s.t_end > 0.0) {
            out.push(format!("scenario.t_end: must be positive, got {}", s.t_end));
        } else if self.plant.dt > 0.0 && s.t_end < self.plant.dt {
            out.push(format!(
                "scenario.t_end: shorter than one step ({} < dt = {})",
                s.t_end, self.plant.dt
            ));
        }
        if !(s.contact_dwell >= 0.0) {
            out.push(format!(
                "scenario.contact_dwell: must be non-negative, got {}",
                s.contact_dwell
            ));
        }
        if !(s.steady_window > 0.0 && s.steady_window <= s.t_end) {
            out.push(format!(
                "scenario.steady_window: must lie in (0, t_end], got {}",
                s.steady_window
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(SimError::InvalidConfig(v))
        }
    }

    /// SHA-256 of the canonical TOML rendering, hex encoded.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ScenarioConfig::from_toml("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert!(cfg.violations().is_empty());
        assert_eq!(cfg.steps(), 60_000);
    }

    #[test]
    fn partial_tables_merge_with_defaults() {
        let cfg = ScenarioConfig::from_toml(
            "[scenario]\ncase = 1\nalpha1 = 0.86\n[plant.object]\ncenter = 0.0\nwidth = 0.07\n",
        )
        .unwrap();
        assert_eq!(cfg.scenario.case, ControlCase::Case1);
        assert_eq!(cfg.scenario.alpha1, 0.86);
        assert_eq!(cfg.plant.object.center, 0.0);
        assert_eq!(cfg.plant.mass, 0.5);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ScenarioConfig::from_toml("[plant]\nmas = 0.5\n").unwrap_err();
        assert!(err.to_string().contains("mas"), "{err}");
    }

    #[test]
    fn bad_case_is_rejected() {
        assert!(ScenarioConfig::from_toml("[scenario]\ncase = 5\n").is_err());
    }

    #[test]
    fn canonical_rendering_round_trips() {
        let mut cfg = ScenarioConfig::default();
        cfg.scenario.virtual_init = VirtualInit::GripCenter;
        cfg.plant.dt = 2.5e-4;
        let again = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.fingerprint(), cfg.fingerprint());
    }

    #[test]
    fn every_violation_listed() {
        let mut cfg = ScenarioConfig::default();
        cfg.plant.object.width = 0.0;
        cfg.sensor.k_gain = -1.0;
        cfg.scenario.t_end = 0.0;
        let v = cfg.violations();
        assert!(v.len() >= 3, "{v:?}");
        assert!(v.iter().any(|m| m.contains("W must be positive")));
    }
}
