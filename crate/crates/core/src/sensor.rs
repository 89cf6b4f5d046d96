//! Reflected-light-intensity proximity sensor model.
//!
//! The output follows an inverse power law of the sensor-to-surface gap and
//! scales linearly with the surface reflectance. Gaps are clamped at zero so
//! the sensor saturates while the contact solver allows micro-penetration.

use serde::{Deserialize, Serialize};

/// Which finger a quantity belongs to. Finger 1 sits on the +x side of the
/// object, finger 2 on the -x side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Finger {
    One,
    Two,
}

impl Finger {
    pub const BOTH: [Finger; 2] = [Finger::One, Finger::Two];

    pub fn index(self) -> usize {
        match self {
            Finger::One => 0,
            Finger::Two => 1,
        }
    }

    /// Unit normal of the object face this finger approaches, along +x.
    /// Gap and constraint quantities are `normal * x - offset`.
    pub fn normal(self) -> f64 {
        match self {
            Finger::One => 1.0,
            Finger::Two => -1.0,
        }
    }
}

/// Rigid object held fixed between the fingers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectGeometry {
    /// Object center along x, meters.
    pub center: f64,
    /// Object width along x, meters.
    pub width: f64,
}

impl ObjectGeometry {
    /// Position of the face that `finger` touches.
    pub fn face(&self, finger: Finger) -> f64 {
        self.center + finger.normal() * self.width / 2.0
    }
}

/// Fitted sensor constants: `xi = k_gain * alpha / (l + l_offset)^n_diff`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorParams {
    /// Composite gain for a white surface, V·m^n.
    pub k_gain: f64,
    /// Diffusion exponent.
    pub n_diff: f64,
    /// Offset distance between the sensing element and the surface, m.
    pub l_offset: f64,
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            k_gain: 0.0024,
            n_diff: 1.1506,
            l_offset: 0.005,
        }
    }
}

impl SensorParams {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.k_gain > 0.0) {
            out.push("sensor.k_gain: K must be positive".to_string());
        }
        if !(self.n_diff > 0.0) {
            out.push("sensor.n_diff: n must be positive".to_string());
        }
        if !(self.l_offset > 0.0) {
            out.push("sensor.l_offset: l0 must be positive".to_string());
        }
        out
    }
}

/// Reflectance of the surface seen by each finger, relative to white paper.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceReflectance {
    pub alpha_rel_1: f64,
    pub alpha_rel_2: f64,
}

impl Default for SurfaceReflectance {
    fn default() -> Self {
        Self::uniform(1.0)
    }
}

impl SurfaceReflectance {
    pub fn new(alpha_rel_1: f64, alpha_rel_2: f64) -> Self {
        Self {
            alpha_rel_1,
            alpha_rel_2,
        }
    }

    pub fn uniform(alpha: f64) -> Self {
        Self::new(alpha, alpha)
    }

    pub fn get(&self, finger: Finger) -> f64 {
        match finger {
            Finger::One => self.alpha_rel_1,
            Finger::Two => self.alpha_rel_2,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (key, a) in [("alpha1", self.alpha_rel_1), ("alpha2", self.alpha_rel_2)] {
            if !(a > 0.0 && a <= 1.0) {
                out.push(format!(
                    "scenario.{key}: reflectance ratio must lie in (0, 1], got {a}"
                ));
            }
        }
        out
    }
}

/// Signed gap between the sensor on `finger` and the object face it looks at.
/// Negative while the contact solver lets the finger penetrate.
pub fn gap_distance(finger_pos: f64, finger: Finger, object: &ObjectGeometry) -> f64 {
    finger.normal() * (finger_pos - object.face(finger))
}

/// Rate of change of the gap for a finger moving at `finger_vel`.
pub fn gap_rate(finger_vel: f64, finger: Finger) -> f64 {
    finger.normal() * finger_vel
}

/// Sensor voltage at gap `l`.
pub fn sensor_output(l: f64, alpha_rel: f64, p: &SensorParams) -> f64 {
    let d = l.max(0.0) + p.l_offset;
    debug_assert!(d > 0.0);
    p.k_gain * alpha_rel / d.powf(p.n_diff)
}

/// Time derivative of [`sensor_output`] along a gap trajectory with rate `l_dot`.
///
/// While penetrating the output is saturated, so the rate is taken at the
/// clamped gap as well.
pub fn sensor_rate(l: f64, l_dot: f64, alpha_rel: f64, p: &SensorParams) -> f64 {
    let d = l.max(0.0) + p.l_offset;
    -p.n_diff * sensor_output(l, alpha_rel, p) * l_dot / d
}

/// One sensor sample for both fingers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SensorReading {
    pub xi: [f64; 2],
    pub xi_dot: [f64; 2],
}

/// Reads both sensors for finger positions `x` and velocities `v`.
pub fn read_sensors(
    x: [f64; 2],
    v: [f64; 2],
    object: &ObjectGeometry,
    alpha: &SurfaceReflectance,
    p: &SensorParams,
) -> SensorReading {
    let mut out = SensorReading::default();
    for f in Finger::BOTH {
        let j = f.index();
        let l = gap_distance(x[j], f, object);
        let l_dot = gap_rate(v[j], f);
        let a = alpha.get(f);
        out.xi[j] = sensor_output(l, a, p);
        out.xi_dot[j] = sensor_rate(l, l_dot, a, p);
    }
    out
}
