//! Two independent 1-DoF fingers closing on a fixed rigid object.
//!
//! Each finger obeys `m x'' = u + f_c`. Contact is unilateral: while a contact
//! is active its force is solved from Baumgarte-stabilized constraint dynamics
//! `C'' + 2a C' + b^2 C = 0`, and the contact is dropped as soon as the solved
//! force would pull the finger toward the object.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::ode::rk4_step;
use crate::sensor::{gap_distance, gap_rate, Finger, ObjectGeometry};

/// Constraint stabilization gains, 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsmGains {
    pub a: f64,
    pub b: f64,
}

impl CsmGains {
    /// Critically damped gains at `1 / (2 dt)`, stiff enough that an impact
    /// at desk-scale speeds penetrates less than 0.1 mm.
    pub fn for_step(dt: f64) -> Self {
        let g = 0.5 / dt;
        Self { a: g, b: g }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantConfig {
    /// Mass of each finger, kg.
    pub mass: f64,
    /// Initial finger positions, m.
    pub x_init: [f64; 2],
    pub object: ObjectGeometry,
    /// Unset means [`CsmGains::for_step`] of `dt`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csm: Option<CsmGains>,
    /// Integration and control step, s.
    pub dt: f64,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            mass: 0.5,
            x_init: [0.11, -0.11],
            object: ObjectGeometry {
                center: 0.03,
                width: 0.07,
            },
            csm: None,
            dt: 1e-4,
        }
    }
}

impl PlantConfig {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.mass > 0.0) {
            out.push(format!(
                "plant.mass: finger mass must be positive, got {}",
                self.mass
            ));
        }
        if !(self.object.width > 0.0) {
            out.push(format!(
                "plant.object.width: W must be positive, got {}",
                self.object.width
            ));
        }
        if !self.object.center.is_finite() {
            out.push("plant.object.center: must be finite".to_string());
        }
        let face1 = self.object.face(Finger::One);
        let face2 = self.object.face(Finger::Two);
        if !(self.x_init[0] > face1) {
            out.push(format!(
                "plant.x_init: finger 1 must start outside the object (x_init[0] = {} <= x_m + W/2 = {face1})",
                self.x_init[0]
            ));
        }
        if !(self.x_init[1] < face2) {
            out.push(format!(
                "plant.x_init: finger 2 must start outside the object (x_init[1] = {} >= x_m - W/2 = {face2})",
                self.x_init[1]
            ));
        }
        if !(self.dt > 0.0) {
            out.push(format!("plant.dt: step must be positive, got {}", self.dt));
        }
        if let Some(g) = self.csm {
            for (key, v) in [("a", g.a), ("b", g.b)] {
                if !(v > 0.0) {
                    out.push(format!("plant.csm.{key}: must be positive, got {v}"));
                } else if self.dt > 0.0 && v * self.dt > CSM_STEP_LIMIT {
                    out.push(format!(
                        "plant.csm.{key}: gain times dt must not exceed {CSM_STEP_LIMIT} for a stable step, got {}",
                        v * self.dt
                    ));
                }
            }
        }
        out
    }

    pub fn csm_gains(&self) -> CsmGains {
        self.csm.unwrap_or_else(|| CsmGains::for_step(self.dt))
    }

    /// Copy with the contact gains written out explicitly.
    pub fn resolved(&self) -> Self {
        Self {
            csm: Some(self.csm_gains()),
            ..*self
        }
    }
}

/// Largest stabilization gain times step accepted by validation.
pub const CSM_STEP_LIMIT: f64 = 2.0;

/// Active contacts and their forces along x. Finger 1 is pushed toward +x,
/// finger 2 toward -x.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ContactState {
    pub active: [bool; 2],
    pub lambda: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    pub step: u64,
    pub t: f64,
    pub x: [f64; 2],
    pub v: [f64; 2],
    pub contact: ContactState,
}

impl SimState {
    pub fn initial(cfg: &PlantConfig) -> Self {
        Self {
            step: 0,
            t: 0.0,
            x: cfg.x_init,
            v: [0.0; 2],
            contact: ContactState::default(),
        }
    }

    /// Constraint values; negative means penetration.
    pub fn constraints(&self, object: &ObjectGeometry) -> [f64; 2] {
        Finger::BOTH.map(|f| gap_distance(self.x[f.index()], f, object))
    }
}

/// Constraint force along the contact normal that enforces the stabilized
/// error dynamics for a unit-Jacobian constraint. `u_normal` is the actuation
/// projected on the normal. Positive pushes the finger out of the object.
pub fn csm_constraint_force(c: f64, c_dot: f64, u_normal: f64, mass: f64, gains: &CsmGains) -> f64 {
    mass * (-2.0 * gains.a * c_dot - gains.b * gains.b * c) - u_normal
}

/// Contact force on `finger` along x for an active contact.
pub fn csm_contact_force(
    finger: Finger,
    x: f64,
    x_dot: f64,
    u: f64,
    mass: f64,
    object: &ObjectGeometry,
    gains: &CsmGains,
) -> f64 {
    let n = finger.normal();
    let c = gap_distance(x, finger, object);
    let c_dot = gap_rate(x_dot, finger);
    n * csm_constraint_force(c, c_dot, n * u, mass, gains)
}

/// Resolves the active set for the coming step given the actuation `u`.
///
/// A contact activates once its constraint reaches zero and stays active
/// while the solved force is non-adhesive.
pub fn update_contact_set(sim: &SimState, u: [f64; 2], cfg: &PlantConfig) -> ContactState {
    let gains = cfg.csm_gains();
    let mut out = ContactState::default();
    for f in Finger::BOTH {
        let j = f.index();
        let c = gap_distance(sim.x[j], f, &cfg.object);
        let was_active = sim.contact.active[j];
        if !was_active && c > 0.0 {
            continue;
        }
        let lambda_n = csm_constraint_force(
            c,
            gap_rate(sim.v[j], f),
            f.normal() * u[j],
            cfg.mass,
            &gains,
        );
        if lambda_n >= 0.0 {
            out.active[j] = true;
            out.lambda[j] = f.normal() * lambda_n;
        }
    }
    out
}

/// Advances the fingers one RK4 step with `u` held and the active set in
/// `sim.contact` frozen. The object never moves.
pub fn step(sim: &SimState, u: [f64; 2], cfg: &PlantConfig) -> Result<SimState> {
    let active = sim.contact.active;
    let gains = cfg.csm_gains();
    let accel = |s: &[f64; 4]| -> [f64; 4] {
        let mut out = [s[2], s[3], 0.0, 0.0];
        for f in Finger::BOTH {
            let j = f.index();
            let f_c = if active[j] {
                csm_contact_force(f, s[j], s[2 + j], u[j], cfg.mass, &cfg.object, &gains)
            } else {
                0.0
            };
            out[2 + j] = (u[j] + f_c) / cfg.mass;
        }
        out
    };
    let [x1, x2, v1, v2] = rk4_step([sim.x[0], sim.x[1], sim.v[0], sim.v[1]], cfg.dt, accel);
    let next_step = sim.step + 1;
    let next = SimState {
        step: next_step,
        t: next_step as f64 * cfg.dt,
        x: [x1, x2],
        v: [v1, v2],
        contact: sim.contact,
    };
    if let Some(bad) = [x1, x2, v1, v2].iter().position(|v| !v.is_finite()) {
        let names = ["x1", "x2", "v1", "v2"];
        return Err(SimError::Divergence {
            step: next_step,
            time: next.t,
            detail: format!("{} became non-finite", names[bad]),
        });
    }
    Ok(next)
}
