//! Three-layer multiple impedance controller.
//!
//! From the top: an admittance layer that shifts the grasp target toward
//! simultaneous contact, an admittance layer per finger that turns the
//! proximity rate into a virtual viscous force for impact reduction, and an
//! impedance layer that renders damping and stiffness between each finger and
//! its virtual object. Each layer's virtual object is the next layer's
//! reference, so approach, impact and grasp all run through one control law.

use serde::{Deserialize, Serialize};

use crate::ode::rk4_step_timed;
use crate::sensor::SensorReading;

/// Ratio denominators below this value are treated as "no object in range".
pub const XI_EPSILON: f64 = 1e-6;

/// Which layers are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ControlCase {
    /// Impedance layer only, tracking the gripper center.
    Case0,
    /// Impact reduction plus impedance, tracking the gripper center.
    Case1,
    /// All three layers.
    Case2,
}

impl ControlCase {
    pub const ALL: [ControlCase; 3] = [ControlCase::Case0, ControlCase::Case1, ControlCase::Case2];

    pub fn number(self) -> u8 {
        match self {
            ControlCase::Case0 => 0,
            ControlCase::Case1 => 1,
            ControlCase::Case2 => 2,
        }
    }
}

impl TryFrom<u8> for ControlCase {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            0 => Ok(ControlCase::Case0),
            1 => Ok(ControlCase::Case1),
            2 => Ok(ControlCase::Case2),
            other => Err(format!("control case must be 0, 1 or 2, got {other}")),
        }
    }
}

impl From<ControlCase> for u8 {
    fn from(c: ControlCase) -> u8 {
        c.number()
    }
}

impl std::fmt::Display for ControlCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Case {}", self.number())
    }
}

/// Simultaneous contact layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Layer3Params {
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
    /// Gain of the simultaneous-contact virtual force, N.
    pub k_s: f64,
}

/// Impact reduction layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Layer2Params {
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
    /// Virtual viscosity for finger 1, N·s.
    pub d_p1: f64,
    /// Virtual viscosity for finger 2, N·s. Opposite sign to `d_p1`.
    pub d_p2: f64,
}

/// Contact force layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Layer1Params {
    pub damping: f64,
    pub stiffness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerParams {
    pub layer3: Layer3Params,
    pub layer2: Layer2Params,
    pub layer1: Layer1Params,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            layer3: Layer3Params {
                mass: 1.0,
                damping: 12.0,
                stiffness: 36.0,
                k_s: 3.0,
            },
            layer2: Layer2Params {
                mass: 1.0,
                damping: 10.0,
                stiffness: 25.0,
                d_p1: 0.6,
                d_p2: -0.6,
            },
            layer1: Layer1Params {
                damping: 14.0,
                stiffness: 98.0,
            },
        }
    }
}

impl Default for Layer3Params {
    fn default() -> Self {
        ControllerParams::default().layer3
    }
}

impl Default for Layer2Params {
    fn default() -> Self {
        ControllerParams::default().layer2
    }
}

impl Default for Layer1Params {
    fn default() -> Self {
        ControllerParams::default().layer1
    }
}

impl ControllerParams {
    pub fn d_p(&self) -> [f64; 2] {
        [self.layer2.d_p1, self.layer2.d_p2]
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut positive = |key: &str, v: f64| {
            if !(v > 0.0) {
                out.push(format!("controller.{key}: must be positive, got {v}"));
            }
        };
        positive("layer3.mass", self.layer3.mass);
        positive("layer2.mass", self.layer2.mass);
        let non_negative = [
            ("layer3.damping", self.layer3.damping),
            ("layer3.stiffness", self.layer3.stiffness),
            ("layer3.k_s", self.layer3.k_s),
            ("layer2.damping", self.layer2.damping),
            ("layer2.stiffness", self.layer2.stiffness),
            ("layer1.damping", self.layer1.damping),
            ("layer1.stiffness", self.layer1.stiffness),
        ];
        for (key, v) in non_negative {
            if !(v >= 0.0) {
                out.push(format!("controller.{key}: must be non-negative, got {v}"));
            }
        }
        if !(self.layer2.d_p1 >= 0.0) {
            out.push(format!(
                "controller.layer2.d_p1: must be non-negative so the virtual force opposes closing, got {}",
                self.layer2.d_p1
            ));
        }
        if self.layer2.d_p1 != -self.layer2.d_p2 {
            out.push(format!(
                "controller.layer2.d_p2: must equal -d_p1 ({}), got {}",
                -self.layer2.d_p1, self.layer2.d_p2
            ));
        }
        out
    }
}

/// How the layer-2 virtual objects start. Layer 3 always starts at rest on
/// the gripper center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VirtualInit {
    /// Each finger's virtual object starts at rest on that finger.
    #[default]
    FingerStart,
    /// Both start at rest on the gripper center.
    GripCenter,
}

/// Position, velocity and acceleration handed down to the next layer.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Reference {
    pub pos: f64,
    pub vel: f64,
    pub acc: f64,
}

impl Reference {
    pub fn at_rest(pos: f64) -> Self {
        Self {
            pos,
            vel: 0.0,
            acc: 0.0,
        }
    }

    /// Reference extrapolated `tau` seconds into the step at constant acceleration.
    fn advanced(&self, tau: f64) -> Self {
        Self {
            pos: self.pos + self.vel * tau + 0.5 * self.acc * tau * tau,
            vel: self.vel + self.acc * tau,
            acc: self.acc,
        }
    }
}

/// Position and velocity of one virtual object.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VirtualBody {
    pub pos: f64,
    pub vel: f64,
}

impl VirtualBody {
    pub fn at_rest(pos: f64) -> Self {
        Self { pos, vel: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.pos.is_finite() && self.vel.is_finite()
    }
}

/// State of every virtual object in the cascade.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VirtualState {
    /// Layer-3 object shared by both fingers.
    pub layer3: VirtualBody,
    /// Layer-2 object per finger.
    pub layer2: [VirtualBody; 2],
}

impl VirtualState {
    pub fn initial(x: [f64; 2], init: VirtualInit) -> Self {
        let center = trajectory_planner(x[0], x[1]).pos;
        let layer2 = match init {
            VirtualInit::FingerStart => [VirtualBody::at_rest(x[0]), VirtualBody::at_rest(x[1])],
            VirtualInit::GripCenter => [VirtualBody::at_rest(center); 2],
        };
        Self {
            layer3: VirtualBody::at_rest(center),
            layer2,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layer3.is_finite() && self.layer2.iter().all(VirtualBody::is_finite)
    }
}

/// Target at the geometric center of the fingers. The feedforward terms are
/// zero even though the center moves.
pub fn trajectory_planner(x1: f64, x2: f64) -> Reference {
    Reference::at_rest(0.5 * (x1 + x2))
}

/// Virtual force pushing the shared target toward the finger that reads the
/// stronger signal, i.e. the one closer to the object.
pub fn virtual_force_simultaneous(xi1: f64, xi2: f64, k_s: f64) -> f64 {
    let sum = xi1 + xi2;
    if sum < XI_EPSILON {
        return 0.0;
    }
    k_s * ((xi1 - xi2) / sum).tanh()
}

/// Virtual viscous force from the relative rate of a proximity reading.
pub fn virtual_force_proximity(xi: f64, xi_dot: f64, d_p: f64) -> f64 {
    if xi < XI_EPSILON {
        return 0.0;
    }
    d_p * xi_dot / xi
}

/// Integrates `M (a - r.acc) + D (v - r.vel) + K (x - r.pos) = force` over one
/// step with `force` held and the reference advancing at constant acceleration.
/// Returns the new body and the acceleration at the start of the step.
fn step_admittance(
    body: VirtualBody,
    force: f64,
    reference: Reference,
    mass: f64,
    damping: f64,
    stiffness: f64,
    dt: f64,
) -> (VirtualBody, f64) {
    let accel = |b: [f64; 2], r: Reference| {
        r.acc + (force - damping * (b[1] - r.vel) - stiffness * (b[0] - r.pos)) / mass
    };
    let start_acc = accel([body.pos, body.vel], reference);
    let [pos, vel] = rk4_step_timed([body.pos, body.vel], dt, |tau, s| {
        [s[1], accel(*s, reference.advanced(tau))]
    });
    (VirtualBody { pos, vel }, start_acc)
}

/// Advances the simultaneous-contact virtual object one step.
/// Returns the new state and its acceleration at the start of the step.
pub fn step_layer3(
    body: VirtualBody,
    f_s: f64,
    target: Reference,
    p: &Layer3Params,
    dt: f64,
) -> (VirtualBody, f64) {
    step_admittance(body, f_s, target, p.mass, p.damping, p.stiffness, dt)
}

/// Advances both impact-reduction virtual objects one step toward `reference`
/// (the layer-3 object in Case 2, the gripper center in Case 1).
pub fn step_layer2(
    bodies: [VirtualBody; 2],
    f_p: [f64; 2],
    reference: Reference,
    p: &Layer2Params,
    dt: f64,
) -> [VirtualBody; 2] {
    let step = |j: usize| {
        step_admittance(
            bodies[j],
            f_p[j],
            reference,
            p.mass,
            p.damping,
            p.stiffness,
            dt,
        )
        .0
    };
    [step(0), step(1)]
}

/// Actuation force from the impedance layer. No inertia shaping: the finger
/// mass is left as is.
pub fn impedance_input(x: f64, x_dot: f64, x_ref: f64, x_ref_dot: f64, p: &Layer1Params) -> f64 {
    -p.damping * (x_dot - x_ref_dot) - p.stiffness * (x - x_ref)
}

/// Everything the controller computed in one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub u: [f64; 2],
    pub f_s: f64,
    pub f_p: [f64; 2],
    /// Gripper center at the start of the step.
    pub x_d: f64,
    /// Virtual state for the next step.
    pub next: VirtualState,
}

/// One control tick. Layers unused by `case` keep their state frozen.
pub fn controller_step(
    case: ControlCase,
    reading: &SensorReading,
    x: [f64; 2],
    v: [f64; 2],
    vs: &VirtualState,
    p: &ControllerParams,
    dt: f64,
) -> ControlOutput {
    let target = trajectory_planner(x[0], x[1]);
    let mut next = *vs;
    let mut f_s = 0.0;
    let mut f_p = [0.0; 2];

    let layer1_ref: [Reference; 2] = match case {
        ControlCase::Case0 => [target; 2],
        ControlCase::Case1 | ControlCase::Case2 => {
            let layer2_ref = if case == ControlCase::Case2 {
                f_s = virtual_force_simultaneous(reading.xi[0], reading.xi[1], p.layer3.k_s);
                let (body, acc) = step_layer3(vs.layer3, f_s, target, &p.layer3, dt);
                next.layer3 = body;
                Reference {
                    pos: vs.layer3.pos,
                    vel: vs.layer3.vel,
                    acc,
                }
            } else {
                target
            };
            let d_p = p.d_p();
            for j in 0..2 {
                f_p[j] = virtual_force_proximity(reading.xi[j], reading.xi_dot[j], d_p[j]);
            }
            next.layer2 = step_layer2(vs.layer2, f_p, layer2_ref, &p.layer2, dt);
            [0, 1].map(|j| Reference {
                pos: vs.layer2[j].pos,
                vel: vs.layer2[j].vel,
                acc: 0.0,
            })
        }
    };

    let u = [0, 1]
        .map(|j| impedance_input(x[j], v[j], layer1_ref[j].pos, layer1_ref[j].vel, &p.layer1));

    ControlOutput {
        u,
        f_s,
        f_p,
        x_d: target.pos,
        next,
    }
}
