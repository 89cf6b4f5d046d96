//! Closed-loop runs: sensors, controller and plant stepped at one fixed rate,
//! plus the contact and steady-state metrics extracted from each run.

use crate::config::ScenarioConfig;
use crate::controller::{controller_step, ControlCase, VirtualState};
use crate::error::{Result, SimError};
use crate::plant::{self, update_contact_set, SimState};
use crate::sensor::{read_sensors, SurfaceReflectance};

/// One row of the time series, taken at the start of a control step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sample {
    pub t: f64,
    pub x: [f64; 2],
    pub v: [f64; 2],
    pub u: [f64; 2],
    pub f_c: [f64; 2],
    pub xi: [f64; 2],
    pub f_s: f64,
    pub f_p: [f64; 2],
    /// Target handed to the impact-reduction layer: the layer-3 virtual
    /// object in Case 2, the gripper center otherwise.
    pub x_v2: f64,
    /// Targets handed to the impedance layer.
    pub x_v1: [f64; 2],
}

impl Sample {
    pub const COLUMNS: [&'static str; 17] = [
        "t", "x1", "x2", "v1", "v2", "u1", "u2", "fc1", "fc2", "xi1", "xi2", "fs", "fp1", "fp2",
        "xv2", "xv1_1", "xv1_2",
    ];

    pub fn values(&self) -> [f64; 17] {
        [
            self.t,
            self.x[0],
            self.x[1],
            self.v[0],
            self.v[1],
            self.u[0],
            self.u[1],
            self.f_c[0],
            self.f_c[1],
            self.xi[0],
            self.xi[1],
            self.f_s,
            self.f_p[0],
            self.f_p[1],
            self.x_v2,
            self.x_v1[0],
            self.x_v1[1],
        ]
    }
}

/// Contact transition on one finger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactEvent {
    pub finger: usize,
    pub t: f64,
    pub activated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub case: ControlCase,
    pub x_m: f64,
    pub alpha: SurfaceReflectance,
    /// First contact per finger that persisted for the dwell time.
    pub t_contact: [Option<f64>; 2],
    pub dt_contact: Option<f64>,
    /// Finger speed at the first contact activation, before any rebound.
    pub v_impact: [Option<f64>; 2],
    /// Largest contact-force magnitude over the run.
    pub peak_force: [f64; 2],
    /// Steady value of the layer-3 target (gripper center in Cases 0 and 1).
    pub x_v2_final: f64,
    /// Largest value of the same target over the run.
    pub x_v2_max: f64,
    /// Steady gripper center.
    pub x_d_final: f64,
    /// Steady contact-force magnitude per finger.
    pub f_c_final: [f64; 2],
    /// Deepest penetration seen on either finger, m (0 if none).
    pub max_penetration: f64,
    /// Steady window spread stayed within 1e-6 relative.
    pub converged: bool,
    pub events: Vec<ContactEvent>,
    /// Full time series; empty when the run was not recorded.
    pub series: Vec<Sample>,
}

impl ScenarioReport {
    /// Offset of the steady target from the steady gripper center.
    pub fn target_offset(&self) -> f64 {
        self.x_v2_final - self.x_d_final
    }
}

/// First activation that stays active for the dwell time.
#[derive(Debug, Clone, Copy, Default)]
struct ContactTracker {
    pending: Option<f64>,
    confirmed: Option<f64>,
}

impl ContactTracker {
    fn observe(&mut self, active: bool, t: f64, dwell: f64, dt: f64) {
        if self.confirmed.is_some() {
            return;
        }
        if !active {
            self.pending = None;
            return;
        }
        let t0 = *self.pending.get_or_insert(t);
        if t - t0 >= dwell - 0.5 * dt {
            self.confirmed = Some(t0);
        }
    }

    fn finish(&mut self) {
        if self.confirmed.is_none() {
            self.confirmed = self.pending;
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct WindowStats {
    count: u64,
    sum: f64,
    min: f64,
    max: f64,
}

impl Default for WindowStats {
    fn default() -> Self {
        Self {
            count: 0,
            sum: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl WindowStats {
    fn push(&mut self, v: f64) {
        self.count += 1;
        self.sum += v;
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    fn settled(&self) -> bool {
        self.max - self.min <= 1e-6 * self.mean().abs() + 1e-12
    }
}

/// Runs the closed loop and records the full time series.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    let mut series = Vec::with_capacity(cfg.steps() as usize);
    let mut report = run_scenario_streaming(cfg, |s| series.push(*s))?;
    report.series = series;
    Ok(report)
}

/// Runs the closed loop, handing every sample to `sink` instead of storing it.
pub fn run_scenario_streaming<F>(cfg: &ScenarioConfig, mut sink: F) -> Result<ScenarioReport>
where
    F: FnMut(&Sample),
{
    cfg.validate()?;
    let case = cfg.scenario.case;
    let plant_cfg = &cfg.plant;
    let object = plant_cfg.object;
    let alpha = cfg.reflectance();
    let dt = plant_cfg.dt;
    let steps = cfg.steps();
    let window_start = cfg.scenario.t_end - cfg.scenario.steady_window;

    let mut sim = SimState::initial(plant_cfg);
    let mut vs = VirtualState::initial(sim.x, cfg.scenario.virtual_init);

    let mut trackers = [ContactTracker::default(); 2];
    let mut v_impact = [None; 2];
    let mut events = Vec::new();
    let mut peak_force = [0.0f64; 2];
    let mut target_max = f64::NEG_INFINITY;
    let mut max_penetration = 0.0f64;
    let mut steady_target = WindowStats::default();
    let mut steady_center = WindowStats::default();
    let mut steady_force = [WindowStats::default(); 2];

    for k in 0..steps {
        let t = k as f64 * dt;
        let reading = read_sensors(sim.x, sim.v, &object, &alpha, &cfg.sensor);
        let out = controller_step(case, &reading, sim.x, sim.v, &vs, &cfg.controller, dt);
        let previous = sim.contact.active;
        sim.contact = update_contact_set(&sim, out.u, plant_cfg);

        let (x_v2, x_v1) = match case {
            ControlCase::Case0 => (out.x_d, [out.x_d; 2]),
            ControlCase::Case1 => (out.x_d, [vs.layer2[0].pos, vs.layer2[1].pos]),
            ControlCase::Case2 => (vs.layer3.pos, [vs.layer2[0].pos, vs.layer2[1].pos]),
        };
        let sample = Sample {
            t,
            x: sim.x,
            v: sim.v,
            u: out.u,
            f_c: sim.contact.lambda,
            xi: reading.xi,
            f_s: out.f_s,
            f_p: out.f_p,
            x_v2,
            x_v1,
        };
        sink(&sample);

        target_max = target_max.max(x_v2);
        for (j, c) in sim.constraints(&object).into_iter().enumerate() {
            max_penetration = max_penetration.max(-c);
            let active = sim.contact.active[j];
            if active && !previous[j] && v_impact[j].is_none() {
                v_impact[j] = Some(sim.v[j].abs());
            }
            if active != previous[j] {
                events.push(ContactEvent {
                    finger: j + 1,
                    t,
                    activated: active,
                });
            }
            trackers[j].observe(active, t, cfg.scenario.contact_dwell, dt);
            peak_force[j] = peak_force[j].max(sim.contact.lambda[j].abs());
        }
        if t >= window_start {
            steady_target.push(x_v2);
            steady_center.push(out.x_d);
            for (stats, lambda) in steady_force.iter_mut().zip(sim.contact.lambda) {
                stats.push(lambda.abs());
            }
        }

        sim = plant::step(&sim, out.u, plant_cfg)?;
        vs = out.next;
        if !vs.is_finite() {
            return Err(SimError::Divergence {
                step: sim.step,
                time: sim.t,
                detail: "virtual state became non-finite".to_string(),
            });
        }
    }

    for tr in &mut trackers {
        tr.finish();
    }
    let t_contact = trackers.map(|tr| tr.confirmed);
    let dt_contact = match t_contact {
        [Some(a), Some(b)] => Some((a - b).abs()),
        _ => None,
    };
    let converged = steady_target.settled()
        && steady_center.settled()
        && steady_force.iter().all(WindowStats::settled);

    Ok(ScenarioReport {
        case,
        x_m: object.center,
        alpha,
        t_contact,
        dt_contact,
        v_impact,
        peak_force,
        x_v2_final: steady_target.mean(),
        x_v2_max: target_max,
        x_d_final: steady_center.mean(),
        f_c_final: steady_force.map(|s| s.mean()),
        max_penetration,
        converged,
        events,
        series: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(case: ControlCase, x_m: f64) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default()
            .with_case(case)
            .with_object_center(x_m);
        cfg.plant.dt = 5e-4;
        cfg
    }

    #[test]
    fn rejects_invalid_config() {
        let mut cfg = ScenarioConfig::default();
        cfg.plant.object.width = -1.0;
        assert!(matches!(
            run_scenario(&cfg),
            Err(SimError::InvalidConfig(_))
        ));
    }

    #[test]
    fn series_has_one_row_per_step() {
        let mut cfg = short(ControlCase::Case2, 0.03);
        cfg.scenario.t_end = 0.5;
        let r = run_scenario(&cfg).unwrap();
        assert_eq!(r.series.len() as u64, cfg.steps());
        assert_eq!(r.series[0].t, 0.0);
        assert_eq!(r.series[0].x, cfg.plant.x_init);
        // Too short for contact.
        assert_eq!(r.t_contact, [None, None]);
        assert_eq!(r.dt_contact, None);
    }

    #[test]
    fn contact_events_are_recorded() {
        let r = run_scenario(&short(ControlCase::Case1, 0.03)).unwrap();
        let first: Vec<_> = r
            .events
            .iter()
            .filter(|e| e.activated)
            .map(|e| e.finger)
            .collect();
        assert!(first.contains(&1) && first.contains(&2));
        let t1 = r.t_contact[0].unwrap();
        let t2 = r.t_contact[1].unwrap();
        assert!(t1 < t2);
        assert_eq!(r.dt_contact, Some(t2 - t1));
        assert!(r.peak_force[0] >= r.f_c_final[0] && r.f_c_final[0] >= 0.0);
    }

    #[test]
    fn dwell_filter_skips_short_touches() {
        let mut tr = ContactTracker::default();
        let dt = 1e-3;
        tr.observe(true, 0.100, 0.01, dt);
        tr.observe(true, 0.101, 0.01, dt);
        tr.observe(false, 0.102, 0.01, dt);
        for k in 0..20 {
            tr.observe(true, 0.2 + k as f64 * dt, 0.01, dt);
        }
        assert_eq!(tr.confirmed, Some(0.2));
    }
}
