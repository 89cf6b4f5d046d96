//! Batches of independent scenario runs: object-position sweep, reflectance
//! sweep and the impact comparison across control cases.
//!
//! Cells run in parallel with the `parallel` feature; results always come back
//! in the order the cells were declared.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::controller::{ControlCase, ControllerParams};
use crate::error::SimError;
use crate::scenario::{run_scenario_streaming, ScenarioReport};
use crate::sensor::SurfaceReflectance;

/// Object centers of the position sweep, m.
pub const SWEEP_POSITIONS: [f64; 6] = [0.00, 0.01, 0.02, 0.03, 0.04, 0.05];

/// Object center used for the reflectance sweep and the impact comparison, m.
pub const REFERENCE_POSITION: f64 = 0.03;

/// Reflectance ratios of colored sheets relative to white.
pub const SURFACE_COLORS: [(&str, f64); 5] = [
    ("white", 1.00),
    ("blue", 0.93),
    ("red", 0.92),
    ("brown", 0.86),
    ("black", 0.57),
];

/// Equal pairs for every color, then brown/white in both arrangements.
pub fn reflectance_pairs() -> Vec<SurfaceReflectance> {
    let mut pairs: Vec<_> = SURFACE_COLORS
        .iter()
        .map(|&(_, a)| SurfaceReflectance::uniform(a))
        .collect();
    pairs.push(SurfaceReflectance::new(0.86, 1.00));
    pairs.push(SurfaceReflectance::new(1.00, 0.86));
    pairs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub case: ControlCase,
    pub x_m: f64,
    pub alpha: SurfaceReflectance,
    /// Static offset of the layer-3 target from the center when both
    /// fingers rest on the object.
    pub predicted_offset: f64,
    pub outcome: Result<ScenarioReport, SimError>,
}

/// Steady offset of the layer-3 target from the gripper center with both
/// fingers resting on the object faces.
pub fn predicted_static_offset(alpha: &SurfaceReflectance, p: &ControllerParams) -> f64 {
    let (a1, a2) = (alpha.alpha_rel_1, alpha.alpha_rel_2);
    p.layer3.k_s / p.layer3.stiffness * ((a1 - a2) / (a1 + a2)).tanh()
}

/// Runs every config without recording series.
pub fn run_cells(
    configs: &[ScenarioConfig],
    exec: Execution,
) -> Vec<Result<ScenarioReport, SimError>> {
    let run = |cfg: &ScenarioConfig| run_scenario_streaming(cfg, |_| {});
    match exec {
        Execution::Sequential => configs.iter().map(run).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => configs.par_iter().map(run).collect(),
    }
}

fn run_rows(configs: Vec<ScenarioConfig>, exec: Execution) -> Vec<SweepRow> {
    let outcomes = run_cells(&configs, exec);
    configs
        .into_iter()
        .zip(outcomes)
        .map(|(cfg, outcome)| SweepRow {
            case: cfg.scenario.case,
            x_m: cfg.plant.object.center,
            alpha: cfg.reflectance(),
            predicted_offset: predicted_static_offset(&cfg.reflectance(), &cfg.controller),
            outcome,
        })
        .collect()
}

/// One row per (case, object center), cases outermost.
pub fn sweep_positions(
    base: &ScenarioConfig,
    cases: &[ControlCase],
    x_m_list: &[f64],
    exec: Execution,
) -> Vec<SweepRow> {
    let configs = cases
        .iter()
        .flat_map(|&case| {
            x_m_list
                .iter()
                .map(move |&x_m| base.with_case(case).with_object_center(x_m))
        })
        .collect();
    run_rows(configs, exec)
}

/// One row per reflectance pair at the reference object position, using the
/// base config's control case.
pub fn sweep_reflectances(
    base: &ScenarioConfig,
    pairs: &[SurfaceReflectance],
    exec: Execution,
) -> Vec<SweepRow> {
    let configs = pairs
        .iter()
        .map(|&a| {
            base.with_object_center(REFERENCE_POSITION)
                .with_reflectance(a)
        })
        .collect();
    run_rows(configs, exec)
}

/// Cases 0, 1 and 2 on identical geometry.
pub fn compare_impact(base: &ScenarioConfig, x_m: f64, exec: Execution) -> Vec<SweepRow> {
    let configs = ControlCase::ALL
        .iter()
        .map(|&case| base.with_case(case).with_object_center(x_m))
        .collect();
    run_rows(configs, exec)
}

fn fmt_time(t: Option<f64>) -> String {
    t.map_or_else(|| "-".to_string(), |t| format!("{t:.2}"))
}

/// Aligned text table; times rounded to 0.01 s.
pub fn render_table(rows: &[SweepRow]) -> String {
    let header = [
        "case",
        "x_m (m)",
        "alpha1",
        "alpha2",
        "t1 (s)",
        "t2 (s)",
        "dt (s)",
        "v1 (m/s)",
        "v2 (m/s)",
        "peak1 (N)",
        "peak2 (N)",
        "fc1 (N)",
        "fc2 (N)",
        "xv2 final (m)",
        "xv2 max (m)",
        "status",
    ];
    let mut lines: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for row in rows {
        let mut cells = vec![
            row.case.number().to_string(),
            format!("{:.2}", row.x_m),
            format!("{:.2}", row.alpha.alpha_rel_1),
            format!("{:.2}", row.alpha.alpha_rel_2),
        ];
        match &row.outcome {
            Ok(r) => {
                let speed =
                    |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
                cells.extend([
                    fmt_time(r.t_contact[0]),
                    fmt_time(r.t_contact[1]),
                    fmt_time(r.dt_contact),
                    speed(r.v_impact[0]),
                    speed(r.v_impact[1]),
                    format!("{:.3}", r.peak_force[0]),
                    format!("{:.3}", r.peak_force[1]),
                    format!("{:.3}", r.f_c_final[0]),
                    format!("{:.3}", r.f_c_final[1]),
                    format!("{:.4}", r.x_v2_final),
                    format!("{:.4}", r.x_v2_max),
                    "ok".to_string(),
                ]);
            }
            Err(e) => {
                cells.extend(std::iter::repeat_n("-".to_string(), 11));
                cells.push(format!("failed: {e}"));
            }
        }
        lines.push(cells);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| lines.iter().map(|l| l[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, l) in lines.iter().enumerate() {
        let row: Vec<String> = l
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, w))| {
                if c == header.len() - 1 {
                    cell.clone()
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        out.push_str(row.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quick() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.plant.dt = 1e-3;
        cfg.scenario.t_end = 1.0;
        cfg
    }

    #[test]
    fn empty_position_list_gives_empty_table() {
        assert!(
            sweep_positions(&quick(), &[ControlCase::Case1], &[], Execution::Sequential).is_empty()
        );
    }

    #[test]
    fn rows_keep_declared_order() {
        let rows = sweep_positions(
            &quick(),
            &[ControlCase::Case1, ControlCase::Case2],
            &[0.02, 0.0],
            Execution::default(),
        );
        let keys: Vec<_> = rows.iter().map(|r| (r.case, r.x_m)).collect();
        assert_eq!(
            keys,
            vec![
                (ControlCase::Case1, 0.02),
                (ControlCase::Case1, 0.0),
                (ControlCase::Case2, 0.02),
                (ControlCase::Case2, 0.0)
            ]
        );
    }

    #[test]
    fn failing_cell_does_not_abort_sweep() {
        let mut base = quick();
        base.plant.x_init = [0.07, -0.11];
        // x_m = 0.05 puts the finger-1 face at 0.085, inside the start position.
        let rows = sweep_positions(
            &base,
            &[ControlCase::Case1],
            &[0.0, 0.05],
            Execution::Sequential,
        );
        assert!(rows[0].outcome.is_ok());
        assert!(matches!(rows[1].outcome, Err(SimError::InvalidConfig(_))));
        assert!(render_table(&rows).contains("failed"));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let seq = sweep_positions(
            &quick(),
            &[ControlCase::Case2],
            &[0.01, 0.04],
            Execution::Sequential,
        );
        let par = sweep_positions(
            &quick(),
            &[ControlCase::Case2],
            &[0.01, 0.04],
            Execution::default(),
        );
        assert_eq!(seq, par);
    }

    #[test]
    fn reflectance_layout() {
        let pairs = reflectance_pairs();
        assert_eq!(pairs.len(), 7);
        assert_eq!(pairs[4], SurfaceReflectance::uniform(0.57));
        assert_eq!(pairs[5], SurfaceReflectance::new(0.86, 1.0));
    }

    #[test]
    fn predicted_offset_closed_form() {
        let p = ControllerParams::default();
        assert_eq!(
            predicted_static_offset(&SurfaceReflectance::uniform(0.57), &p),
            0.0
        );
        // (3/36) tanh(-0.14/1.86), mpmath at 50 digits.
        assert_relative_eq!(
            predicted_static_offset(&SurfaceReflectance::new(0.86, 1.0), &p),
            -0.006_260_583_005_149_128,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            predicted_static_offset(&SurfaceReflectance::new(1.0, 0.86), &p),
            0.006_260_583_005_149_128,
            max_relative = 1e-12
        );
    }
}
