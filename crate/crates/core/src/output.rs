//! CSV emission for time series, single-run reports and sweep summaries.
//!
//! Every file opens with one `#` comment line carrying the tool version and
//! the config fingerprint, followed by a header row. Missing values (a finger
//! that never touched) are written as empty fields.

use std::io::{self, Write};

use crate::config::ScenarioConfig;
use crate::scenario::{Sample, ScenarioReport};
use crate::sweep::SweepRow;

/// Summary columns shared by `report.csv` and the sweep files.
pub const SUMMARY_COLUMNS: [&str; 19] = [
    "case",
    "x_m",
    "alpha1",
    "alpha2",
    "time_to_contact_finger1",
    "time_to_contact_finger2",
    "time_difference_of_contact",
    "v_impact1",
    "v_impact2",
    "peak_force1",
    "peak_force2",
    "f_c_final1",
    "f_c_final2",
    "x_v2_final",
    "x_v2_max",
    "x_d_final",
    "predicted_offset",
    "converged",
    "status",
];

pub fn provenance_line(tool_version: &str, cfg: &ScenarioConfig) -> String {
    format!(
        "# proxgrip {tool_version} config-sha256={}",
        cfg.fingerprint()
    )
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\"").replace('\n', " "))
    } else {
        s.to_string()
    }
}

fn summary_fields(row: &SweepRow) -> Vec<String> {
    let mut f = vec![
        row.case.number().to_string(),
        row.x_m.to_string(),
        row.alpha.alpha_rel_1.to_string(),
        row.alpha.alpha_rel_2.to_string(),
    ];
    match &row.outcome {
        Ok(r) => f.extend([
            opt(r.t_contact[0]),
            opt(r.t_contact[1]),
            opt(r.dt_contact),
            opt(r.v_impact[0]),
            opt(r.v_impact[1]),
            r.peak_force[0].to_string(),
            r.peak_force[1].to_string(),
            r.f_c_final[0].to_string(),
            r.f_c_final[1].to_string(),
            r.x_v2_final.to_string(),
            r.x_v2_max.to_string(),
            r.x_d_final.to_string(),
            row.predicted_offset.to_string(),
            r.converged.to_string(),
            "ok".to_string(),
        ]),
        Err(e) => {
            f.extend(std::iter::repeat_n(String::new(), 12));
            f.push(row.predicted_offset.to_string());
            f.push(String::new());
            f.push(csv_text(&format!("failed: {e}")));
        }
    }
    f
}

/// Writes the comment line and the time-series header.
pub fn write_timeseries_header<W: Write>(w: &mut W, provenance: &str) -> io::Result<()> {
    writeln!(w, "{provenance}")?;
    writeln!(w, "{}", Sample::COLUMNS.join(","))
}

pub fn write_sample<W: Write>(w: &mut W, s: &Sample) -> io::Result<()> {
    let values = s.values();
    let mut line = String::with_capacity(17 * 24);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&v.to_string());
    }
    writeln!(w, "{line}")
}

pub fn write_summary<W: Write>(w: &mut W, provenance: &str, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(w, "{provenance}")?;
    writeln!(w, "{}", SUMMARY_COLUMNS.join(","))?;
    for row in rows {
        writeln!(w, "{}", summary_fields(row).join(","))?;
    }
    Ok(())
}

/// Single-run report in the summary layout.
pub fn write_report<W: Write>(
    w: &mut W,
    provenance: &str,
    cfg: &ScenarioConfig,
    report: &ScenarioReport,
) -> io::Result<()> {
    let row = SweepRow {
        case: report.case,
        x_m: report.x_m,
        alpha: report.alpha,
        predicted_offset: crate::sweep::predicted_static_offset(&report.alpha, &cfg.controller),
        outcome: Ok(ScenarioReport {
            series: Vec::new(),
            ..report.clone()
        }),
    };
    write_summary(w, provenance, std::slice::from_ref(&row))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::ControlCase;
    use crate::error::SimError;
    use crate::sensor::SurfaceReflectance;

    #[test]
    fn sample_row_width_matches_header() {
        let mut buf = Vec::new();
        write_timeseries_header(&mut buf, "# test").unwrap();
        write_sample(&mut buf, &Sample::default()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# test");
        assert_eq!(lines[1].split(',').count(), 17);
        assert_eq!(lines[2].split(',').count(), 17);
    }

    #[test]
    fn failed_row_keeps_column_count() {
        let row = SweepRow {
            case: ControlCase::Case1,
            x_m: 0.03,
            alpha: SurfaceReflectance::uniform(1.0),
            predicted_offset: 0.0,
            outcome: Err(SimError::InvalidConfig(vec!["a, b".into()])),
        };
        let mut buf = Vec::new();
        write_summary(&mut buf, "# test", &[row]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let last = text.lines().last().unwrap();
        assert!(last.ends_with("\"failed: invalid configuration: a, b\""));
        assert_eq!(fields_outside_quotes(last), SUMMARY_COLUMNS.len());
    }

    fn fields_outside_quotes(line: &str) -> usize {
        let mut quoted = false;
        1 + line
            .chars()
            .filter(|&c| {
                if c == '"' {
                    quoted = !quoted;
                }
                c == ',' && !quoted
            })
            .count()
    }
}
