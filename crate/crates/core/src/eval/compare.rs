use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::batch::{BatchReport, REPORT_SCHEMA_VERSION};
use crate::error::{invalid, Result};

/// Table II/III style row: mean per-mission growth relative to a baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub report: usize,
    pub controller: String,
    pub missions: usize,
    pub mean_relative_growth: f64,
    pub mean_final_mass: f64,
    pub std_final_mass: f64,
}

/// Normalizes every controller of each report to `baseline` within each
/// admissible mission and averages over missions.
pub fn compare(reports: &[BatchReport], baseline: &str) -> Result<Vec<CompareRow>> {
    let mut out = Vec::new();
    for (ri, rep) in reports.iter().enumerate() {
        if rep.version != REPORT_SCHEMA_VERSION {
            return Err(invalid(format!("report {ri} has unsupported version {}", rep.version)));
        }
        if !rep.controllers.iter().any(|c| c == baseline) {
            return Err(invalid(format!("report {ri} has no controller {baseline}")));
        }
        let base: BTreeMap<usize, f64> = rep
            .rows
            .iter()
            .filter(|r| r.controller == baseline)
            .map(|r| (r.mission_id, r.final_mass))
            .collect();
        for c in &rep.controllers {
            let sel: Vec<(f64, f64)> = rep
                .rows
                .iter()
                .filter(|r| &r.controller == c && rep.admissible.binary_search(&r.mission_id).is_ok())
                .map(|r| (r.final_mass, 100.0 * (r.final_mass / base[&r.mission_id])))
                .collect();
            let n = sel.len();
            let mean_mass = sel.iter().map(|s| s.0).sum::<f64>() / n as f64;
            let std = if n < 2 {
                0.0
            } else {
                (sel.iter().map(|s| (s.0 - mean_mass).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            };
            out.push(CompareRow {
                report: ri,
                controller: c.clone(),
                missions: n,
                mean_relative_growth: sel.iter().map(|s| s.1).sum::<f64>() / n as f64,
                mean_final_mass: mean_mass,
                std_final_mass: std,
            });
        }
    }
    Ok(out)
}

pub fn write_compare_csv<W: Write>(out: W, rows: &[CompareRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::BatchRow;
    use crate::sim::{ControllerKind, Termination};

    fn rows() -> Vec<BatchRow> {
        [(0, "floating", 100.0), (0, "oracle", 120.0), (1, "floating", 150.0), (1, "oracle", 150.0)]
            .into_iter()
            .map(|(m, c, mass)| BatchRow {
                mission_id: m,
                controller: c.to_string(),
                kind: ControllerKind::Floating,
                u_max: 0.1,
                final_mass: mass,
                termination: Termination::Completed,
                relative_growth: 0.0,
                failure: None,
            })
            .collect()
    }

    #[test]
    fn normalizes_within_missions() {
        let rep = BatchReport::from_rows(rows(), vec!["floating".into(), "oracle".into()], "floating".into());
        let t = compare(&[rep.clone()], "floating").unwrap();
        assert_eq!(t[0].mean_relative_growth, 100.0);
        assert!((t[1].mean_relative_growth - 110.0).abs() < 1e-12);
        let t = compare(&[rep], "oracle").unwrap();
        assert!((t[0].mean_relative_growth - (100.0 / 1.2 + 100.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn missing_baseline_is_an_error() {
        let rep = BatchReport::from_rows(rows(), vec!["floating".into(), "oracle".into()], "floating".into());
        assert!(compare(&[rep], "greedy_5d").is_err());
    }
}
