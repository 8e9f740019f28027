//! Per-run summaries in text and CSV form.

use std::fmt::Write as _;

use crate::energy::PhaseMeans;
use crate::error::{Result, SegError};
use crate::labels::NUM_PHASES;
use crate::metrics::MetricRecord;
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub source: String,
    pub width: usize,
    pub height: usize,
    pub config: SolverConfig,
    pub iterations: usize,
    pub converged: bool,
    /// Seconds spent in the solver loop, excluding I/O.
    pub wall_time_s: f64,
    pub final_energy: f64,
    pub means: PhaseMeans,
    pub phase_counts: [usize; NUM_PHASES],
    pub metrics: Option<MetricRecord>,
}

/// CSV columns. Wall time is left out so repeated runs produce identical rows.
pub const CSV_HEADER: &[&str] = &[
    "source",
    "width",
    "height",
    "theta1",
    "theta2",
    "mu1",
    "mu2",
    "lambda11",
    "lambda10",
    "lambda01",
    "lambda00",
    "dt",
    "inner_iters",
    "outer_iters",
    "mean_period",
    "tol",
    "tau",
    "iterations",
    "converged",
    "final_energy",
    "c11",
    "c10",
    "c01",
    "c00",
    "count_0",
    "count_1",
    "count_2",
    "count_3",
    "d1",
    "d2",
    "d3",
    "d4",
    "ri",
    "gce",
    "vi",
];

impl RunReport {
    pub fn csv_record(&self) -> Vec<String> {
        let c = &self.config;
        let w = &c.weights;
        let mut row = vec![
            self.source.clone(),
            self.width.to_string(),
            self.height.to_string(),
        ];
        row.extend(
            [
                c.theta1, c.theta2, w.mu1, w.mu2, w.lambda11, w.lambda10, w.lambda01, w.lambda00,
                c.dt,
            ]
            .iter()
            .map(f64::to_string),
        );
        row.push(c.inner_dual_iters.to_string());
        row.push(c.outer_iters.to_string());
        row.push(c.mean_update_period.to_string());
        row.push(c.tol.to_string());
        row.push(c.threshold_tau.to_string());
        row.push(self.iterations.to_string());
        row.push(self.converged.to_string());
        row.push(self.final_energy.to_string());
        row.extend(self.means.to_array().iter().map(f64::to_string));
        row.extend(self.phase_counts.iter().map(usize::to_string));
        match &self.metrics {
            Some(m) => {
                row.extend(m.dice.iter().map(f64::to_string));
                row.extend([m.rand_index, m.gce, m.vi].iter().map(f64::to_string));
            }
            None => row.extend(std::iter::repeat_n(String::new(), 7)),
        }
        row
    }

    pub fn to_text(&self) -> String {
        let c = &self.config;
        let w = &c.weights;
        let mut s = String::new();
        let _ = writeln!(s, "source: {}", self.source);
        let _ = writeln!(s, "size: {}x{}", self.width, self.height);
        let _ = writeln!(
            s,
            "config: theta=({}, {}) mu=({}, {}) lambda=({}, {}, {}, {}) dt={} inner={} outer={} mean_period={} tol={} tau={}",
            c.theta1, c.theta2, w.mu1, w.mu2, w.lambda11, w.lambda10, w.lambda01, w.lambda00,
            c.dt, c.inner_dual_iters, c.outer_iters, c.mean_update_period, c.tol, c.threshold_tau
        );
        let _ = writeln!(
            s,
            "iterations: {} ({})",
            self.iterations,
            if self.converged { "converged" } else { "iteration limit" }
        );
        let _ = writeln!(s, "solver time: {:.4} s", self.wall_time_s);
        let _ = writeln!(s, "final energy: {}", self.final_energy);
        let m = self.means;
        let _ = writeln!(
            s,
            "means: c11={:.6} c10={:.6} c01={:.6} c00={:.6}",
            m.c11, m.c10, m.c01, m.c00
        );
        let _ = writeln!(s, "phase pixels: {:?}", self.phase_counts);
        if let Some(r) = &self.metrics {
            let _ = writeln!(
                s,
                "dice: D1={:.6} D2={:.6} D3={:.6} D4={:.6}",
                r.dice[0], r.dice[1], r.dice[2], r.dice[3]
            );
            let _ = writeln!(s, "RI={:.6} GCE={:.6} VI={:.6}", r.rand_index, r.gce, r.vi);
        }
        s
    }
}

pub fn report_csv_bytes(reports: &[RunReport]) -> Result<Vec<u8>> {
    let csv_err = |e: csv::Error| SegError::InvalidInput(format!("CSV encoding failed: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in reports {
        w.write_record(r.csv_record()).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| SegError::InvalidInput(format!("CSV encoding failed: {e}")))
}
