//! Tracking metrics: integral absolute/square error and average control
//! utilization, plus side-by-side controller comparison.
//!
//! All integrals use the trapezoidal rule on the trace's uniform grid.
//!
//! `P_avg` is a project convention: the time average of
//! `((v/v_max)^2 + (w/w_max)^2) / 2` over the applied (saturated) twist,
//! which lies in `[0, 1]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::controllers::Axis;
use crate::error::{Error, Result};
use crate::sim::SimTrace;

/// Footnote printed under every rendered report.
pub const P_AVG_NOTE: &str =
    "P_avg = mean of ((v/v_max)^2 + (w/w_max)^2)/2 over the applied twist (project convention)";

/// Trapezoidal integral of uniformly spaced samples.
pub fn trapezoid(dt: f64, samples: &[f64]) -> Result<f64> {
    match samples {
        [] => Err(Error::EmptyTrace),
        [_] => Ok(0.0),
        [first, inner @ .., last] => Ok(dt * (0.5 * (first + last) + inner.iter().sum::<f64>())),
    }
}

pub fn iae_samples(dt: f64, errors: &[f64]) -> Result<f64> {
    let abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
    trapezoid(dt, &abs)
}

pub fn ise_samples(dt: f64, errors: &[f64]) -> Result<f64> {
    let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
    trapezoid(dt, &sq)
}

/// Time average of normalized squared utilization. A single sample returns
/// its own value.
pub fn p_avg_samples(dt: f64, v: &[f64], w: &[f64], v_max: f64, w_max: f64) -> Result<f64> {
    let util: Vec<f64> = v
        .iter()
        .zip(w)
        .map(|(v, w)| 0.5 * ((v / v_max).powi(2) + (w / w_max).powi(2)))
        .collect();
    match util.len() {
        0 => Err(Error::EmptyTrace),
        1 => Ok(util[0]),
        n => Ok(trapezoid(dt, &util)? / (dt * (n - 1) as f64)),
    }
}

fn axis_errors(trace: &SimTrace, axis: Axis) -> Vec<f64> {
    trace.rows.iter().map(|r| r.error.axis(axis).e).collect()
}

pub fn iae(trace: &SimTrace, axis: Axis) -> Result<f64> {
    iae_samples(trace.dt, &axis_errors(trace, axis))
}

pub fn ise(trace: &SimTrace, axis: Axis) -> Result<f64> {
    ise_samples(trace.dt, &axis_errors(trace, axis))
}

pub fn p_avg(trace: &SimTrace) -> Result<f64> {
    let v: Vec<f64> = trace.rows.iter().map(|r| r.sat.v).collect();
    let w: Vec<f64> = trace.rows.iter().map(|r| r.sat.w).collect();
    p_avg_samples(trace.dt, &v, &w, trace.limits.v_max, trace.limits.w_max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scenario: String,
    pub controller: String,
    pub duration: f64,
    pub iae_x: f64,
    pub iae_y: f64,
    pub ise_x: f64,
    pub ise_y: f64,
    pub p_avg: f64,
}

impl MetricsReport {
    pub fn from_trace(trace: &SimTrace) -> Result<Self> {
        Ok(Self {
            scenario: trace.scenario.clone(),
            controller: trace.controller.clone(),
            duration: trace.duration(),
            iae_x: iae(trace, Axis::X)?,
            iae_y: iae(trace, Axis::Y)?,
            ise_x: ise(trace, Axis::X)?,
            ise_y: ise(trace, Axis::Y)?,
            p_avg: p_avg(trace)?,
        })
    }

    /// The five table columns in order: IAE_x, IAE_y, ISE_x, ISE_y, P_avg.
    pub fn columns(&self) -> [f64; 5] {
        [self.iae_x, self.iae_y, self.ise_x, self.ise_y, self.p_avg]
    }
}

pub const METRIC_NAMES: [&str; 5] = ["IAE_x", "IAE_y", "ISE_x", "ISE_y", "P_avg"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Left,
    Right,
    Tie,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: String,
    pub left: f64,
    pub right: f64,
    /// `right / left`; 1 when both are zero.
    pub ratio: f64,
    /// Smaller value wins.
    pub winner: Winner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub left: MetricsReport,
    pub right: MetricsReport,
    pub metrics: Vec<MetricComparison>,
    pub note: String,
}

impl ComparisonReport {
    pub fn winner(&self, metric: &str) -> Option<Winner> {
        self.metrics.iter().find(|m| m.metric == metric).map(|m| m.winner)
    }
}

/// Compares two reports from the same scenario; lower is better.
pub fn compare(left: &MetricsReport, right: &MetricsReport) -> Result<ComparisonReport> {
    if left.scenario != right.scenario {
        return Err(Error::ScenarioMismatch {
            left: left.scenario.clone(),
            right: right.scenario.clone(),
        });
    }
    let metrics = METRIC_NAMES
        .iter()
        .zip(left.columns().into_iter().zip(right.columns()))
        .map(|(name, (l, r))| {
            let ratio = if l == r { 1.0 } else { r / l };
            let winner = if l < r {
                Winner::Left
            } else if r < l {
                Winner::Right
            } else {
                Winner::Tie
            };
            MetricComparison {
                metric: name.to_string(),
                left: l,
                right: r,
                ratio,
                winner,
            }
        })
        .collect();
    Ok(ComparisonReport {
        scenario: left.scenario.clone(),
        left: left.clone(),
        right: right.clone(),
        metrics,
        note: P_AVG_NOTE.to_string(),
    })
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario: {}  controller: {}  duration: {} s", self.scenario, self.controller, self.duration)?;
        for (name, v) in METRIC_NAMES.iter().zip(self.columns()) {
            writeln!(f, "  {name:<6} {v:>12.6e}")?;
        }
        write!(f, "  * {P_AVG_NOTE}")
    }
}

impl fmt::Display for ComparisonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label_w = self.left.controller.len().max(self.right.controller.len()).max(10);
        writeln!(f, "scenario: {}", self.scenario)?;
        writeln!(f, "left: {}, right: {}", self.left.controller, self.right.controller)?;
        write!(f, "{:<label_w$}", "controller")?;
        for name in METRIC_NAMES {
            write!(f, " {name:>11}")?;
        }
        writeln!(f)?;
        for report in [&self.left, &self.right] {
            write!(f, "{:<label_w$}", report.controller)?;
            for v in report.columns() {
                write!(f, " {v:>11.4e}")?;
            }
            writeln!(f)?;
        }
        write!(f, "{:<label_w$}", "ratio")?;
        for m in &self.metrics {
            write!(f, " {:>11.4}", m.ratio)?;
        }
        writeln!(f)?;
        write!(f, "{:<label_w$}", "winner")?;
        for m in &self.metrics {
            let w = match m.winner {
                Winner::Left => "left",
                Winner::Right => "right",
                Winner::Tie => "-",
            };
            write!(f, " {w:>11}")?;
        }
        writeln!(f)?;
        write!(f, "* {}", self.note)
    }
}

/// Machine-readable summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub metrics: MetricsReport,
    pub rows: usize,
    pub fault_rows: usize,
    pub max_abs_error: [f64; 2],
    pub final_error: [f64; 2],
    pub final_pose: [f64; 3],
    pub note: String,
}

impl RunSummary {
    pub fn from_trace(trace: &SimTrace) -> Result<Self> {
        let metrics = MetricsReport::from_trace(trace)?;
        let last = trace.rows.last().ok_or(Error::EmptyTrace)?;
        let max_abs = |axis| {
            trace
                .rows
                .iter()
                .map(|r| r.error.axis(axis).e.abs())
                .fold(0.0, f64::max)
        };
        Ok(Self {
            metrics,
            rows: trace.rows.len(),
            fault_rows: trace.fault_rows(),
            max_abs_error: [max_abs(Axis::X), max_abs(Axis::Y)],
            final_error: [last.error.x.e, last.error.y.e],
            final_pose: [last.pose.x, last.pose.y, last.pose.wrapped_theta()],
            note: P_AVG_NOTE.to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn report(name: &str, cols: [f64; 5]) -> MetricsReport {
        MetricsReport {
            scenario: "s".into(),
            controller: name.into(),
            duration: 1.0,
            iae_x: cols[0],
            iae_y: cols[1],
            ise_x: cols[2],
            ise_y: cols[3],
            p_avg: cols[4],
        }
    }

    #[test]
    fn iae_ise_examples() {
        assert_eq!(iae_samples(0.01, &[0.0; 50]).unwrap(), 0.0);
        assert_eq!(ise_samples(0.01, &[0.0; 50]).unwrap(), 0.0);

        let c = vec![0.1; 1001];
        assert_abs_diff_eq!(iae_samples(0.01, &c).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ise_samples(0.01, &c).unwrap(), 0.1, epsilon = 1e-12);

        let ramp: Vec<f64> = (0..=1000).map(|k| k as f64 * 1e-3).collect();
        assert_abs_diff_eq!(iae_samples(1e-3, &ramp).unwrap(), 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(ise_samples(1e-3, &ramp).unwrap(), 1.0 / 3.0, epsilon = 1e-6);

        assert_eq!(iae_samples(0.01, &[]), Err(Error::EmptyTrace));
    }

    #[test]
    fn p_avg_examples() {
        let n = 101;
        let z = vec![0.0; n];
        assert_eq!(p_avg_samples(0.01, &z, &z, 0.22, 2.84).unwrap(), 0.0);
        let vm = vec![0.22; n];
        assert_abs_diff_eq!(p_avg_samples(0.01, &vm, &z, 0.22, 2.84).unwrap(), 0.5, epsilon = 1e-12);
        let wm = vec![-2.84; n];
        assert_abs_diff_eq!(p_avg_samples(0.01, &vm, &wm, 0.22, 2.84).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(p_avg_samples(0.01, &[], &[], 0.22, 2.84), Err(Error::EmptyTrace));
    }

    #[test]
    fn compare_examples() {
        let a = report("A", [1.0, 2.0, 3.0, 4.0, 0.5]);
        let c = compare(&a, &a).unwrap();
        assert!(c.metrics.iter().all(|m| m.ratio == 1.0 && m.winner == Winner::Tie));

        let fbsmc = report("FBSMC", [7.0131, 6.9040, 0.9719, 0.5829, 0.0967]);
        let proposed = report("Proposed", [3.8904, 6.4075, 0.2465, 0.3763, 0.0293]);
        let c = compare(&fbsmc, &proposed).unwrap();
        assert!(c.metrics.iter().all(|m| m.winner == Winner::Right));
        assert!(c.metrics.iter().all(|m| m.ratio < 1.0));

        let mut b = a.clone();
        b.ise_y = 3.5;
        let c = compare(&a, &b).unwrap();
        for m in &c.metrics {
            let expected = if m.metric == "ISE_y" { Winner::Right } else { Winner::Tie };
            assert_eq!(m.winner, expected, "{}", m.metric);
        }

        let mut other = a.clone();
        other.scenario = "t".into();
        assert!(matches!(compare(&a, &other), Err(Error::ScenarioMismatch { .. })));
    }

    #[test]
    fn table_renders_five_columns_and_note() {
        let a = report("FBSMC", [7.0131, 6.9040, 0.9719, 0.5829, 0.0967]);
        let b = report("INH-SMC", [3.8904, 6.4075, 0.2465, 0.3763, 0.0293]);
        let text = compare(&a, &b).unwrap().to_string();
        for name in METRIC_NAMES {
            assert!(text.contains(name));
        }
        assert!(text.contains("project convention"));
    }
}
