use std::fs;
use std::path::Path;

use flatsmc_core::metrics::{compare as compare_reports, RunSummary};
use flatsmc_core::verify::theorem_suite;
use flatsmc_core::{run_baseline, Scenario, SimTrace};

use crate::args::{Overrides, RunArgs};
use crate::error::{CliError, CliResult};
use crate::manifest::OutputDir;

/// Largest tolerated fraction of rows that hit a singular flat point.
pub const FAULT_FRACTION: f64 = 0.01;

/// Reads, parses, overrides and validates a scenario. Returns the raw file
/// bytes for hashing.
pub fn load_scenario(path: &Path, overrides: &Overrides) -> CliResult<(Scenario, Vec<u8>)> {
    let bytes = fs::read(path).map_err(|e| CliError::Parse(format!("cannot read `{}`: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Parse(format!("`{}` is not UTF-8", path.display())))?;
    let mut sc = Scenario::from_toml_str(&text)
        .map_err(|e| CliError::Parse(format!("cannot parse `{}`: {e}", path.display())))?;
    apply_overrides(&mut sc, overrides);
    sc.validate()?;
    Ok((sc, bytes))
}

pub fn apply_overrides(sc: &mut Scenario, o: &Overrides) {
    if let Some(seed) = o.seed_override {
        sc.seed = seed;
    }
    if let Some(dt) = o.dt_override {
        sc.dt = dt;
    }
    if let Some(mode) = o.mode {
        sc.controller = sc.controller.with_mode(mode.into());
    }
    if let Some(c) = o.chattering {
        sc.controller = sc.controller.with_chattering(c.into());
    }
}

pub fn check_faults(trace: &SimTrace) -> CliResult<()> {
    let (faults, rows) = (trace.fault_rows(), trace.rows.len());
    if faults as f64 > FAULT_FRACTION * rows as f64 {
        return Err(CliError::FaultDominated {
            trace: trace.controller.clone(),
            faults,
            rows,
        });
    }
    Ok(())
}

fn csv_bytes(trace: &SimTrace) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    trace
        .write_csv(&mut buf)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(buf)
}

pub fn run(a: &RunArgs) -> CliResult<()> {
    let (sc, bytes) = load_scenario(&a.scenario, &a.overrides)?;
    let mut out = OutputDir::create(&a.out)?;
    out.record_input(&a.scenario, &bytes);
    let trace = flatsmc_core::run(&sc)?;
    let summary = RunSummary::from_trace(&trace)?;
    out.write("trace.csv", &csv_bytes(&trace)?)?;
    out.write_json("metrics.json", &summary)?;
    out.finish()?;
    println!("{}", summary.metrics);
    check_faults(&trace)
}

pub fn compare(a: &RunArgs) -> CliResult<()> {
    let (sc, bytes) = load_scenario(&a.scenario, &a.overrides)?;
    if sc.baseline.is_none() {
        return Err(CliError::validation("baseline", "compare needs a baseline controller in the scenario"));
    }
    let mut out = OutputDir::create(&a.out)?;
    out.record_input(&a.scenario, &bytes);
    let (left, right) = rayon::join(|| flatsmc_core::run(&sc), || run_baseline(&sc));
    let left = left?;
    let right = right?.expect("baseline checked above");
    let report = compare_reports(
        &RunSummary::from_trace(&left)?.metrics,
        &RunSummary::from_trace(&right)?.metrics,
    )?;
    out.write("trace_controller.csv", &csv_bytes(&left)?)?;
    out.write("trace_baseline.csv", &csv_bytes(&right)?)?;
    out.write_json("comparison.json", &report)?;
    out.write("comparison.txt", format!("{report}\n").as_bytes())?;
    out.finish()?;
    println!("{report}");
    check_faults(&left)?;
    check_faults(&right)
}

pub fn verify(out_dir: &Path) -> CliResult<()> {
    let mut out = OutputDir::create(out_dir)?;
    let report = theorem_suite();
    out.write_json("verify.json", &report)?;
    out.write("verify.txt", format!("{report}\n").as_bytes())?;
    out.finish()?;
    println!("{report}");
    match report.failures() {
        0 => Ok(()),
        n => Err(CliError::Verification(n)),
    }
}

pub fn validate(path: &Path, overrides: &Overrides) -> CliResult<()> {
    let (sc, _) = load_scenario(path, overrides)?;
    println!(
        "{}: ok ({} steps, controller {}, baseline {})",
        sc.name,
        sc.steps(),
        sc.controller.label(),
        sc.baseline.as_ref().map_or("none".to_string(), |b| b.label())
    );
    Ok(())
}
