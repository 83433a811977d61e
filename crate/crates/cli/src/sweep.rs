//! Gain sweeps over the manifold and reaching parameters.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use flatsmc_core::metrics::{MetricsReport, P_AVG_NOTE};
use flatsmc_core::{AxisGains, ControllerSpec, GainSet, Scenario};

use crate::args::Overrides;
use crate::commands::load_scenario;
use crate::error::{CliError, CliResult};
use crate::manifest::OutputDir;

pub const PARAMETERS: [&str; 4] = ["mu", "beta", "upsilon1", "upsilon2"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Scenario file, relative to the sweep file.
    pub scenario: PathBuf,
    #[serde(default)]
    pub objective: Objective,
    pub grid: Option<Grid>,
    pub random: Option<RandomSample>,
}

/// `iae * (IAE_x + IAE_y) + p_avg * P_avg`; lower ranks first.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Objective {
    pub iae: f64,
    pub p_avg: f64,
}

impl Default for Objective {
    fn default() -> Self {
        Self { iae: 1.0, p_avg: 1.0 }
    }
}

impl Objective {
    pub fn score(&self, m: &MetricsReport) -> f64 {
        self.iae * (m.iae_x + m.iae_y) + self.p_avg * m.p_avg
    }
}

/// Cartesian product of the listed values; omitted parameters keep the
/// scenario's value.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub mu: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub upsilon1: Option<Vec<f64>>,
    pub upsilon2: Option<Vec<f64>>,
}

/// Uniform samples from `[lo, hi]` per listed parameter.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSample {
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    pub mu: Option<[f64; 2]>,
    pub beta: Option<[f64; 2]>,
    pub upsilon1: Option<[f64; 2]>,
    pub upsilon2: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainPoint {
    pub mu: f64,
    pub beta: f64,
    pub upsilon1: f64,
    pub upsilon2: f64,
}

impl GainPoint {
    fn of(g: &AxisGains) -> Self {
        Self {
            mu: g.mu,
            beta: g.beta,
            upsilon1: g.upsilon1,
            upsilon2: g.upsilon2,
        }
    }

    fn get(&self, name: &str) -> f64 {
        match name {
            "mu" => self.mu,
            "beta" => self.beta,
            "upsilon1" => self.upsilon1,
            _ => self.upsilon2,
        }
    }

    fn set(&mut self, name: &str, v: f64) {
        match name {
            "mu" => self.mu = v,
            "beta" => self.beta = v,
            "upsilon1" => self.upsilon1 = v,
            _ => self.upsilon2 = v,
        }
    }

    fn apply(&self, g: AxisGains) -> AxisGains {
        AxisGains {
            mu: self.mu,
            beta: self.beta,
            upsilon1: self.upsilon1,
            upsilon2: self.upsilon2,
            ..g
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub rank: usize,
    pub gains: GainPoint,
    pub metrics: MetricsReport,
    pub objective: f64,
    pub fault_rows: usize,
}

/// How P_avg and IAE move along one parameter with the others fixed.
#[derive(Debug, Clone, Serialize)]
pub struct Trend {
    pub parameter: String,
    pub fixed: BTreeMap<String, f64>,
    pub values: Vec<f64>,
    pub p_avg: Vec<f64>,
    pub iae: Vec<f64>,
    pub p_avg_nondecreasing: bool,
    pub iae_nonincreasing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub scenario: String,
    pub objective: Objective,
    pub rows: Vec<SweepRow>,
    pub trends: Vec<Trend>,
    pub note: String,
}

fn base_gains(sc: &Scenario) -> CliResult<GainSet> {
    match &sc.controller {
        ControllerSpec::Inhsmc { gains, .. } => Ok(*gains),
        ControllerSpec::Fbsmc { .. } => Err(CliError::validation(
            "controller.kind",
            "sweeps vary the hyperplane controller's gains; the scenario uses fbsmc",
        )),
    }
}

/// Expands the sweep into gain points, validating every one.
pub fn points(spec: &SweepSpec, base: &AxisGains) -> CliResult<(Vec<GainPoint>, &'static str)> {
    let (pts, prefix) = match (&spec.grid, &spec.random) {
        (Some(grid), None) => (grid_points(grid, base)?, "grid"),
        (None, Some(r)) => (random_points(r, base)?, "random"),
        _ => return Err(CliError::validation("grid", "give exactly one of [grid] or [random]")),
    };
    for p in &pts {
        p.apply(*base).validate(prefix)?;
    }
    Ok((pts, prefix))
}

fn grid_points(grid: &Grid, base: &AxisGains) -> CliResult<Vec<GainPoint>> {
    let lists = [&grid.mu, &grid.beta, &grid.upsilon1, &grid.upsilon2];
    let mut pts = vec![GainPoint::of(base)];
    for (name, list) in PARAMETERS.iter().zip(lists) {
        let Some(values) = list else { continue };
        if values.is_empty() {
            return Err(CliError::validation(format!("grid.{name}"), "empty range"));
        }
        pts = pts
            .iter()
            .flat_map(|p| {
                values.iter().map(move |v| {
                    let mut q = *p;
                    q.set(name, *v);
                    q
                })
            })
            .collect();
    }
    Ok(pts)
}

fn random_points(r: &RandomSample, base: &AxisGains) -> CliResult<Vec<GainPoint>> {
    use rand::{Rng, SeedableRng};
    if r.samples == 0 {
        return Err(CliError::validation("random.samples", "empty range: must be >= 1"));
    }
    let ranges = [r.mu, r.beta, r.upsilon1, r.upsilon2];
    for (name, range) in PARAMETERS.iter().zip(ranges) {
        if let Some([lo, hi]) = range {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(CliError::validation(format!("random.{name}"), format!("empty range [{lo}, {hi}]")));
            }
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(r.seed);
    Ok((0..r.samples)
        .map(|_| {
            let mut p = GainPoint::of(base);
            for (name, range) in PARAMETERS.iter().zip(ranges) {
                if let Some([lo, hi]) = range {
                    p.set(name, rng.random_range(lo..=hi));
                }
            }
            p
        })
        .collect())
}

fn trends(rows: &[SweepRow]) -> Vec<Trend> {
    let mut out = Vec::new();
    for param in PARAMETERS {
        let mut groups: BTreeMap<Vec<u64>, Vec<&SweepRow>> = BTreeMap::new();
        for r in rows {
            let key = PARAMETERS
                .iter()
                .filter(|p| **p != param)
                .map(|p| r.gains.get(p).to_bits())
                .collect();
            groups.entry(key).or_default().push(r);
        }
        for mut group in groups.into_values() {
            group.sort_by(|a, b| a.gains.get(param).total_cmp(&b.gains.get(param)));
            group.dedup_by(|a, b| a.gains.get(param) == b.gains.get(param));
            if group.len() < 2 {
                continue;
            }
            let p_avg: Vec<f64> = group.iter().map(|r| r.metrics.p_avg).collect();
            let iae: Vec<f64> = group.iter().map(|r| r.metrics.iae_x + r.metrics.iae_y).collect();
            out.push(Trend {
                parameter: param.to_string(),
                fixed: PARAMETERS
                    .iter()
                    .filter(|p| **p != param)
                    .map(|p| (p.to_string(), group[0].gains.get(p)))
                    .collect(),
                values: group.iter().map(|r| r.gains.get(param)).collect(),
                p_avg_nondecreasing: p_avg.windows(2).all(|w| w[1] >= w[0]),
                iae_nonincreasing: iae.windows(2).all(|w| w[1] <= w[0]),
                p_avg,
                iae,
            });
        }
    }
    out
}

/// Runs every point (in parallel) and ranks by the objective.
pub fn sweep(sc: &Scenario, spec: &SweepSpec) -> CliResult<SweepReport> {
    let base = base_gains(sc)?;
    let (pts, _) = points(spec, &base.x)?;
    let runs: Vec<(GainPoint, MetricsReport, usize)> = pts
        .par_iter()
        .map(|p| {
            let mut s = sc.clone();
            if let ControllerSpec::Inhsmc { gains, .. } = &mut s.controller {
                *gains = GainSet {
                    x: p.apply(base.x),
                    y: p.apply(base.y),
                };
            }
            let trace = flatsmc_core::run(&s)?;
            Ok((*p, MetricsReport::from_trace(&trace)?, trace.fault_rows()))
        })
        .collect::<Result<_, flatsmc_core::Error>>()?;
    let mut rows: Vec<SweepRow> = runs
        .into_iter()
        .map(|(gains, metrics, fault_rows)| SweepRow {
            rank: 0,
            objective: spec.objective.score(&metrics),
            gains,
            metrics,
            fault_rows,
        })
        .collect();
    let trends = spec.grid.as_ref().map_or_else(Vec::new, |_| trends(&rows));
    rows.sort_by(|a, b| a.objective.total_cmp(&b.objective));
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(SweepReport {
        scenario: sc.name.clone(),
        objective: spec.objective,
        rows,
        trends,
        note: P_AVG_NOTE.to_string(),
    })
}

pub fn to_csv(report: &SweepReport) -> String {
    let mut s = String::from("rank,mu,beta,upsilon1,upsilon2,iae_x,iae_y,ise_x,ise_y,p_avg,objective,fault_rows\n");
    for r in &report.rows {
        let m = &r.metrics;
        let g = &r.gains;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.rank, g.mu, g.beta, g.upsilon1, g.upsilon2, m.iae_x, m.iae_y, m.ise_x, m.ise_y, m.p_avg, r.objective, r.fault_rows
        );
    }
    s
}

pub fn run(sweep_path: &Path, out_dir: &Path, overrides: &Overrides) -> CliResult<()> {
    let bytes = fs::read(sweep_path)
        .map_err(|e| CliError::Parse(format!("cannot read `{}`: {e}", sweep_path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Parse(format!("`{}` is not UTF-8", sweep_path.display())))?;
    let spec: SweepSpec =
        toml::from_str(&text).map_err(|e| CliError::Parse(format!("cannot parse `{}`: {e}", sweep_path.display())))?;
    let scenario_path = sweep_path.parent().unwrap_or(Path::new(".")).join(&spec.scenario);
    let (sc, sc_bytes) = load_scenario(&scenario_path, overrides)?;
    let report = sweep(&sc, &spec)?;

    let mut out = OutputDir::create(out_dir)?;
    out.record_input(sweep_path, &bytes);
    out.record_input(&scenario_path, &sc_bytes);
    out.write("sweep.csv", to_csv(&report).as_bytes())?;
    out.write_json("sweep.json", &report)?;
    out.finish()?;

    println!("{} points on `{}`, best first:", report.rows.len(), report.scenario);
    for r in report.rows.iter().take(5) {
        println!(
            "  #{:<3} mu {:<6} beta {:<6} ups1 {:<6} ups2 {:<6} IAE {:.4e}  P_avg {:.6}  objective {:.6}",
            r.rank,
            r.gains.mu,
            r.gains.beta,
            r.gains.upsilon1,
            r.gains.upsilon2,
            r.metrics.iae_x + r.metrics.iae_y,
            r.metrics.p_avg,
            r.objective
        );
    }
    for t in &report.trends {
        println!(
            "  trend in {} over {:?}: P_avg nondecreasing {}, IAE nonincreasing {}",
            t.parameter, t.values, t.p_avg_nondecreasing, t.iae_nonincreasing
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(toml_text: &str) -> SweepSpec {
        toml::from_str(toml_text).unwrap()
    }

    #[test]
    fn grid_is_a_cartesian_product() {
        let s = spec("scenario = \"x.toml\"\n[grid]\nmu = [0.5, 1.0]\nbeta = [1.2, 1.3, 1.4]\n");
        let (pts, _) = points(&s, &AxisGains::PUBLISHED).unwrap();
        assert_eq!(pts.len(), 6);
        assert!(pts.iter().all(|p| p.upsilon1 == 0.04 && p.upsilon2 == 0.02));
    }

    #[test]
    fn empty_list_names_the_parameter() {
        let s = spec("scenario = \"x.toml\"\n[grid]\nmu = []\n");
        let err = points(&s, &AxisGains::PUBLISHED).unwrap_err();
        assert!(err.to_string().contains("grid.mu"), "{err}");
    }

    #[test]
    fn out_of_range_beta_is_rejected() {
        let s = spec("scenario = \"x.toml\"\n[grid]\nbeta = [1.5, 2.5]\n");
        let err = points(&s, &AxisGains::PUBLISHED).unwrap_err();
        assert!(err.to_string().contains("grid.beta"), "{err}");
    }

    #[test]
    fn random_sampling_is_seeded_and_in_range() {
        let text = "scenario = \"x.toml\"\n[random]\nsamples = 8\nseed = 4\nmu = [0.5, 2.0]\n";
        let (a, _) = points(&spec(text), &AxisGains::PUBLISHED).unwrap();
        let (b, _) = points(&spec(text), &AxisGains::PUBLISHED).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| (0.5..=2.0).contains(&p.mu) && p.beta == 1.28));
    }

    #[test]
    fn reversed_random_range_is_empty() {
        let s = spec("scenario = \"x.toml\"\n[random]\nsamples = 3\nmu = [2.0, 1.0]\n");
        assert!(points(&s, &AxisGains::PUBLISHED).unwrap_err().to_string().contains("random.mu"));
    }

    #[test]
    fn both_or_neither_section_is_rejected() {
        assert!(points(&spec("scenario = \"x.toml\"\n"), &AxisGains::PUBLISHED).is_err());
    }
}
