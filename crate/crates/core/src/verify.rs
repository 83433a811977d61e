//! Numerical checks of the finite-time convergence results.
//!
//! The closed-form settling times in [`crate::controllers`] are compared
//! against direct numerical integration of the scalar sliding-phase ODEs,
//! and the reaching phase is exercised on the flat double-integrator plant
//! under bounded piecewise-constant disturbances. Nothing here calls the
//! closed forms; callers do the comparison.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::controllers::{
    signed_power, AxisError, AxisGains, Chattering, EquivalentMode, GainSet, InhSmc, TrackingError,
};
use crate::flatness::FlatPoint;

/// Knobs for [`integrate_to_extinction`].
#[derive(Debug, Clone, Copy)]
pub struct ExtinctionOptions {
    /// Largest allowed relative change of the state per step.
    pub rel_step: f64,
    /// Upper bound on the step size.
    pub max_step: f64,
    /// The state counts as extinct once `|x| <= floor * |x0|`.
    pub floor: f64,
    /// After extinction, keep integrating at `max_step` for this fraction
    /// of the extinction time and record the largest excursion.
    pub hold_fraction: f64,
    /// Absolute level whose first crossing is reported as
    /// [`Extinction::threshold_time`].
    pub threshold: f64,
}

impl Default for ExtinctionOptions {
    fn default() -> Self {
        Self {
            rel_step: 2e-3,
            max_step: 1e-3,
            floor: 1e-300,
            hold_fraction: 0.5,
            threshold: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extinction {
    /// Time at which the state reached zero (numerically).
    pub time: f64,
    /// Largest `|x|` seen while holding after extinction.
    pub max_after: f64,
    /// First time `|x|` dropped below the threshold.
    pub threshold_time: Option<f64>,
    pub steps: usize,
}

fn rk4(f: &impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let k1 = f(x);
    let k2 = f(x + 0.5 * h * k1);
    let k3 = f(x + 0.5 * h * k2);
    let k4 = f(x + h * k3);
    x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates the autonomous scalar ODE `x' = f(x)` from `x0` until the
/// state is numerically zero, with steps that bound the relative change of
/// `x`. A sign change inside a step is located by linear interpolation.
pub fn integrate_to_extinction(f: impl Fn(f64) -> f64, x0: f64, opts: ExtinctionOptions) -> Extinction {
    let floor = opts.floor * x0.abs();
    let (mut t, mut x, mut steps) = (0.0, x0, 0usize);
    let mut threshold_time = (x0.abs() < opts.threshold).then_some(0.0);
    while x.abs() > floor {
        let rate = f(x).abs();
        let h = if rate > 0.0 {
            (opts.rel_step * x.abs() / rate).min(opts.max_step)
        } else {
            opts.max_step
        };
        let next = rk4(&f, x, h);
        steps += 1;
        if threshold_time.is_none() && next.abs() < opts.threshold {
            let frac = (x.abs() - opts.threshold) / (x.abs() - next.abs());
            threshold_time = Some(t + h * frac.clamp(0.0, 1.0));
        }
        if next == 0.0 || next.signum() != x.signum() {
            t += h * x / (x - next);
            x = 0.0;
            break;
        }
        t += h;
        x = next;
    }
    let mut max_after: f64 = x.abs();
    let hold_steps = (opts.hold_fraction * t / opts.max_step).ceil() as usize;
    for _ in 0..hold_steps {
        x = rk4(&f, x, opts.max_step);
        max_after = max_after.max(x.abs());
    }
    Extinction {
        time: t,
        max_after,
        threshold_time,
        steps,
    }
}

/// Extinction of `z' = -(1/(mu beta)) |z|^(2-beta) sign z` from `z0`.
///
/// The threshold crossing is reported at `|z| < 1e-4`.
pub fn surface_rate_extinction(z0: f64, g: &AxisGains) -> Extinction {
    let c = 1.0 / (g.mu * g.beta);
    let p = 2.0 - g.beta;
    integrate_to_extinction(|z| -c * signed_power(z, p), z0, ExtinctionOptions::default())
}

/// Extinction of `e' = -(kappa2/kappa1) |e|^phi sign e` from `e0`.
///
/// Integrated in the scaled variables `y = e / e0`, `tau = (kappa2/kappa1) t`
/// (where `y' = -|e0|^(phi-1) |y|^phi sign y`), then mapped back to
/// seconds; `max_after` is reported in meters.
pub fn tracking_error_extinction(e0: f64, g: &AxisGains) -> Extinction {
    let scale = e0.abs();
    let c = scale.powf(g.phi - 1.0);
    let opts = ExtinctionOptions {
        threshold: ExtinctionOptions::default().threshold / scale,
        ..Default::default()
    };
    let run = integrate_to_extinction(|y| -c * signed_power(y, g.phi), 1.0, opts);
    let to_seconds = g.kappa1 / g.kappa2;
    Extinction {
        time: run.time * to_seconds,
        max_after: run.max_after * scale,
        threshold_time: run.threshold_time.map(|t| t * to_seconds),
        steps: run.steps,
    }
}

/// One randomized reaching-phase experiment on the flat double integrator.
#[derive(Debug, Clone, Copy)]
pub struct ReachingTrial {
    pub gains: GainSet,
    pub initial: TrackingError,
    /// Flat disturbance bound per axis, as a fraction of `upsilon2 / kappa1`.
    pub disturbance_ratio: f64,
    pub dt: f64,
    pub horizon: f64,
    /// Numerical band around `sigma = 0`.
    pub band: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReachingOutcome {
    /// First time from which `|sigma| < band` holds on both axes for the
    /// rest of the horizon.
    pub entry_time: Option<[f64; 2]>,
    /// Steps outside the band where `sigma * delta_sigma > 0`.
    pub increasing_steps: usize,
    pub max_sigma_after_entry: f64,
    pub initial_sigma: [f64; 2],
}

impl ReachingOutcome {
    pub fn reached(&self) -> bool {
        self.entry_time.is_some()
    }
}

/// Reference used by reaching trials: smooth, bounded acceleration.
fn reaching_reference(t: f64) -> FlatPoint {
    let (a, w) = (0.5, 0.1);
    let (s, c) = (w * t).sin_cos();
    let (s2, c2) = (2.0 * w * t).sin_cos();
    FlatPoint {
        gamma: [a * s, 0.5 * a * s2].into(),
        gamma_dot: [a * w * c, a * w * c2].into(),
        gamma_ddot: [-a * w * w * s, -2.0 * a * w * w * s2].into(),
    }
}

/// Runs the hyperplane controller (derived equivalent control, sign
/// switching) on `x'' = v + w` per axis with zero-order-hold control and a
/// piecewise-constant flat disturbance `w` bounded by
/// `disturbance_ratio * upsilon2 / kappa1`.
pub fn run_reaching_trial(trial: &ReachingTrial) -> ReachingOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(trial.seed);
    let mut ctl = InhSmc::new(trial.gains, EquivalentMode::Derived, Chattering::Sign);
    let bound = [
        trial.disturbance_ratio * trial.gains.x.upsilon2 / trial.gains.x.kappa1,
        trial.disturbance_ratio * trial.gains.y.upsilon2 / trial.gains.y.kappa1,
    ];
    let r0 = reaching_reference(0.0);
    let mut pos = [r0.gamma.x + trial.initial.x.e, r0.gamma.y + trial.initial.y.e];
    let mut vel = [
        r0.gamma_dot.x + trial.initial.x.e_dot,
        r0.gamma_dot.y + trial.initial.y.e_dot,
    ];
    let n = (trial.horizon / trial.dt).round() as usize;
    let mut dist = [0.0; 2];
    let mut next_switch = 0.0;
    let mut sigmas: Vec<[f64; 2]> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * trial.dt;
        if t >= next_switch {
            dist = [
                rng.random_range(-bound[0]..=bound[0]),
                rng.random_range(-bound[1]..=bound[1]),
            ];
            next_switch = t + rng.random_range(1.0..10.0);
        }
        let r = reaching_reference(t);
        let err = TrackingError {
            x: AxisError::new(pos[0] - r.gamma.x, vel[0] - r.gamma_dot.x),
            y: AxisError::new(pos[1] - r.gamma.y, vel[1] - r.gamma_dot.y),
        };
        let v = ctl.step(&err, &r, trial.dt);
        sigmas.push([ctl.state.x.sigma, ctl.state.y.sigma]);
        let acc = [v.vx + dist[0], v.vy + dist[1]];
        for i in 0..2 {
            pos[i] += vel[i] * trial.dt + 0.5 * acc[i] * trial.dt * trial.dt;
            vel[i] += acc[i] * trial.dt;
        }
    }

    let mut entry = [None; 2];
    let mut increasing_steps = 0;
    let mut max_after: f64 = 0.0;
    for i in 0..2 {
        // last index outside the band; entry is the step after it
        let last_out = sigmas.iter().rposition(|s| s[i].abs() >= trial.band);
        let first_in = match last_out {
            None => 0,
            Some(j) if j + 1 < sigmas.len() => j + 1,
            Some(_) => continue,
        };
        entry[i] = Some(first_in as f64 * trial.dt);
        max_after = sigmas[first_in..]
            .iter()
            .fold(max_after, |m, s| m.max(s[i].abs()));
        increasing_steps += sigmas[..first_in]
            .windows(2)
            .filter(|w| w[0][i].abs() >= trial.band && w[0][i] * (w[1][i] - w[0][i]) > 0.0)
            .count();
    }
    ReachingOutcome {
        entry_time: match entry {
            [Some(a), Some(b)] => Some([a, b]),
            _ => None,
        },
        increasing_steps,
        max_sigma_after_entry: max_after,
        initial_sigma: sigmas[0],
    }
}

/// Random initial tracking errors for reaching trials.
pub fn random_initial_errors(count: usize, seed: u64) -> Vec<TrackingError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| TrackingError {
            x: AxisError::new(rng.random_range(-0.5..0.5), rng.random_range(-0.1..0.1)),
            y: AxisError::new(rng.random_range(-0.5..0.5), rng.random_range(-0.1..0.1)),
        })
        .collect()
}

/// Relative tolerance between measured and predicted settling times.
pub const SETTLING_REL_TOL: f64 = 0.02;
/// After settling the state must stay below this level.
pub const SETTLED_LEVEL: f64 = 1e-4;
/// Numerical band around `sigma = 0` for the reaching trials, calibrated
/// at `REACHING_DT`.
pub const REACHING_BAND: f64 = 1e-3;
pub const REACHING_DT: f64 = 0.01;
pub const REACHING_HORIZON: f64 = 300.0;
pub const REACHING_TRIALS: usize = 20;
/// Disturbance level of the reaching trials, as a fraction of the bound.
pub const REACHING_RATIO: f64 = 0.5;
/// Disturbance level of the deliberately out-of-bound case.
pub const VIOLATION_RATIO: f64 = 4.0;

const REACHING_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SettlingKind {
    /// Surface rate `z = s_dot` on the hyperplane manifold.
    SurfaceRate,
    /// Tracking error on the integral terminal surface.
    TrackingError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The disturbance exceeds the reaching bound; reported, never failed.
    BoundViolated,
}

impl CheckStatus {
    pub fn is_failure(self) -> bool {
        self == CheckStatus::Fail
    }

    fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::BoundViolated => "bound violated - not a failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SettlingCheck {
    pub kind: SettlingKind,
    pub gains: AxisGains,
    pub initial: f64,
    pub predicted: f64,
    pub measured: f64,
    pub rel_error: f64,
    /// First crossing of `SETTLED_LEVEL`; informational.
    pub threshold_time: Option<f64>,
    pub max_after: f64,
    pub status: CheckStatus,
}

impl SettlingCheck {
    fn new(kind: SettlingKind, gains: AxisGains, initial: f64, predicted: f64, run: Extinction) -> Self {
        let rel_error = (run.time - predicted).abs() / predicted;
        let ok = rel_error <= SETTLING_REL_TOL && run.max_after < SETTLED_LEVEL;
        Self {
            kind,
            gains,
            initial,
            predicted,
            measured: run.time,
            rel_error,
            threshold_time: run.threshold_time,
            max_after: run.max_after,
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReachingCheck {
    pub seed: u64,
    pub initial: TrackingError,
    pub disturbance_ratio: f64,
    pub outcome: ReachingOutcome,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub settling_tolerance: f64,
    pub settled_level: f64,
    pub reaching_band: f64,
    pub settling: Vec<SettlingCheck>,
    pub reaching: Vec<ReachingCheck>,
    pub passed: bool,
}

impl TheoremReport {
    pub fn failures(&self) -> usize {
        self.settling.iter().filter(|c| c.status.is_failure()).count()
            + self.reaching.iter().filter(|c| c.status.is_failure()).count()
    }
}

/// Gains for the surface-rate grid: `mu` x `beta` around the published set.
pub fn surface_grid() -> Vec<(AxisGains, f64)> {
    let mut out = Vec::new();
    for mu in [0.5, 1.14, 2.0] {
        for beta in [1.28, 1.6] {
            for z0 in [0.1, 0.5, 1.0, 2.0] {
                out.push((AxisGains { mu, beta, ..AxisGains::PUBLISHED }, z0));
            }
        }
    }
    out
}

pub fn tracking_grid() -> Vec<(AxisGains, f64)> {
    let p = AxisGains::PUBLISHED;
    let variants = [
        p,
        AxisGains { phi: 0.8, ..p },
        AxisGains { kappa2: 0.5, ..p },
        AxisGains { kappa1: 1.0, phi: 0.7, ..p },
    ];
    let mut out = Vec::new();
    for g in variants {
        for e0 in [0.01, 0.1, 0.5] {
            out.push((g, e0));
        }
    }
    out
}

/// Runs one reaching trial with the published gains and grades it: the
/// band must be entered within the first half of the horizon and `|sigma|`
/// must never grow while outside it.
pub fn reaching_check(initial: TrackingError, ratio: f64, seed: u64) -> ReachingCheck {
    let trial = ReachingTrial {
        gains: GainSet::PUBLISHED,
        initial,
        disturbance_ratio: ratio,
        dt: REACHING_DT,
        horizon: REACHING_HORIZON,
        band: REACHING_BAND,
        seed,
    };
    let outcome = run_reaching_trial(&trial);
    let bound_holds = crate::controllers::reaching_bound_holds(
        ratio * trial.gains.x.upsilon2 / trial.gains.x.kappa1,
        &trial.gains.x,
    );
    let status = if !bound_holds {
        CheckStatus::BoundViolated
    } else {
        let early = outcome
            .entry_time
            .is_some_and(|t| t[0].max(t[1]) <= 0.5 * REACHING_HORIZON);
        if early && outcome.increasing_steps == 0 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    };
    ReachingCheck {
        seed,
        initial,
        disturbance_ratio: ratio,
        outcome,
        status,
    }
}

/// Full theorem-check suite: settling-time oracles over both grids,
/// `REACHING_TRIALS` randomized reaching trials, and one out-of-bound case.
pub fn theorem_suite() -> TheoremReport {
    use crate::controllers::{settling_time_e, settling_time_z};
    let mut settling = Vec::new();
    for (g, z0) in surface_grid() {
        let run = surface_rate_extinction(z0, &g);
        settling.push(SettlingCheck::new(SettlingKind::SurfaceRate, g, z0, settling_time_z(z0, &g), run));
    }
    for (g, e0) in tracking_grid() {
        let run = tracking_error_extinction(e0, &g);
        settling.push(SettlingCheck::new(SettlingKind::TrackingError, g, e0, settling_time_e(e0, &g), run));
    }
    let initials = random_initial_errors(REACHING_TRIALS + 1, REACHING_SEED);
    let mut reaching: Vec<ReachingCheck> = initials[..REACHING_TRIALS]
        .iter()
        .enumerate()
        .map(|(i, e)| reaching_check(*e, REACHING_RATIO, 1000 + i as u64))
        .collect();
    reaching.push(reaching_check(initials[REACHING_TRIALS], VIOLATION_RATIO, 2000));
    let mut report = TheoremReport {
        settling_tolerance: SETTLING_REL_TOL,
        settled_level: SETTLED_LEVEL,
        reaching_band: REACHING_BAND,
        settling,
        reaching,
        passed: false,
    };
    report.passed = report.failures() == 0;
    report
}

impl std::fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "settling times (tolerance {:.0}%, must stay below {:e} afterwards)",
            self.settling_tolerance * 100.0,
            self.settled_level
        )?;
        writeln!(
            f,
            "{:<15} {:>4} {:>4} {:>5} {:>5} {:>5} {:>8} {:>12} {:>12} {:>10}  status",
            "kind", "k1", "k2", "phi", "mu", "beta", "initial", "predicted", "measured", "rel_err"
        )?;
        for c in &self.settling {
            let kind = match c.kind {
                SettlingKind::SurfaceRate => "surface-rate",
                SettlingKind::TrackingError => "tracking-error",
            };
            writeln!(
                f,
                "{:<15} {:>4} {:>4} {:>5} {:>5} {:>5} {:>8} {:>12.6} {:>12.6} {:>10.3e}  {}",
                kind,
                c.gains.kappa1,
                c.gains.kappa2,
                c.gains.phi,
                c.gains.mu,
                c.gains.beta,
                c.initial,
                c.predicted,
                c.measured,
                c.rel_error,
                c.status.label()
            )?;
        }
        writeln!(f)?;
        writeln!(f, "reaching (band |sigma| < {:e})", self.reaching_band)?;
        for c in &self.reaching {
            let entry = match c.outcome.entry_time {
                Some([a, b]) => format!("entry x {a:.2} s, y {b:.2} s"),
                None => "band not reached".to_string(),
            };
            writeln!(
                f,
                "seed {:>4}  ratio {:>4}  {:<32} increasing steps {:>3}  {}",
                c.seed,
                c.disturbance_ratio,
                entry,
                c.outcome.increasing_steps,
                c.status.label()
            )?;
        }
        writeln!(f)?;
        write!(
            f,
            "{}: {} failing check(s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.failures()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_decay_never_goes_extinct_before_floor() {
        // x' = -x: exponential decay reaches 1e-300 at t = 300 ln 10
        let run = integrate_to_extinction(
            |x| -x,
            1.0,
            ExtinctionOptions {
                hold_fraction: 0.0,
                ..Default::default()
            },
        );
        assert!((run.time - 300.0 * 10f64.ln()).abs() < 1e-2 * 690.0);
    }

    #[test]
    fn constant_rate_crossing_is_interpolated() {
        // x' = -sign(x): reaches zero at exactly t = x0
        let run = integrate_to_extinction(|x| -x.signum(), 0.7, ExtinctionOptions::default());
        assert!((run.time - 0.7).abs() < 1e-9, "{}", run.time);
    }
}
