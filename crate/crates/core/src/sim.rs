//! Fixed-step closed-loop simulator.
//!
//! Each step, in order: evaluate the reference; form the actual flat point
//! from the pose, the applied twist and the disturbance; run the
//! controller; invert the input matrix; integrate the commanded speed;
//! saturate; record the row; advance the pose with classical RK4 holding the
//! twist and sampling the disturbance at stage times.

use std::io::Write;

use serde::Serialize;

use crate::controllers::{Controller, ControllerSpec, SurfaceReadout, TrackingError};
use crate::disturbance::DisturbanceSchedule;
use crate::error::Result;
use crate::flatness::{
    disturbance_pushforward, flat_from_state, state_from_flat, virtual_to_inputs, FlatDisturbance,
    FlatInputs, FlatPoint, VirtualControl,
};
use crate::model::{pose_derivative, BodyTwist, DisturbanceSample, Pose};
use crate::scenario::{Limits, Scenario};

/// Componentwise clamp of a twist into the actuator box.
pub fn saturate(t: BodyTwist, limits: &Limits) -> BodyTwist {
    BodyTwist {
        v: t.v.clamp(-limits.v_max, limits.v_max),
        w: t.w.clamp(-limits.w_max, limits.w_max),
    }
}

/// One RK4 step of the disturbed unicycle with the twist held constant.
pub fn rk4_pose(pose: &Pose, twist: BodyTwist, schedule: &DisturbanceSchedule, t: f64, dt: f64) -> Pose {
    let f = |p: &Pose, tt: f64| pose_derivative(p, twist, &schedule.sample(tt));
    let shift = |p: &Pose, k: &crate::model::PoseDerivative, h: f64| {
        Pose::new(p.x + h * k.x_dot, p.y + h * k.y_dot, p.theta + h * k.theta_dot)
    };
    let k1 = f(pose, t);
    let k2 = f(&shift(pose, &k1, 0.5 * dt), t + 0.5 * dt);
    let k3 = f(&shift(pose, &k2, 0.5 * dt), t + 0.5 * dt);
    let k4 = f(&shift(pose, &k3, dt), t + dt);
    let w = dt / 6.0;
    Pose::new(
        pose.x + w * (k1.x_dot + 2.0 * k2.x_dot + 2.0 * k3.x_dot + k4.x_dot),
        pose.y + w * (k1.y_dot + 2.0 * k2.y_dot + 2.0 * k3.y_dot + k4.y_dot),
        pose.theta + w * (k1.theta_dot + 2.0 * k2.theta_dot + 2.0 * k3.theta_dot + k4.theta_dot),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub pose: Pose,
    /// Twist after the command integrator, before saturation.
    pub cmd: BodyTwist,
    /// Twist applied to the robot over `[t, t + dt)`.
    pub sat: BodyTwist,
    pub actual: FlatPoint,
    pub desired: FlatPoint,
    pub error: TrackingError,
    pub surfaces: SurfaceReadout,
    pub control: VirtualControl,
    pub inputs: FlatInputs,
    pub disturbance: DisturbanceSample,
    pub flat_disturbance: FlatDisturbance,
    /// The input matrix was singular; `inputs` repeat the previous row.
    pub fault: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimTrace {
    pub scenario: String,
    pub controller: String,
    pub dt: f64,
    pub limits: Limits,
    pub rows: Vec<TraceRow>,
}

impl SimTrace {
    pub fn duration(&self) -> f64 {
        self.rows.len().saturating_sub(1) as f64 * self.dt
    }

    pub fn fault_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.fault).count()
    }

    /// Trace as CSV with the fixed column order of [`CSV_COLUMNS`].
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(CsvRow::from(r))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

/// Column order of the trace CSV.
pub const CSV_COLUMNS: [&str; 28] = [
    "t", "x", "y", "theta", "v_cmd", "w_cmd", "v_sat", "w_sat", "gx", "gy", "gxd", "gyd", "ex",
    "ey", "sx", "sy", "sigx", "sigy", "vx", "vy", "un1", "un2", "dx", "dy", "dth", "wpx", "wpy",
    "fault",
];

#[derive(Serialize)]
struct CsvRow {
    t: f64,
    x: f64,
    y: f64,
    theta: f64,
    v_cmd: f64,
    w_cmd: f64,
    v_sat: f64,
    w_sat: f64,
    gx: f64,
    gy: f64,
    gxd: f64,
    gyd: f64,
    ex: f64,
    ey: f64,
    sx: f64,
    sy: f64,
    sigx: f64,
    sigy: f64,
    vx: f64,
    vy: f64,
    un1: f64,
    un2: f64,
    dx: f64,
    dy: f64,
    dth: f64,
    wpx: f64,
    wpy: f64,
    fault: u8,
}

impl From<&TraceRow> for CsvRow {
    fn from(r: &TraceRow) -> Self {
        Self {
            t: r.t,
            x: r.pose.x,
            y: r.pose.y,
            theta: r.pose.wrapped_theta(),
            v_cmd: r.cmd.v,
            w_cmd: r.cmd.w,
            v_sat: r.sat.v,
            w_sat: r.sat.w,
            gx: r.actual.gamma.x,
            gy: r.actual.gamma.y,
            gxd: r.desired.gamma.x,
            gyd: r.desired.gamma.y,
            ex: r.error.x.e,
            ey: r.error.y.e,
            sx: r.surfaces.s[0],
            sy: r.surfaces.s[1],
            sigx: r.surfaces.sigma[0],
            sigy: r.surfaces.sigma[1],
            vx: r.control.vx,
            vy: r.control.vy,
            un1: r.inputs.un1,
            un2: r.inputs.un2,
            dx: r.disturbance.dx,
            dy: r.disturbance.dy,
            dth: r.disturbance.dtheta,
            wpx: r.flat_disturbance.x,
            wpy: r.flat_disturbance.y,
            fault: r.fault as u8,
        }
    }
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct Simulator {
    scenario: Scenario,
    schedule: DisturbanceSchedule,
    controller: Controller,
    label: String,
    step: usize,
    pose: Pose,
    /// Command held over the current interval.
    cmd: BodyTwist,
    control: VirtualControl,
    inputs: FlatInputs,
}

impl Simulator {
    /// Builds the initial state. The scenario is validated first.
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let reference = scenario.trajectory.eval(0.0);
        let (ref_pose, ref_twist) = state_from_flat(&reference)?;
        let (pose, w0) = match scenario.initial.pose {
            Some(p) => (p, 0.0),
            None => (ref_pose, ref_twist.w),
        };
        let v0 = scenario.initial_speed();
        Ok(Self {
            schedule: DisturbanceSchedule::new(&scenario.disturbance, scenario.seed),
            controller: scenario.controller.build(),
            label: scenario.controller.label(),
            scenario: scenario.clone(),
            step: 0,
            pose,
            cmd: BodyTwist::new(v0, w0),
            control: VirtualControl::default(),
            inputs: FlatInputs::new(0.0, w0),
        })
    }

    /// Same as [`Simulator::new`] but runs `spec` instead of the
    /// scenario's own controller.
    pub fn with_controller(scenario: &Scenario, spec: &ControllerSpec) -> Result<Self> {
        spec.validate("controller")?;
        let mut sim = Self::new(scenario)?;
        sim.controller = spec.build();
        sim.label = spec.label();
        Ok(sim)
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.scenario.dt
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    /// Computes the control at the current time, records it, and advances
    /// the plant by one step.
    pub fn step(&mut self) -> TraceRow {
        let row = self.control_row();
        self.advance(row.sat);
        row
    }

    fn control_row(&mut self) -> TraceRow {
        let sc = &self.scenario;
        let dt = sc.dt;
        let t = self.time();
        let desired = sc.trajectory.eval(t);
        let d = self.schedule.sample(t);
        let applied = saturate(self.cmd, &sc.limits);
        let flat_disturbance = disturbance_pushforward(&d, self.pose.theta, applied.v);

        let mut actual = flat_from_state(&self.pose, applied, self.inputs);
        actual.gamma_dot.x += d.dx;
        actual.gamma_dot.y += d.dy;
        actual.gamma_ddot.x += flat_disturbance.x;
        actual.gamma_ddot.y += flat_disturbance.y;

        let error = TrackingError::between(&actual, &desired);
        let decimation = sc.control_decimation as usize;
        if self.step % decimation == 0 {
            self.control = self.controller.step(&error, &desired, dt * decimation as f64);
        }

        let (inputs, fault) = match virtual_to_inputs(self.control, self.pose.theta, self.cmd.v) {
            Ok(u) if u.un1.is_finite() && u.un2.is_finite() => (u, false),
            _ => (self.inputs, true),
        };
        self.inputs = inputs;
        let v = (self.cmd.v + inputs.un1 * dt).clamp(-sc.limits.v_max, sc.limits.v_max);
        self.cmd = BodyTwist::new(v, inputs.un2);
        let sat = saturate(self.cmd, &sc.limits);

        TraceRow {
            t,
            pose: self.pose,
            cmd: self.cmd,
            sat,
            actual,
            desired,
            error,
            surfaces: self.controller.readout(),
            control: self.control,
            inputs,
            disturbance: d,
            flat_disturbance,
            fault,
        }
    }

    fn advance(&mut self, twist: BodyTwist) {
        self.pose = rk4_pose(&self.pose, twist, &self.schedule, self.time(), self.scenario.dt);
        self.step += 1;
    }

    /// Runs to the end and returns the full trace (`steps + 1` rows).
    pub fn run(mut self) -> SimTrace {
        let n = self.scenario.steps();
        let mut rows = Vec::with_capacity(n + 1);
        for k in 0..=n {
            if k < n {
                rows.push(self.step());
            } else {
                rows.push(self.control_row());
            }
        }
        SimTrace {
            scenario: self.scenario.name.clone(),
            controller: self.label,
            dt: self.scenario.dt,
            limits: self.scenario.limits,
            rows,
        }
    }
}

/// Validates and runs a scenario with its primary controller.
pub fn run(scenario: &Scenario) -> Result<SimTrace> {
    Ok(Simulator::new(scenario)?.run())
}

/// Runs the scenario's baseline controller, if it names one.
pub fn run_baseline(scenario: &Scenario) -> Result<Option<SimTrace>> {
    match &scenario.baseline {
        Some(spec) => Ok(Some(Simulator::with_controller(scenario, spec)?.run())),
        None => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controllers::{Chattering, ControllerSpec, EquivalentMode, GainSet};
    use crate::disturbance::DisturbanceSpec;
    use crate::trajectory::TrajectorySpec;

    #[test]
    fn saturate_examples() {
        let l = Limits::default();
        assert_eq!(saturate(BodyTwist::new(0.1, 1.0), &l), BodyTwist::new(0.1, 1.0));
        assert_eq!(saturate(BodyTwist::new(0.5, 0.0), &l), BodyTwist::new(0.22, 0.0));
        assert_eq!(saturate(BodyTwist::new(0.0, -5.0), &l), BodyTwist::new(0.0, -2.84));
        let once = saturate(BodyTwist::new(-3.0, 9.0), &l);
        assert_eq!(saturate(once, &l), once);
    }

    #[test]
    fn row_count() {
        let s = Scenario {
            duration: 1.0,
            ..Default::default()
        };
        let trace = run(&s).unwrap();
        assert_eq!(trace.rows.len(), 101);
        assert_eq!(trace.rows[100].t, 1.0);
    }

    #[test]
    fn equilibrium_tracking_on_a_line() {
        // rounding in the initial row is enough to trigger the sign switch,
        // so pure sign switching only holds the error to a chattering band
        for (chattering, tol) in [(Chattering::boundary_layer(), 1e-10), (Chattering::Sign, 1e-5)] {
            let s = Scenario {
                trajectory: TrajectorySpec::LineSegmentSmoothed {
                    start: [0.0, 0.0],
                    heading: 0.3,
                    initial_speed: 0.1,
                    cruise_speed: 0.1,
                    ramp_time: 1.0,
                    start_time: 0.0,
                },
                controller: ControllerSpec::default().with_chattering(chattering),
                duration: 20.0,
                ..Default::default()
            };
            let trace = run(&s).unwrap();
            for r in &trace.rows {
                assert!(r.error.x.e.abs() < tol && r.error.y.e.abs() < tol, "t={} {:?}", r.t, r.error);
            }
            let last = trace.rows.last().unwrap();
            assert!((last.pose.x - 2.0 * 0.3f64.cos()).abs() < tol);
            assert!((last.pose.y - 2.0 * 0.3f64.sin()).abs() < tol);
        }
    }

    #[test]
    fn invalid_scenario_fails_before_stepping() {
        let s = Scenario {
            dt: 0.0,
            ..Default::default()
        };
        assert_eq!(run(&s).unwrap_err().field(), Some("dt"));
    }

    #[test]
    fn csv_header_matches_column_list() {
        let s = Scenario {
            duration: 0.05,
            ..Default::default()
        };
        let csv = run(&s).unwrap().to_csv_string();
        let header = csv.lines().next().unwrap();
        assert_eq!(header, CSV_COLUMNS.join(","));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn singular_speed_is_recorded_as_fault() {
        // reference turns the robot around: the commanded speed must cross zero
        let s = Scenario {
            trajectory: TrajectorySpec::LineSegmentSmoothed {
                start: [0.0, 0.0],
                heading: std::f64::consts::PI,
                initial_speed: 0.1,
                cruise_speed: 0.1,
                ramp_time: 1.0,
                start_time: 0.0,
            },
            initial: crate::scenario::InitialState {
                pose: Some(Pose::new(0.0, 0.0, 0.0)),
                speed: Some(0.1),
            },
            controller: ControllerSpec::Fbsmc {
                gains: Default::default(),
                chattering: Chattering::Sign,
            },
            duration: 20.0,
            ..Default::default()
        };
        let trace = run(&s).unwrap();
        let mut faults = 0;
        for w in trace.rows.windows(2) {
            if w[1].fault {
                faults += 1;
                assert_eq!(w[1].inputs, w[0].inputs);
            }
        }
        assert!(faults > 0);
        for r in &trace.rows {
            assert!(r.sat.v.is_finite() && r.sat.w.is_finite());
        }
    }

    #[test]
    fn gust_is_visible_in_trace() {
        let s = Scenario {
            disturbance: DisturbanceSpec::wind_gust(5.0, 1.0, [0.01, 0.0, 0.0]),
            controller: ControllerSpec::Inhsmc {
                gains: GainSet::PUBLISHED,
                mode: EquivalentMode::Derived,
                chattering: Chattering::Sign,
            },
            duration: 10.0,
            ..Default::default()
        };
        let trace = run(&s).unwrap();
        assert_eq!(trace.rows[400].disturbance.dx, 0.0);
        assert_eq!(trace.rows[700].disturbance.dx, 0.01);
        assert!(trace.rows[550].flat_disturbance.x > 0.0);
    }
}
