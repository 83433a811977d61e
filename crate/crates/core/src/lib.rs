//! Flatness-based tracking control of a differential-drive robot with an
//! integral nonlinear hyperplane sliding mode controller (INH-SMC), a
//! linear-surface sliding mode baseline (FBSMC), a deterministic closed-loop
//! simulator and tracking metrics.

// range checks are written as `!(x >= lo)` so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod controllers;
pub mod disturbance;
pub mod error;
pub mod flatness;
pub mod metrics;
pub mod model;
pub mod scenario;
pub mod sim;
pub mod trajectory;
pub mod verify;

pub use controllers::{
    Axis, AxisGains, Chattering, Controller, ControllerSpec, EquivalentMode, FbsmcGains, GainSet,
    TrackingError,
};
pub use disturbance::DisturbanceSpec;
pub use error::{Error, Result};
pub use flatness::{FlatInputs, FlatPoint, VirtualControl, V_MIN};
pub use metrics::{ComparisonReport, MetricsReport};
pub use model::{BodyTwist, DisturbanceSample, Pose, RobotGeometry, WheelSpeeds};
pub use scenario::{Limits, Scenario};
pub use sim::{run, run_baseline, SimTrace, Simulator, TraceRow};
pub use trajectory::TrajectorySpec;
