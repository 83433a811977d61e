//! Run configuration and its TOML file format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controllers::ControllerSpec;
use crate::disturbance::DisturbanceSpec;
use crate::error::{Error, Result};
use crate::flatness::V_MIN;
use crate::model::{Pose, RobotGeometry};
use crate::trajectory::TrajectorySpec;

/// Actuator limits on the body twist.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    pub v_max: f64,
    pub w_max: f64,
}

impl Default for Limits {
    /// 0.22 m/s and 2.84 rad/s.
    fn default() -> Self {
        Self {
            v_max: 0.22,
            w_max: 2.84,
        }
    }
}

/// Initial robot state. Missing values are taken from the reference at
/// `t = 0` (pose, heading, speed and turn rate).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    #[serde(default)]
    pub pose: Option<Pose>,
    #[serde(default)]
    pub speed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub trajectory: TrajectorySpec,
    #[serde(default)]
    pub controller: ControllerSpec,
    /// Second controller for side-by-side comparisons.
    #[serde(default)]
    pub baseline: Option<ControllerSpec>,
    #[serde(default)]
    pub disturbance: DisturbanceSpec,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub geometry: RobotGeometry,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Physics steps per control update.
    #[serde(default = "default_decimation")]
    pub control_decimation: u32,
    #[serde(default)]
    pub initial: InitialState,
    /// Added to every band-noise seed.
    #[serde(default)]
    pub seed: u64,
}

fn default_name() -> String {
    "scenario".to_string()
}

fn default_dt() -> f64 {
    0.01
}

fn default_duration() -> f64 {
    140.0
}

fn default_decimation() -> u32 {
    1
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: default_name(),
            trajectory: TrajectorySpec::default(),
            controller: ControllerSpec::default(),
            baseline: None,
            disturbance: DisturbanceSpec::none(),
            limits: Limits::default(),
            geometry: RobotGeometry::default(),
            dt: default_dt(),
            duration: default_duration(),
            control_decimation: default_decimation(),
            initial: InitialState::default(),
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes to TOML")
    }

    /// Reads and parses a scenario file; does not validate it.
    pub fn load(path: &Path) -> std::result::Result<Self, LoadError> {
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|source| LoadError::Parse {
            path: path.display().to_string(),
            source,
        })
    }

    /// Number of integration steps; the trace has one more row.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::invalid("duration", format!("must be > 0, got {}", self.duration)));
        }
        if self.steps() == 0 {
            return Err(Error::invalid("duration", "shorter than one time step"));
        }
        if self.control_decimation == 0 {
            return Err(Error::invalid("control_decimation", "must be >= 1"));
        }
        if !(self.limits.v_max.is_finite() && self.limits.v_max > 0.0) {
            return Err(Error::invalid("limits.v_max", "must be > 0"));
        }
        if !(self.limits.w_max.is_finite() && self.limits.w_max > 0.0) {
            return Err(Error::invalid("limits.w_max", "must be > 0"));
        }
        self.geometry.validate()?;
        self.trajectory.validate("trajectory")?;
        self.controller.validate("controller")?;
        if let Some(b) = &self.baseline {
            b.validate("baseline")?;
        }
        self.disturbance.validate("disturbance")?;
        if let Some(p) = &self.initial.pose {
            if !p.is_finite() {
                return Err(Error::invalid("initial.pose", "must be finite"));
            }
        }
        let speed = self.initial_speed();
        if !(speed.abs() >= V_MIN) {
            return Err(Error::invalid(
                "initial.speed",
                format!("|v| must be >= {V_MIN} m/s, got {speed}"),
            ));
        }
        if speed.abs() > self.limits.v_max {
            return Err(Error::invalid(
                "initial.speed",
                format!("exceeds v_max = {}", self.limits.v_max),
            ));
        }
        Ok(())
    }

    /// Initial commanded speed (explicit or the reference speed at t = 0).
    pub fn initial_speed(&self) -> f64 {
        self.initial
            .speed
            .unwrap_or_else(|| self.trajectory.eval(0.0).gamma_dot.norm())
    }
}

/// Built-in scenarios shipped with the project.
pub mod presets {
    use super::*;
    use crate::controllers::{AxisGains, Chattering, FbsmcGains};
    use crate::disturbance::gust_magnitude_for_ratio;

    /// Onset of the wind gust in the gust presets.
    pub const GUST_START: f64 = 70.0;
    pub const GUST_RISE: f64 = 1.0;

    /// Unit circle at 0.15 m/s for 140 s, starting on the reference, no
    /// disturbance, derived-mode controller with sign switching.
    pub fn nominal() -> Scenario {
        Scenario {
            name: "nominal".to_string(),
            baseline: Some(fbsmc_baseline()),
            ..Default::default()
        }
    }

    /// Same as [`nominal`] but starting 5 cm off the path in both axes.
    pub fn offset_start() -> Scenario {
        Scenario {
            name: "offset".to_string(),
            initial: InitialState {
                pose: Some(Pose::new(1.05, -0.05, std::f64::consts::FRAC_PI_2)),
                speed: Some(0.15),
            },
            ..nominal()
        }
    }

    /// Nominal circle with a smooth wind gust on x and y at t = 70 s, sized so
    /// that `kappa1 * max|flat disturbance| = ratio * upsilon2` for the
    /// published gains.
    pub fn wind_gust(ratio: f64) -> Scenario {
        let m = gust_magnitude_for_ratio(ratio, &AxisGains::PUBLISHED, GUST_RISE);
        Scenario {
            name: format!("gust-{ratio}x"),
            disturbance: DisturbanceSpec::wind_gust(GUST_START, GUST_RISE, [m, m, 0.0]),
            ..nominal()
        }
    }

    pub fn fbsmc_baseline() -> ControllerSpec {
        ControllerSpec::Fbsmc {
            gains: FbsmcGains::default(),
            chattering: Chattering::Sign,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse `{path}`: {source}")]
    Parse {
        path: String,
        #[source]
        source: toml::de::Error,
    },
}
