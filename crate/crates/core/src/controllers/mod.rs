//! Flat-space tracking controllers.
//!
//! Both controllers produce a [`VirtualControl`] (flat accelerations) from
//! the tracking error and the reference; the simulator maps it back to
//! robot inputs through the flatness inverse.

mod fbsmc;
mod gains;
mod inhsmc;
mod settling;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flatness::{FlatPoint, VirtualControl};

pub use fbsmc::{fbsmc_step, Fbsmc};
pub use gains::{AxisGains, FbsmcGains, GainSet};
pub use inhsmc::{
    equivalent_control, hyperplane_sigma, inhsmc_step, itsm_surface_step, switching_control,
    AxisSliding, InhSmc, SlidingState, EPS_ERROR,
};
pub use settling::{reaching_bound_holds, settling_time_e, settling_time_z};

/// `sign(x)` with `sign(0) = 0`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `|x|^p * sign(x)`, zero at zero.
#[inline]
pub fn signed_power(x: f64, p: f64) -> f64 {
    sign(x) * x.abs().powf(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub const BOTH: [Axis; 2] = [Axis::X, Axis::Y];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Position and velocity error along one flat axis (actual minus desired).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AxisError {
    pub e: f64,
    pub e_dot: f64,
}

impl AxisError {
    pub const fn new(e: f64, e_dot: f64) -> Self {
        Self { e, e_dot }
    }
}

impl std::ops::Neg for AxisError {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.e, -self.e_dot)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrackingError {
    pub x: AxisError,
    pub y: AxisError,
}

impl TrackingError {
    pub fn between(actual: &FlatPoint, desired: &FlatPoint) -> Self {
        let e = actual.gamma - desired.gamma;
        let e_dot = actual.gamma_dot - desired.gamma_dot;
        Self {
            x: AxisError::new(e.x, e_dot.x),
            y: AxisError::new(e.y, e_dot.y),
        }
    }

    pub fn axis(&self, axis: Axis) -> AxisError {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }
}

/// Reference velocity and acceleration along one axis.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AxisReference {
    pub vel: f64,
    pub acc: f64,
}

impl AxisReference {
    pub fn of(reference: &FlatPoint, axis: Axis) -> Self {
        let i = axis.index();
        Self {
            vel: reference.gamma_dot[i],
            acc: reference.gamma_ddot[i],
        }
    }
}

/// How the switching function is realised.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Chattering {
    /// Discontinuous `sign`.
    #[default]
    Sign,
    /// Saturated linear ramp `clamp(x / width, -1, 1)`.
    BoundaryLayer { width: f64 },
}

impl Chattering {
    pub const DEFAULT_WIDTH: f64 = 0.01;

    pub fn boundary_layer() -> Self {
        Chattering::BoundaryLayer {
            width: Self::DEFAULT_WIDTH,
        }
    }

    #[inline]
    pub fn switch(&self, x: f64) -> f64 {
        match *self {
            Chattering::Sign => sign(x),
            Chattering::BoundaryLayer { width } => (x / width).clamp(-1.0, 1.0),
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        match *self {
            Chattering::Sign => Ok(()),
            Chattering::BoundaryLayer { width } if width.is_finite() && width > 0.0 => Ok(()),
            Chattering::BoundaryLayer { width } => Err(Error::invalid(
                format!("{field}.width"),
                format!("boundary layer width must be > 0, got {width}"),
            )),
        }
    }
}

/// Which equivalent-control term the hyperplane law uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivalentMode {
    /// Literal published form, built on the reference velocity.
    Paper,
    /// Form that cancels the nominal surface dynamics so that the closed
    /// loop obeys the reaching dynamics used in the stability argument.
    #[default]
    Derived,
}

/// Surface readout recorded for every control step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SurfaceReadout {
    pub s: [f64; 2],
    pub s_dot: [f64; 2],
    pub sigma: [f64; 2],
}

/// Serializable controller choice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerSpec {
    Inhsmc {
        #[serde(default)]
        gains: GainSet,
        #[serde(default)]
        mode: EquivalentMode,
        #[serde(default)]
        chattering: Chattering,
    },
    Fbsmc {
        #[serde(default)]
        gains: FbsmcGains,
        #[serde(default)]
        chattering: Chattering,
    },
}

impl Default for ControllerSpec {
    fn default() -> Self {
        ControllerSpec::Inhsmc {
            gains: GainSet::PUBLISHED,
            mode: EquivalentMode::Derived,
            chattering: Chattering::Sign,
        }
    }
}

impl ControllerSpec {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        match self {
            ControllerSpec::Inhsmc {
                gains, chattering, ..
            } => {
                gains.validate(&format!("{prefix}.gains"))?;
                chattering.validate(&format!("{prefix}.chattering"))
            }
            ControllerSpec::Fbsmc { gains, chattering } => {
                gains.validate(&format!("{prefix}.gains"))?;
                chattering.validate(&format!("{prefix}.chattering"))
            }
        }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            ControllerSpec::Inhsmc { mode, .. } => match mode {
                EquivalentMode::Paper => "INH-SMC (paper)".to_string(),
                EquivalentMode::Derived => "INH-SMC (derived)".to_string(),
            },
            ControllerSpec::Fbsmc { .. } => "FBSMC".to_string(),
        }
    }

    pub fn with_mode(mut self, new_mode: EquivalentMode) -> Self {
        if let ControllerSpec::Inhsmc { mode, .. } = &mut self {
            *mode = new_mode;
        }
        self
    }

    pub fn with_chattering(mut self, c: Chattering) -> Self {
        match &mut self {
            ControllerSpec::Inhsmc { chattering, .. } | ControllerSpec::Fbsmc { chattering, .. } => {
                *chattering = c
            }
        }
        self
    }

    pub fn build(&self) -> Controller {
        match *self {
            ControllerSpec::Inhsmc {
                gains,
                mode,
                chattering,
            } => Controller::Inhsmc(InhSmc::new(gains, mode, chattering)),
            ControllerSpec::Fbsmc { gains, chattering } => {
                Controller::Fbsmc(Fbsmc::new(gains, chattering))
            }
        }
    }
}

/// A running controller instance; owns its internal state.
#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    Inhsmc(InhSmc),
    Fbsmc(Fbsmc),
}

impl Controller {
    pub fn step(&mut self, err: &TrackingError, reference: &FlatPoint, dt: f64) -> VirtualControl {
        match self {
            Controller::Inhsmc(c) => c.step(err, reference, dt),
            Controller::Fbsmc(c) => c.step(err, reference),
        }
    }

    pub fn readout(&self) -> SurfaceReadout {
        match self {
            Controller::Inhsmc(c) => c.readout(),
            Controller::Fbsmc(c) => c.readout(),
        }
    }
}
