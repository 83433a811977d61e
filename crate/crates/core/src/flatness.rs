//! Flat outputs of the unicycle and the maps to and from the Brunovsky
//! (double-integrator) coordinates.
//!
//! The flat output is the position `(x, y)`. Its second derivative is
//! `N(theta, v) * (v_dot, theta_dot)` plus a disturbance term, so inverting
//! `N` turns the robot into two decoupled double integrators. `N` is
//! singular at `v = 0`; every inversion goes through [`V_MIN`].

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BodyTwist, DisturbanceSample, Pose};

/// Speed floor (m/s) below which the input matrix is treated as singular.
pub const V_MIN: f64 = 0.01;

/// Flat output with its first two derivatives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FlatPoint {
    pub gamma: Vector2<f64>,
    pub gamma_dot: Vector2<f64>,
    pub gamma_ddot: Vector2<f64>,
}

impl FlatPoint {
    pub fn is_finite(&self) -> bool {
        self.gamma.iter().chain(&self.gamma_dot).chain(&self.gamma_ddot).all(|c| c.is_finite())
    }
}

/// Flat-space accelerations commanded by a controller.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct VirtualControl {
    pub vx: f64,
    pub vy: f64,
}

impl VirtualControl {
    pub const fn new(vx: f64, vy: f64) -> Self {
        Self { vx, vy }
    }

    pub fn as_vector(&self) -> Vector2<f64> {
        Vector2::new(self.vx, self.vy)
    }
}

/// Inputs of the extended unicycle: `un1 = v_dot`, `un2 = theta_dot = w`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FlatInputs {
    pub un1: f64,
    pub un2: f64,
}

impl FlatInputs {
    pub const fn new(un1: f64, un2: f64) -> Self {
        Self { un1, un2 }
    }
}

/// Disturbance as seen by the double integrators, in m/s^2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FlatDisturbance {
    pub x: f64,
    pub y: f64,
}

/// Flat output and derivatives from pose, body twist and flat inputs.
///
/// Only `t.v` is used; the rotation rate enters through `u.un2`.
pub fn flat_from_state(p: &Pose, t: BodyTwist, u: FlatInputs) -> FlatPoint {
    let (sin, cos) = p.theta.sin_cos();
    FlatPoint {
        gamma: Vector2::new(p.x, p.y),
        gamma_dot: Vector2::new(t.v * cos, t.v * sin),
        gamma_ddot: Vector2::new(
            u.un1 * cos - u.un2 * t.v * sin,
            u.un1 * sin + u.un2 * t.v * cos,
        ),
    }
}

/// Recovers pose and twist from a flat point.
///
/// The heading uses the four-quadrant arctangent, so the returned `v` is
/// always non-negative.
pub fn state_from_flat(f: &FlatPoint) -> Result<(Pose, BodyTwist)> {
    let gd = f.gamma_dot;
    let speed_sq = gd.norm_squared();
    let speed = speed_sq.sqrt();
    if !(speed >= V_MIN) {
        return Err(Error::SingularFlatPoint { speed, v_min: V_MIN });
    }
    let theta = gd.y.atan2(gd.x);
    let w = (gd.x * f.gamma_ddot.y - f.gamma_ddot.x * gd.y) / speed_sq;
    Ok((Pose::new(f.gamma.x, f.gamma.y, theta), BodyTwist::new(speed, w)))
}

/// The input matrix `N = [[cos, -v sin], [sin, v cos]]`; `det N = v`.
pub fn input_matrix(theta: f64, v: f64) -> Matrix2<f64> {
    let (sin, cos) = theta.sin_cos();
    Matrix2::new(cos, -v * sin, sin, v * cos)
}

/// Applies `N^-1` in closed form.
pub fn virtual_to_inputs(vc: VirtualControl, theta: f64, v: f64) -> Result<FlatInputs> {
    if !(v.abs() >= V_MIN) {
        return Err(Error::SingularFlatPoint {
            speed: v.abs(),
            v_min: V_MIN,
        });
    }
    let (sin, cos) = theta.sin_cos();
    Ok(FlatInputs {
        un1: vc.vx * cos + vc.vy * sin,
        un2: (-vc.vx * sin + vc.vy * cos) / v,
    })
}

/// Pushes a pose-level disturbance into flat coordinates.
pub fn disturbance_pushforward(d: &DisturbanceSample, theta: f64, v: f64) -> FlatDisturbance {
    let (sin, cos) = theta.sin_cos();
    FlatDisturbance {
        x: d.dx_dot - v * d.dtheta * sin,
        y: d.dy_dot + v * d.dtheta * cos,
    }
}
