//! Differential-drive kinematics.
//!
//! Wheel/body velocity maps and the pose derivative of the unicycle model
//! with an additive, unknown-but-bounded disturbance on every coordinate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar configuration. `theta` is kept unwrapped.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub const fn new(x: f64, y: f64, theta: f64) -> Self {
        Self { x, y, theta }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }

    /// Heading wrapped into (-pi, pi], for display only.
    pub fn wrapped_theta(&self) -> f64 {
        wrap_angle(self.theta)
    }
}

/// Translational (`v`, m/s) and rotational (`w`, rad/s) body velocity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BodyTwist {
    pub v: f64,
    pub w: f64,
}

impl BodyTwist {
    pub const fn new(v: f64, w: f64) -> Self {
        Self { v, w }
    }
}

/// Left and right wheel angular rates in rad/s.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WheelSpeeds {
    pub left: f64,
    pub right: f64,
}

impl WheelSpeeds {
    pub const fn new(left: f64, right: f64) -> Self {
        Self { left, right }
    }
}

/// Wheel radius and wheel separation, both in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotGeometry {
    pub wheel_radius: f64,
    pub wheel_separation: f64,
}

impl Default for RobotGeometry {
    /// Small differential-drive platform: r = 0.033 m, D = 0.160 m.
    fn default() -> Self {
        Self {
            wheel_radius: 0.033,
            wheel_separation: 0.160,
        }
    }
}

impl RobotGeometry {
    pub fn new(wheel_radius: f64, wheel_separation: f64) -> Result<Self> {
        let g = Self {
            wheel_radius,
            wheel_separation,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wheel_radius.is_finite() && self.wheel_radius > 0.0) {
            return Err(Error::invalid("geometry.wheel_radius", "must be finite and > 0"));
        }
        if !(self.wheel_separation.is_finite() && self.wheel_separation > 0.0) {
            return Err(Error::invalid(
                "geometry.wheel_separation",
                "must be finite and > 0",
            ));
        }
        Ok(())
    }
}

/// Additive disturbance on (x, y, theta) rates together with its exact time
/// derivative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSample {
    pub dx: f64,
    pub dy: f64,
    pub dtheta: f64,
    pub dx_dot: f64,
    pub dy_dot: f64,
    pub dtheta_dot: f64,
}

impl DisturbanceSample {
    pub const ZERO: Self = Self {
        dx: 0.0,
        dy: 0.0,
        dtheta: 0.0,
        dx_dot: 0.0,
        dy_dot: 0.0,
        dtheta_dot: 0.0,
    };

    /// Infinity norm of the disturbance value (not its derivative).
    pub fn norm_inf(&self) -> f64 {
        self.dx.abs().max(self.dy.abs()).max(self.dtheta.abs())
    }
}

impl std::ops::Add for DisturbanceSample {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            dx: self.dx + rhs.dx,
            dy: self.dy + rhs.dy,
            dtheta: self.dtheta + rhs.dtheta,
            dx_dot: self.dx_dot + rhs.dx_dot,
            dy_dot: self.dy_dot + rhs.dy_dot,
            dtheta_dot: self.dtheta_dot + rhs.dtheta_dot,
        }
    }
}

/// Time derivative of a [`Pose`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PoseDerivative {
    pub x_dot: f64,
    pub y_dot: f64,
    pub theta_dot: f64,
}

pub fn wheels_to_twist(u: WheelSpeeds, g: &RobotGeometry) -> BodyTwist {
    BodyTwist {
        v: 0.5 * g.wheel_radius * (u.left + u.right),
        w: g.wheel_radius / g.wheel_separation * (u.right - u.left),
    }
}

pub fn twist_to_wheels(t: BodyTwist, g: &RobotGeometry) -> WheelSpeeds {
    let half_track = 0.5 * t.w * g.wheel_separation;
    WheelSpeeds {
        left: (t.v - half_track) / g.wheel_radius,
        right: (t.v + half_track) / g.wheel_radius,
    }
}

/// Unicycle kinematics with additive disturbance. With `d` zero this is
/// the nominal model.
pub fn pose_derivative(p: &Pose, t: BodyTwist, d: &DisturbanceSample) -> PoseDerivative {
    let (sin, cos) = p.theta.sin_cos();
    PoseDerivative {
        x_dot: t.v * cos + d.dx,
        y_dot: t.v * sin + d.dy,
        theta_dot: t.w + d.dtheta,
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let mut a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn g() -> RobotGeometry {
        RobotGeometry::new(0.05, 0.2).unwrap()
    }

    #[test]
    fn wheel_maps() {
        let t = wheels_to_twist(WheelSpeeds::new(2.0, 2.0), &g());
        assert_abs_diff_eq!(t.v, 0.1, epsilon = 1e-15);
        assert_eq!(t.w, 0.0);

        assert_eq!(
            wheels_to_twist(WheelSpeeds::default(), &RobotGeometry::default()),
            BodyTwist::default()
        );

        let t = wheels_to_twist(WheelSpeeds::new(0.0, 2.0), &g());
        assert_abs_diff_eq!(t.v, 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(t.w, 0.5, epsilon = 1e-15);

        assert_eq!(twist_to_wheels(BodyTwist::default(), &g()), WheelSpeeds::default());
        let u = twist_to_wheels(BodyTwist::new(0.1, 0.0), &g());
        assert_abs_diff_eq!(u.left, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u.right, 2.0, epsilon = 1e-14);
        let u = twist_to_wheels(BodyTwist::new(0.05, 0.5), &g());
        assert_abs_diff_eq!(u.left, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u.right, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn geometry_rejects_nonpositive() {
        assert_eq!(
            RobotGeometry::new(0.0, 0.2).unwrap_err().field(),
            Some("geometry.wheel_radius")
        );
        assert_eq!(
            RobotGeometry::new(0.03, -1.0).unwrap_err().field(),
            Some("geometry.wheel_separation")
        );
    }

    #[test]
    fn pose_derivative_examples() {
        let z = DisturbanceSample::ZERO;
        let d = pose_derivative(&Pose::new(0.0, 0.0, 0.0), BodyTwist::new(1.0, 0.0), &z);
        assert_eq!((d.x_dot, d.y_dot, d.theta_dot), (1.0, 0.0, 0.0));

        let d = pose_derivative(
            &Pose::new(0.0, 0.0, std::f64::consts::FRAC_PI_2),
            BodyTwist::new(1.0, 0.5),
            &z,
        );
        assert_abs_diff_eq!(d.x_dot, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d.y_dot, 1.0, epsilon = 1e-15);
        assert_eq!(d.theta_dot, 0.5);

        let dist = DisturbanceSample {
            dx: 0.1,
            dy: -0.2,
            dtheta: 0.05,
            ..z
        };
        let d = pose_derivative(&Pose::default(), BodyTwist::new(1.0, 0.0), &dist);
        assert_abs_diff_eq!(d.x_dot, 1.1, epsilon = 1e-15);
        assert_abs_diff_eq!(d.y_dot, -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(d.theta_dot, 0.05, epsilon = 1e-15);
    }

    #[test]
    fn wrap() {
        assert_abs_diff_eq!(wrap_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(-0.5), -0.5, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn wheel_round_trip(v in -10.0..10.0f64, w in -10.0..10.0f64) {
            let geom = RobotGeometry::default();
            let back = wheels_to_twist(twist_to_wheels(BodyTwist::new(v, w), &geom), &geom);
            prop_assert!((back.v - v).abs() < 1e-12);
            prop_assert!((back.w - w).abs() < 1e-12);
        }

        #[test]
        fn disturbance_enters_linearly(
            x in -5.0..5.0f64, y in -5.0..5.0f64, th in -20.0..20.0f64,
            v in -1.0..1.0f64, w in -3.0..3.0f64,
            dx in -1.0..1.0f64, dy in -1.0..1.0f64, dth in -1.0..1.0f64,
        ) {
            let p = Pose::new(x, y, th);
            let t = BodyTwist::new(v, w);
            let d = DisturbanceSample { dx, dy, dtheta: dth, ..DisturbanceSample::ZERO };
            let a = pose_derivative(&p, t, &d);
            let b = pose_derivative(&p, t, &DisturbanceSample::ZERO);
            // exact up to one rounding of the sum
            prop_assert!((a.x_dot - b.x_dot - dx).abs() <= 4.0 * f64::EPSILON);
            prop_assert!((a.y_dot - b.y_dot - dy).abs() <= 4.0 * f64::EPSILON);
            prop_assert!((a.theta_dot - b.theta_dot - dth).abs() <= 8.0 * f64::EPSILON);
            let speed = b.x_dot.hypot(b.y_dot);
            prop_assert!((speed - v.abs()).abs() < 1e-12);
        }
    }
}
