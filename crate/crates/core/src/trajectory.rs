//! Analytic reference curves with exact first and second derivatives.

use std::f64::consts::PI;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flatness::{FlatPoint, V_MIN};

/// Reference trajectory. Time inside each curve is `tau = t - start_time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    /// `c + R (cos(w tau + phase), sin(w tau + phase))`.
    Circle {
        center: [f64; 2],
        radius: f64,
        angular_rate: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        start_time: f64,
    },
    /// Figure-eight of Gerono: `c + a (sin u, sin(2u) / 2)`, `u = w tau + phase`.
    Lemniscate {
        center: [f64; 2],
        scale: f64,
        angular_rate: f64,
        #[serde(default)]
        phase: f64,
        #[serde(default)]
        start_time: f64,
    },
    /// Straight line whose speed blends from `initial_speed` to
    /// `cruise_speed` along a quintic over `ramp_time`, then cruises.
    LineSegmentSmoothed {
        start: [f64; 2],
        heading: f64,
        initial_speed: f64,
        cruise_speed: f64,
        ramp_time: f64,
        #[serde(default)]
        start_time: f64,
    },
}

impl Default for TrajectorySpec {
    /// Unit circle at 0.15 rad/s, i.e. 0.15 m/s.
    fn default() -> Self {
        TrajectorySpec::Circle {
            center: [0.0, 0.0],
            radius: 1.0,
            angular_rate: 0.15,
            phase: 0.0,
            start_time: 0.0,
        }
    }
}

/// Quintic smoothstep `10x^3 - 15x^4 + 6x^5` and its first two derivatives.
pub(crate) fn smoothstep5(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0, 0.0)
    } else if x >= 1.0 {
        (1.0, 0.0, 0.0)
    } else {
        let x2 = x * x;
        (
            x2 * x * (10.0 + x * (-15.0 + 6.0 * x)),
            30.0 * x2 * (1.0 - x) * (1.0 - x),
            60.0 * x * (1.0 - x) * (1.0 - 2.0 * x),
        )
    }
}

/// Integral of [`smoothstep5`] from 0 to `x`: `2.5x^4 - 3x^5 + x^6`,
/// continued linearly past 1.
fn smoothstep5_integral(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        0.5 + (x - 1.0)
    } else {
        let x4 = x.powi(4);
        x4 * (2.5 + x * (-3.0 + x))
    }
}

impl TrajectorySpec {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let field = |name: &str| format!("{prefix}.{name}");
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(field(name), "must be finite"))
            }
        };
        match *self {
            TrajectorySpec::Circle {
                center,
                radius,
                angular_rate,
                phase,
                start_time,
            } => {
                finite("center", center[0] + center[1])?;
                finite("phase", phase)?;
                finite("start_time", start_time)?;
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::invalid(field("radius"), "must be > 0"));
                }
                if !(angular_rate.is_finite() && angular_rate != 0.0) {
                    return Err(Error::invalid(field("angular_rate"), "must be finite and nonzero"));
                }
            }
            TrajectorySpec::Lemniscate {
                center,
                scale,
                angular_rate,
                phase,
                start_time,
            } => {
                finite("center", center[0] + center[1])?;
                finite("phase", phase)?;
                finite("start_time", start_time)?;
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(Error::invalid(field("scale"), "must be > 0"));
                }
                if !(angular_rate.is_finite() && angular_rate != 0.0) {
                    return Err(Error::invalid(field("angular_rate"), "must be finite and nonzero"));
                }
            }
            TrajectorySpec::LineSegmentSmoothed {
                start,
                heading,
                initial_speed,
                cruise_speed,
                ramp_time,
                start_time,
            } => {
                finite("start", start[0] + start[1])?;
                finite("heading", heading)?;
                finite("start_time", start_time)?;
                if !(ramp_time.is_finite() && ramp_time > 0.0) {
                    return Err(Error::invalid(field("ramp_time"), "must be > 0"));
                }
                for (name, v) in [("initial_speed", initial_speed), ("cruise_speed", cruise_speed)] {
                    if !(v.is_finite() && v >= V_MIN) {
                        return Err(Error::invalid(
                            field(name),
                            format!("must be >= {V_MIN} m/s (flatness needs nonzero speed)"),
                        ));
                    }
                }
            }
        }
        let min_speed = self.min_sampled_speed();
        if !(min_speed >= V_MIN) {
            return Err(Error::invalid(
                prefix,
                format!("reference speed drops to {min_speed:.3e} m/s, below {V_MIN}"),
            ));
        }
        Ok(())
    }

    /// Minimum reference speed over a dense sampling of one period (or the
    /// ramp for lines).
    pub fn min_sampled_speed(&self) -> f64 {
        const SAMPLES: usize = 4096;
        let (t0, span) = match *self {
            TrajectorySpec::Circle {
                angular_rate,
                start_time,
                ..
            }
            | TrajectorySpec::Lemniscate {
                angular_rate,
                start_time,
                ..
            } => (start_time, 2.0 * PI / angular_rate.abs()),
            TrajectorySpec::LineSegmentSmoothed {
                ramp_time,
                start_time,
                ..
            } => (start_time, ramp_time),
        };
        (0..=SAMPLES)
            .map(|k| self.eval(t0 + span * k as f64 / SAMPLES as f64).gamma_dot.norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Desired flat output at time `t`.
    pub fn eval(&self, t: f64) -> FlatPoint {
        match *self {
            TrajectorySpec::Circle {
                center,
                radius,
                angular_rate: w,
                phase,
                start_time,
            } => {
                let (sin, cos) = (w * (t - start_time) + phase).sin_cos();
                FlatPoint {
                    gamma: Vector2::new(center[0] + radius * cos, center[1] + radius * sin),
                    gamma_dot: Vector2::new(-radius * w * sin, radius * w * cos),
                    gamma_ddot: Vector2::new(-radius * w * w * cos, -radius * w * w * sin),
                }
            }
            TrajectorySpec::Lemniscate {
                center,
                scale: a,
                angular_rate: w,
                phase,
                start_time,
            } => {
                let u = w * (t - start_time) + phase;
                let (s1, c1) = u.sin_cos();
                let (s2, c2) = (2.0 * u).sin_cos();
                FlatPoint {
                    gamma: Vector2::new(center[0] + a * s1, center[1] + 0.5 * a * s2),
                    gamma_dot: Vector2::new(a * w * c1, a * w * c2),
                    gamma_ddot: Vector2::new(-a * w * w * s1, -2.0 * a * w * w * s2),
                }
            }
            TrajectorySpec::LineSegmentSmoothed {
                start,
                heading,
                initial_speed: v0,
                cruise_speed: v1,
                ramp_time: ramp,
                start_time,
            } => {
                let tau = t - start_time;
                let x = tau / ramp;
                let (q, dq, _) = smoothstep5(x);
                // before the ramp the curve extends backwards at v0
                let dist = v0 * tau + (v1 - v0) * ramp * smoothstep5_integral(x);
                let speed = v0 + (v1 - v0) * q;
                let accel = (v1 - v0) * dq / ramp;
                let dir = Vector2::new(heading.cos(), heading.sin());
                FlatPoint {
                    gamma: Vector2::new(start[0], start[1]) + dir * dist,
                    gamma_dot: dir * speed,
                    gamma_ddot: dir * accel,
                }
            }
        }
    }
}
