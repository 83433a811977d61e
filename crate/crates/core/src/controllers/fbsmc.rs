//! Linear-surface sliding mode baseline in flat coordinates:
//! `s = e_dot + lambda e`, `v = ref_acc - lambda e_dot - eta s - k sw(s)`.

use super::{AxisError, AxisReference, Axis, Chattering, FbsmcGains, SurfaceReadout, TrackingError};
use crate::flatness::{FlatPoint, VirtualControl};

fn axis_control(err: AxisError, reference: AxisReference, g: &FbsmcGains, chattering: Chattering) -> (f64, f64) {
    let s = err.e_dot + g.lambda * err.e;
    let v = reference.acc - g.lambda * err.e_dot - g.eta * s - g.k * chattering.switch(s);
    (v, s)
}

/// Stateless baseline step. Returns the control and the per-axis surface.
pub fn fbsmc_step(
    err: &TrackingError,
    reference: &FlatPoint,
    g: &FbsmcGains,
    chattering: Chattering,
) -> (VirtualControl, [f64; 2]) {
    let (vx, sx) = axis_control(err.x, AxisReference::of(reference, Axis::X), g, chattering);
    let (vy, sy) = axis_control(err.y, AxisReference::of(reference, Axis::Y), g, chattering);
    (VirtualControl::new(vx, vy), [sx, sy])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fbsmc {
    pub gains: FbsmcGains,
    pub chattering: Chattering,
    surface: [f64; 2],
    surface_rate: [f64; 2],
}

impl Fbsmc {
    pub fn new(gains: FbsmcGains, chattering: Chattering) -> Self {
        Self {
            gains,
            chattering,
            surface: [0.0; 2],
            surface_rate: [0.0; 2],
        }
    }

    pub fn step(&mut self, err: &TrackingError, reference: &FlatPoint) -> VirtualControl {
        let (v, s) = fbsmc_step(err, reference, &self.gains, self.chattering);
        // nominal surface rate: e_ddot + lambda e_dot with e_ddot = v - ref_acc
        self.surface_rate = [
            v.vx - reference.gamma_ddot.x + self.gains.lambda * err.x.e_dot,
            v.vy - reference.gamma_ddot.y + self.gains.lambda * err.y.e_dot,
        ];
        self.surface = s;
        v
    }

    /// The linear surface is reported in both the `s` and `sigma` slots.
    pub fn readout(&self) -> SurfaceReadout {
        SurfaceReadout {
            s: self.surface,
            s_dot: self.surface_rate,
            sigma: self.surface,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector2;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let g = FbsmcGains::default();
        let (v, _) = fbsmc_step(&TrackingError::default(), &FlatPoint::default(), &g, Chattering::Sign);
        assert_eq!(v, VirtualControl::default());

        let g = FbsmcGains { lambda: 1.0, eta: 0.5, k: 0.1 };
        let err = TrackingError {
            x: AxisError::new(1.0, 0.0),
            y: AxisError::default(),
        };
        let (v, s) = fbsmc_step(&err, &FlatPoint::default(), &g, Chattering::Sign);
        assert_abs_diff_eq!(v.vx, -0.6, epsilon = 1e-15);
        assert_eq!(s[0], 1.0);
    }

    proptest! {
        #[test]
        fn odd_symmetry(
            ex in -1.0..1.0f64, edx in -1.0..1.0f64, ey in -1.0..1.0f64, edy in -1.0..1.0f64,
            ax in -0.5..0.5f64, ay in -0.5..0.5f64, boundary in any::<bool>(),
        ) {
            let chat = if boundary { Chattering::boundary_layer() } else { Chattering::Sign };
            let g = FbsmcGains::default();
            let err = TrackingError { x: AxisError::new(ex, edx), y: AxisError::new(ey, edy) };
            let neg = TrackingError { x: -err.x, y: -err.y };
            let r = FlatPoint { gamma_ddot: Vector2::new(ax, ay), ..Default::default() };
            let nr = FlatPoint { gamma_ddot: -r.gamma_ddot, ..Default::default() };
            let (a, _) = fbsmc_step(&err, &r, &g, chat);
            let (b, _) = fbsmc_step(&neg, &nr, &g, chat);
            prop_assert_eq!(a.vx, -b.vx);
            prop_assert_eq!(a.vy, -b.vy);
            // zero reference acceleration: pure sign flip of the error
            let z = FlatPoint::default();
            let (c, _) = fbsmc_step(&err, &z, &g, chat);
            let (d, _) = fbsmc_step(&neg, &z, &g, chat);
            prop_assert_eq!((c.vx, c.vy), (-d.vx, -d.vy));
        }
    }
}
