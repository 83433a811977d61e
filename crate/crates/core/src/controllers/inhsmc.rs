//! Integral nonlinear hyperplane sliding mode control.
//!
//! Per axis:
//!
//! ```text
//! s     = kappa1 e + kappa2 * integral(|e|^phi sign e)
//! sigma = s + mu |s_dot|^beta sign(s_dot)
//! v     = v_eq - (upsilon1 sigma + upsilon2 sw(sigma)) / kappa1
//! ```

use serde::Serialize;

use super::{
    signed_power, Axis, AxisError, AxisGains, AxisReference, Chattering, EquivalentMode,
    GainSet, SurfaceReadout, TrackingError,
};
use crate::flatness::{FlatPoint, VirtualControl};

/// Lower clamp on |e| inside the `|e|^(phi - 1)` factor of the derived
/// equivalent control.
pub const EPS_ERROR: f64 = 1e-6;

/// Sliding variables of one axis.
///
/// `s_integral` is the integral accumulated up to (not including) the
/// current sample, and `integrand` is `|e|^phi sign(e)` at the current
/// sample; it is added to the integral at the next step (explicit Euler).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AxisSliding {
    pub s_integral: f64,
    pub integrand: f64,
    pub s: f64,
    pub s_dot: f64,
    pub sigma: f64,
}

impl std::ops::Neg for AxisSliding {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            s_integral: -self.s_integral,
            integrand: -self.integrand,
            s: -self.s,
            s_dot: -self.s_dot,
            sigma: -self.sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SlidingState {
    pub x: AxisSliding,
    pub y: AxisSliding,
}

impl SlidingState {
    pub fn axis(&self, axis: Axis) -> &AxisSliding {
        match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
        }
    }
}

/// Advances the integral terminal surface by one control period and
/// refreshes `s`, `s_dot` and `sigma` at the current sample.
pub fn itsm_surface_step(err: AxisError, state: &AxisSliding, g: &AxisGains, dt: f64) -> AxisSliding {
    debug_assert!(dt > 0.0);
    let s_integral = state.s_integral + state.integrand * dt;
    let integrand = signed_power(err.e, g.phi);
    let mut next = AxisSliding {
        s_integral,
        integrand,
        s: g.kappa1 * err.e + g.kappa2 * s_integral,
        s_dot: g.kappa1 * err.e_dot + g.kappa2 * integrand,
        sigma: 0.0,
    };
    next.sigma = hyperplane_sigma(&next, g);
    next
}

/// `sigma = s + mu |s_dot|^beta sign(s_dot)`.
pub fn hyperplane_sigma(state: &AxisSliding, g: &AxisGains) -> f64 {
    state.s + g.mu * signed_power(state.s_dot, g.beta)
}

/// Equivalent control of one axis.
///
/// In [`EquivalentMode::Derived`] the term cancels `s_dot` and the
/// fractional integral rate so that, with the switching term added,
/// `sigma_dot = mu beta |s_dot|^(beta-1) (-upsilon1 sigma - upsilon2 sign sigma + kappa1 w)`
/// for a flat disturbance `w`.
pub fn equivalent_control(
    err: AxisError,
    reference: AxisReference,
    state: &AxisSliding,
    g: &AxisGains,
    mode: EquivalentMode,
) -> f64 {
    match mode {
        EquivalentMode::Paper => (reference.vel - g.kappa2 * signed_power(err.e, g.phi)) / g.kappa1,
        EquivalentMode::Derived => {
            let e_abs = err.e.abs().max(EPS_ERROR);
            reference.acc
                - g.kappa2 / g.kappa1 * g.phi * e_abs.powf(g.phi - 1.0) * err.e_dot
                - signed_power(state.s_dot, 2.0 - g.beta) / (g.kappa1 * g.mu * g.beta)
        }
    }
}

/// `-(upsilon1 sigma + upsilon2 sw(sigma)) / kappa1`.
pub fn switching_control(sigma: f64, g: &AxisGains, chattering: Chattering) -> f64 {
    -(g.upsilon1 * sigma + g.upsilon2 * chattering.switch(sigma)) / g.kappa1
}

fn axis_step(
    err: AxisError,
    reference: AxisReference,
    state: &AxisSliding,
    g: &AxisGains,
    dt: f64,
    mode: EquivalentMode,
    chattering: Chattering,
) -> (f64, AxisSliding) {
    let next = itsm_surface_step(err, state, g, dt);
    let v = equivalent_control(err, reference, &next, g, mode)
        + switching_control(next.sigma, g, chattering);
    (v, next)
}

/// One control step on both axes. Pure: the caller owns the state.
pub fn inhsmc_step(
    err: &TrackingError,
    reference: &FlatPoint,
    state: &SlidingState,
    g: &GainSet,
    dt: f64,
    mode: EquivalentMode,
    chattering: Chattering,
) -> (VirtualControl, SlidingState) {
    let (vx, x) = axis_step(
        err.x,
        AxisReference::of(reference, Axis::X),
        &state.x,
        &g.x,
        dt,
        mode,
        chattering,
    );
    let (vy, y) = axis_step(
        err.y,
        AxisReference::of(reference, Axis::Y),
        &state.y,
        &g.y,
        dt,
        mode,
        chattering,
    );
    (VirtualControl::new(vx, vy), SlidingState { x, y })
}

/// Stateful wrapper around [`inhsmc_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct InhSmc {
    pub gains: GainSet,
    pub mode: EquivalentMode,
    pub chattering: Chattering,
    pub state: SlidingState,
}

impl InhSmc {
    pub fn new(gains: GainSet, mode: EquivalentMode, chattering: Chattering) -> Self {
        Self {
            gains,
            mode,
            chattering,
            state: SlidingState::default(),
        }
    }

    pub fn step(&mut self, err: &TrackingError, reference: &FlatPoint, dt: f64) -> VirtualControl {
        let (v, next) = inhsmc_step(
            err,
            reference,
            &self.state,
            &self.gains,
            dt,
            self.mode,
            self.chattering,
        );
        self.state = next;
        v
    }

    pub fn readout(&self) -> SurfaceReadout {
        let (x, y) = (&self.state.x, &self.state.y);
        SurfaceReadout {
            s: [x.s, y.s],
            s_dot: [x.s_dot, y.s_dot],
            sigma: [x.sigma, y.sigma],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector2;
    use proptest::prelude::*;

    const G: AxisGains = AxisGains::PUBLISHED;

    #[test]
    fn itsm_examples() {
        let fresh = AxisSliding::default();
        let mut st = fresh;
        for _ in 0..10 {
            st = itsm_surface_step(AxisError::default(), &st, &G, 0.01);
        }
        assert_eq!((st.s, st.s_dot, st.sigma), (0.0, 0.0, 0.0));

        let st = itsm_surface_step(AxisError::new(1.0, 0.0), &fresh, &G, 0.01);
        assert_abs_diff_eq!(st.s, 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(st.s_dot, 0.1, epsilon = 1e-15);

        let st = itsm_surface_step(AxisError::new(-1.0, 0.5), &fresh, &G, 0.01);
        assert_abs_diff_eq!(st.s, -3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(st.s_dot, 1.4, epsilon = 1e-15);
    }

    #[test]
    fn integral_is_explicit_euler() {
        let dt = 0.01;
        let mut st = AxisSliding::default();
        let errs = [0.5, -0.2, 0.3, 0.0, 1.0];
        let mut manual = 0.0;
        for (k, &e) in errs.iter().enumerate() {
            st = itsm_surface_step(AxisError::new(e, 0.0), &st, &G, dt);
            assert_abs_diff_eq!(st.s_integral, manual, epsilon = 1e-15);
            assert_eq!(st.s, G.kappa1 * e + G.kappa2 * st.s_integral, "step {k}");
            manual += signed_power(e, G.phi) * dt;
        }
    }

    #[test]
    fn sigma_examples() {
        let st = |s, s_dot| AxisSliding {
            s,
            s_dot,
            ..Default::default()
        };
        assert_eq!(hyperplane_sigma(&st(0.0, 0.0), &G), 0.0);
        assert_abs_diff_eq!(hyperplane_sigma(&st(1.0, 1.0), &G), 2.14, epsilon = 1e-15);
        assert_abs_diff_eq!(hyperplane_sigma(&st(0.0, -1.0), &G), -1.14, epsilon = 1e-15);
    }

    #[test]
    fn equivalent_control_examples() {
        let st = AxisSliding::default();
        let r = |vel, acc| AxisReference { vel, acc };
        let paper = EquivalentMode::Paper;
        assert_eq!(equivalent_control(AxisError::default(), r(0.0, 0.0), &st, &G, paper), 0.0);
        assert_abs_diff_eq!(
            equivalent_control(AxisError::default(), r(0.3, 0.0), &st, &G, paper),
            0.1,
            epsilon = 1e-15
        );
        assert_eq!(
            equivalent_control(
                AxisError::default(),
                r(0.0, 0.5),
                &st,
                &G,
                EquivalentMode::Derived
            ),
            0.5
        );
    }

    #[test]
    fn derived_mode_clamps_error_singularity() {
        let st = AxisSliding::default();
        let v = equivalent_control(
            AxisError::new(0.0, 0.1),
            AxisReference::default(),
            &st,
            &G,
            EquivalentMode::Derived,
        );
        let expected = -G.kappa2 / G.kappa1 * G.phi * EPS_ERROR.powf(G.phi - 1.0) * 0.1;
        assert_abs_diff_eq!(v, expected, epsilon = 1e-15);
        assert!(v.is_finite());
    }

    #[test]
    fn switching_examples() {
        assert_eq!(switching_control(0.0, &G, Chattering::Sign), 0.0);
        assert_abs_diff_eq!(switching_control(1.0, &G, Chattering::Sign), -0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(switching_control(-1.0, &G, Chattering::Sign), 0.02, epsilon = 1e-15);
        // inside the layer the switch is linear
        let bl = Chattering::BoundaryLayer { width: 0.01 };
        assert_abs_diff_eq!(
            switching_control(0.005, &G, bl),
            -(0.04 * 0.005 + 0.02 * 0.5) / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn composed_step_matches_hand_evaluation() {
        let err = TrackingError {
            x: AxisError::new(1.0, 0.0),
            y: AxisError::default(),
        };
        let reference = FlatPoint {
            gamma_dot: Vector2::new(0.15, 0.0),
            ..Default::default()
        };
        let (v, st) = inhsmc_step(
            &err,
            &reference,
            &SlidingState::default(),
            &GainSet::PUBLISHED,
            0.01,
            EquivalentMode::Paper,
            Chattering::Sign,
        );
        let sigma = 3.0 + 1.14 * 0.1f64.powf(1.28);
        assert_abs_diff_eq!(st.x.sigma, sigma, epsilon = 1e-14);
        let v_eq = (0.15 - 0.1) / 3.0;
        let v_sw = -(0.04 * sigma + 0.02) / 3.0;
        assert_abs_diff_eq!(v.vx, v_eq + v_sw, epsilon = 1e-14);
        assert_eq!(v.vy, 0.0);

        let (v2, st2) = inhsmc_step(
            &err,
            &reference,
            &SlidingState::default(),
            &GainSet::PUBLISHED,
            0.01,
            EquivalentMode::Paper,
            Chattering::Sign,
        );
        assert_eq!(v.vx.to_bits(), v2.vx.to_bits());
        assert_eq!(st, st2);
    }

    #[test]
    fn zero_error_zero_reference_gives_zero_control() {
        let mut c = InhSmc::new(GainSet::PUBLISHED, EquivalentMode::Paper, Chattering::Sign);
        for _ in 0..5 {
            let v = c.step(&TrackingError::default(), &FlatPoint::default(), 0.01);
            assert_eq!(v, VirtualControl::new(0.0, 0.0));
        }
    }

    fn arb_axis_err() -> impl Strategy<Value = AxisError> {
        (-2.0..2.0f64, -1.0..1.0f64).prop_map(|(e, d)| AxisError::new(e, d))
    }

    proptest! {
        #[test]
        fn stored_sigma_is_recomputable(
            errs in proptest::collection::vec(arb_axis_err(), 1..40),
            derived in any::<bool>(),
        ) {
            let mode = if derived { EquivalentMode::Derived } else { EquivalentMode::Paper };
            let mut c = InhSmc::new(GainSet::PUBLISHED, mode, Chattering::Sign);
            for e in errs {
                let err = TrackingError { x: e, y: -e };
                c.step(&err, &FlatPoint::default(), 0.01);
                for axis in Axis::BOTH {
                    let st = c.state.axis(axis);
                    prop_assert!((hyperplane_sigma(st, &G) - st.sigma).abs() <= 1e-12);
                    let e = err.axis(axis).e;
                    prop_assert!((G.kappa1 * e + G.kappa2 * st.s_integral - st.s).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn odd_symmetry(
            ex in arb_axis_err(), ey in arb_axis_err(),
            ix in -1.0..1.0f64, iy in -1.0..1.0f64,
            rv in -0.2..0.2f64, ra in -0.1..0.1f64,
            derived in any::<bool>(), boundary in any::<bool>(),
        ) {
            let mode = if derived { EquivalentMode::Derived } else { EquivalentMode::Paper };
            let chat = if boundary { Chattering::boundary_layer() } else { Chattering::Sign };
            let err = TrackingError { x: ex, y: ey };
            let neg_err = TrackingError { x: -ex, y: -ey };
            let state = SlidingState {
                x: AxisSliding { s_integral: ix, integrand: 0.3 * ix, ..Default::default() },
                y: AxisSliding { s_integral: iy, integrand: -0.2 * iy, ..Default::default() },
            };
            let neg_state = SlidingState { x: -state.x, y: -state.y };
            let reference = FlatPoint {
                gamma: Vector2::new(1.0, -1.0),
                gamma_dot: Vector2::new(rv, -rv),
                gamma_ddot: Vector2::new(ra, 0.5 * ra),
            };
            let neg_ref = FlatPoint {
                gamma: -reference.gamma,
                gamma_dot: -reference.gamma_dot,
                gamma_ddot: -reference.gamma_ddot,
            };
            let (a, _) = inhsmc_step(&err, &reference, &state, &GainSet::PUBLISHED, 0.01, mode, chat);
            let (b, _) = inhsmc_step(&neg_err, &neg_ref, &neg_state, &GainSet::PUBLISHED, 0.01, mode, chat);
            prop_assert_eq!(a.vx, -b.vx);
            prop_assert_eq!(a.vy, -b.vy);
        }
    }
}
