//! Closed-form settling times of the sliding-phase cascade and the
//! reaching-condition check.

use super::AxisGains;

/// Time for `z_dot = -(1/(mu beta)) |z|^(2-beta) sign z` to reach zero from `z0`:
/// `mu beta / (beta - 1) * |z0|^(beta - 1)`.
pub fn settling_time_z(z0: f64, g: &AxisGains) -> f64 {
    g.mu * g.beta / (g.beta - 1.0) * z0.abs().powf(g.beta - 1.0)
}

/// Time for `e_dot = -(kappa2/kappa1) |e|^phi sign e` to reach zero from `e0`:
/// `kappa1 / ((1 - phi) kappa2) * |e0|^(1 - phi)`.
pub fn settling_time_e(e0: f64, g: &AxisGains) -> f64 {
    g.kappa1 / ((1.0 - g.phi) * g.kappa2) * e0.abs().powf(1.0 - g.phi)
}

/// Whether the switching gain dominates a flat disturbance of the given
/// bound: `kappa1 * bound <= upsilon2`.
pub fn reaching_bound_holds(flat_disturbance_bound: f64, g: &AxisGains) -> bool {
    debug_assert!(flat_disturbance_bound >= 0.0);
    g.kappa1 * flat_disturbance_bound <= g.upsilon2
}
