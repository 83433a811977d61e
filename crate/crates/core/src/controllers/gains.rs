use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-axis parameters of the integral hyperplane sliding mode law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisGains {
    /// Proportional weight of the error in the integral terminal surface.
    pub kappa1: f64,
    /// Weight of the fractional-power integral term.
    pub kappa2: f64,
    /// Fractional power of the integral term, in (0.5, 1).
    pub phi: f64,
    /// Weight of the surface-rate term in the hyperplane manifold.
    pub mu: f64,
    /// Power of the surface-rate term, in (1, 2).
    pub beta: f64,
    /// Linear reaching gain.
    pub upsilon1: f64,
    /// Switching gain; must dominate `kappa1 * |disturbance|`.
    pub upsilon2: f64,
}

impl Default for AxisGains {
    fn default() -> Self {
        Self::PUBLISHED
    }
}

impl AxisGains {
    /// Gains used in the reported hardware experiments.
    pub const PUBLISHED: Self = Self {
        kappa1: 3.0,
        kappa2: 0.1,
        phi: 0.95,
        mu: 1.14,
        beta: 1.28,
        upsilon1: 0.04,
        upsilon2: 0.02,
    };

    /// Checks every parameter range; `prefix` is used to build field paths
    /// such as `controller.gains.x.beta`.
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let field = |name: &str| format!("{prefix}.{name}");
        let positive = [
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("mu", self.mu),
            ("upsilon1", self.upsilon1),
            ("upsilon2", self.upsilon2),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(field(name), format!("must be > 0, got {value}")));
            }
        }
        if !(self.phi > 0.5 && self.phi < 1.0) {
            return Err(Error::invalid(
                field("phi"),
                format!("must lie in (0.5, 1), got {}", self.phi),
            ));
        }
        if !(self.beta > 1.0 && self.beta < 2.0) {
            return Err(Error::invalid(
                field("beta"),
                format!("must lie in (1, 2), got {}", self.beta),
            ));
        }
        Ok(())
    }
}

/// Gains for both flat axes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainSet {
    #[serde(default)]
    pub x: AxisGains,
    #[serde(default)]
    pub y: AxisGains,
}

impl GainSet {
    pub const PUBLISHED: Self = Self {
        x: AxisGains::PUBLISHED,
        y: AxisGains::PUBLISHED,
    };

    pub fn uniform(g: AxisGains) -> Self {
        Self { x: g, y: g }
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        self.x.validate(&format!("{prefix}.x"))?;
        self.y.validate(&format!("{prefix}.y"))
    }
}

/// Parameters of the linear-surface flatness-based sliding mode baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbsmcGains {
    /// Surface slope: `s = e_dot + lambda * e`.
    pub lambda: f64,
    /// Proportional reaching gain.
    pub eta: f64,
    /// Switching gain.
    pub k: f64,
}

impl Default for FbsmcGains {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            eta: 0.5,
            k: 0.05,
        }
    }
}

impl FbsmcGains {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        for (name, value) in [("lambda", self.lambda), ("eta", self.eta), ("k", self.k)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    format!("{prefix}.{name}"),
                    format!("must be > 0, got {value}"),
                ));
            }
        }
        Ok(())
    }
}
