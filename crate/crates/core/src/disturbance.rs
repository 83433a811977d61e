//! Time-varying additive disturbances with exact time derivatives.
//!
//! The flat-space disturbance needs `d_dot`, so every profile here is built
//! from functions whose derivative is known in closed form. Band-limited
//! noise is a seeded finite sum of sinusoids for the same reason.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controllers::AxisGains;
use crate::error::{Error, Result};
use crate::model::DisturbanceSample;
use crate::trajectory::smoothstep5;

/// Number of sinusoids per channel in a band-noise profile.
pub const NOISE_COMPONENTS: usize = 16;

/// Peak slope of the quintic smooth step on a unit rise.
pub const SMOOTH_STEP_PEAK_RATE: f64 = 1.875;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: [f64; 3],
    },
    /// Quintic ramp from zero to `value` starting at the segment start.
    SmoothStep {
        value: [f64; 3],
        rise_time: f64,
    },
    /// `amplitude * sin(2 pi frequency t + phase)` in absolute time.
    Sinusoid {
        amplitude: [f64; 3],
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Seeded sum of sinusoids with frequencies up to `cutoff` Hz; the
    /// weights sum to one so each channel stays within its amplitude.
    BandNoise {
        amplitude: [f64; 3],
        seed: u64,
        cutoff: f64,
    },
}

impl Profile {
    /// Pointwise infinity-norm bound of this profile's value.
    pub fn peak(&self) -> f64 {
        let v = match self {
            Profile::Constant { value } | Profile::SmoothStep { value, .. } => value,
            Profile::Sinusoid { amplitude, .. } | Profile::BandNoise { amplitude, .. } => amplitude,
        };
        v.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// Profile active on `[t_start, t_end)`; `t_end = None` means forever.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub t_start: f64,
    #[serde(default)]
    pub t_end: Option<f64>,
    pub profile: Profile,
}

impl Segment {
    fn end(&self) -> f64 {
        self.t_end.unwrap_or(f64::INFINITY)
    }

    fn active(&self, t: f64) -> bool {
        t >= self.t_start && t < self.end()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    #[serde(default)]
    pub segments: Vec<Segment>,
    /// Declared infinity-norm bound on `(d_x, d_y, d_theta)`.
    #[serde(default)]
    pub declared_bound: f64,
}

impl DisturbanceSpec {
    pub fn none() -> Self {
        Self::default()
    }

    /// Wind gust: smooth step of `value` starting at `t_start`.
    pub fn wind_gust(t_start: f64, rise_time: f64, value: [f64; 3]) -> Self {
        let profile = Profile::SmoothStep { value, rise_time };
        Self {
            declared_bound: profile.peak(),
            segments: vec![Segment {
                t_start,
                t_end: None,
                profile,
            }],
        }
    }

    /// Largest sum of segment peaks over any instant.
    pub fn worst_case_peak(&self) -> f64 {
        let mut marks: Vec<f64> = self
            .segments
            .iter()
            .flat_map(|s| [s.t_start, s.end()])
            .filter(|t| t.is_finite())
            .collect();
        marks.sort_by(f64::total_cmp);
        marks
            .iter()
            .map(|&t| {
                self.segments
                    .iter()
                    .filter(|s| s.active(t))
                    .map(|s| s.profile.peak())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        if !(self.declared_bound.is_finite() && self.declared_bound >= 0.0) {
            return Err(Error::invalid(format!("{prefix}.declared_bound"), "must be finite and >= 0"));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            let field = |name: &str| format!("{prefix}.segments[{i}].{name}");
            if !(seg.t_start.is_finite() && seg.t_start >= 0.0) {
                return Err(Error::invalid(field("t_start"), "must be finite and >= 0"));
            }
            if let Some(end) = seg.t_end {
                if !(end > seg.t_start) {
                    return Err(Error::invalid(field("t_end"), "must be greater than t_start"));
                }
            }
            let all_finite = |v: &[f64; 3]| v.iter().all(|c| c.is_finite());
            match seg.profile {
                Profile::Constant { value } if !all_finite(&value) => {
                    return Err(Error::invalid(field("profile.value"), "must be finite"))
                }
                Profile::SmoothStep { value, rise_time } => {
                    if !all_finite(&value) {
                        return Err(Error::invalid(field("profile.value"), "must be finite"));
                    }
                    if !(rise_time.is_finite() && rise_time > 0.0) {
                        return Err(Error::invalid(field("profile.rise_time"), "must be > 0"));
                    }
                }
                Profile::Sinusoid {
                    amplitude,
                    frequency,
                    phase,
                } => {
                    if !all_finite(&amplitude) || !phase.is_finite() {
                        return Err(Error::invalid(field("profile.amplitude"), "must be finite"));
                    }
                    if !(frequency.is_finite() && frequency >= 0.0) {
                        return Err(Error::invalid(field("profile.frequency"), "must be >= 0"));
                    }
                }
                Profile::BandNoise {
                    amplitude, cutoff, ..
                } => {
                    if !all_finite(&amplitude) {
                        return Err(Error::invalid(field("profile.amplitude"), "must be finite"));
                    }
                    if !(cutoff.is_finite() && cutoff > 0.0) {
                        return Err(Error::invalid(field("profile.cutoff"), "must be > 0"));
                    }
                }
                Profile::Constant { .. } => {}
            }
        }
        let peak = self.worst_case_peak();
        if peak > self.declared_bound * (1.0 + 1e-12) {
            return Err(Error::invalid(
                format!("{prefix}.declared_bound"),
                format!("segments can reach {peak}, above the declared bound {}", self.declared_bound),
            ));
        }
        Ok(())
    }
}

/// Smooth-step gust magnitude whose flat-space peak `kappa1 * |d_dot|`
/// equals `ratio * upsilon2`.
pub fn gust_magnitude_for_ratio(ratio: f64, g: &AxisGains, rise_time: f64) -> f64 {
    ratio * g.upsilon2 * rise_time / (g.kappa1 * SMOOTH_STEP_PEAK_RATE)
}

#[derive(Debug, Clone, PartialEq)]
struct Tone {
    weight: f64,
    omega: f64,
    phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Compiled {
    Plain(Profile),
    Noise {
        amplitude: [f64; 3],
        tones: [Vec<Tone>; 3],
    },
}

/// Disturbance spec with band-noise tones drawn once from their seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceSchedule {
    segments: Vec<(f64, f64, Compiled)>,
}

impl DisturbanceSchedule {
    /// `seed_offset` is added to every band-noise seed (scenario seed).
    pub fn new(spec: &DisturbanceSpec, seed_offset: u64) -> Self {
        let segments = spec
            .segments
            .iter()
            .map(|seg| {
                let compiled = match seg.profile {
                    Profile::BandNoise {
                        amplitude,
                        seed,
                        cutoff,
                    } => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(seed_offset));
                        let tones = std::array::from_fn(|_| {
                            let mut tones: Vec<Tone> = (0..NOISE_COMPONENTS)
                                .map(|_| Tone {
                                    weight: rng.random_range(0.1..1.0),
                                    omega: TAU * cutoff * rng.random_range(0.05..=1.0),
                                    phase: rng.random_range(0.0..TAU),
                                })
                                .collect();
                            let total: f64 = tones.iter().map(|t| t.weight).sum();
                            tones.iter_mut().for_each(|t| t.weight /= total);
                            tones
                        });
                        Compiled::Noise { amplitude, tones }
                    }
                    p => Compiled::Plain(p),
                };
                (seg.t_start, seg.end(), compiled)
            })
            .collect();
        Self { segments }
    }

    /// Sum of the active segments at `t`, with its exact derivative.
    pub fn sample(&self, t: f64) -> DisturbanceSample {
        self.segments
            .iter()
            .filter(|(start, end, _)| t >= *start && t < *end)
            .map(|(start, _, c)| sample_one(c, t, *start))
            .fold(DisturbanceSample::ZERO, |a, b| a + b)
    }
}

fn from_channels(d: [f64; 3], d_dot: [f64; 3]) -> DisturbanceSample {
    DisturbanceSample {
        dx: d[0],
        dy: d[1],
        dtheta: d[2],
        dx_dot: d_dot[0],
        dy_dot: d_dot[1],
        dtheta_dot: d_dot[2],
    }
}

fn sample_one(c: &Compiled, t: f64, start: f64) -> DisturbanceSample {
    match c {
        Compiled::Plain(Profile::Constant { value }) => from_channels(*value, [0.0; 3]),
        Compiled::Plain(Profile::SmoothStep { value, rise_time }) => {
            let (q, dq, _) = smoothstep5((t - start) / rise_time);
            from_channels(value.map(|v| v * q), value.map(|v| v * dq / rise_time))
        }
        Compiled::Plain(Profile::Sinusoid {
            amplitude,
            frequency,
            phase,
        }) => {
            let omega = TAU * frequency;
            let (sin, cos) = (omega * t + phase).sin_cos();
            from_channels(amplitude.map(|a| a * sin), amplitude.map(|a| a * omega * cos))
        }
        Compiled::Plain(Profile::BandNoise { .. }) => unreachable!("band noise is compiled"),
        Compiled::Noise { amplitude, tones } => {
            let mut d = [0.0; 3];
            let mut d_dot = [0.0; 3];
            for ch in 0..3 {
                for tone in &tones[ch] {
                    let (sin, cos) = (tone.omega * t + tone.phase).sin_cos();
                    d[ch] += tone.weight * sin;
                    d_dot[ch] += tone.weight * tone.omega * cos;
                }
                d[ch] *= amplitude[ch];
                d_dot[ch] *= amplitude[ch];
            }
            from_channels(d, d_dot)
        }
    }
}

/// One-shot evaluation; compiles the spec on every call.
pub fn disturbance_at(spec: &DisturbanceSpec, t: f64) -> DisturbanceSample {
    DisturbanceSchedule::new(spec, 0).sample(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn seg(t_start: f64, t_end: Option<f64>, profile: Profile) -> Segment {
        Segment {
            t_start,
            t_end,
            profile,
        }
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(disturbance_at(&DisturbanceSpec::none(), 12.0), DisturbanceSample::ZERO);
    }

    #[test]
    fn smooth_step_plateau() {
        let spec = DisturbanceSpec::wind_gust(70.0, 1.0, [0.05, 0.0, 0.0]);
        let d = disturbance_at(&spec, 100.0);
        assert_eq!(d.dx, 0.05);
        assert_eq!(d.dx_dot, 0.0);
        assert_eq!(disturbance_at(&spec, 69.99), DisturbanceSample::ZERO);
        let mid = disturbance_at(&spec, 70.5);
        assert_abs_diff_eq!(mid.dx, 0.025, epsilon = 1e-15);
        assert_abs_diff_eq!(mid.dx_dot, 0.05 * SMOOTH_STEP_PEAK_RATE, epsilon = 1e-15);
    }

    #[test]
    fn sinusoid_at_origin() {
        let spec = DisturbanceSpec {
            segments: vec![seg(
                0.0,
                None,
                Profile::Sinusoid {
                    amplitude: [0.0, 0.02, 0.0],
                    frequency: 0.5,
                    phase: 0.0,
                },
            )],
            declared_bound: 0.02,
        };
        let d = disturbance_at(&spec, 0.0);
        assert_eq!(d.dy, 0.0);
        assert_abs_diff_eq!(d.dy_dot, 0.02 * TAU * 0.5, epsilon = 1e-15);
    }

    fn noisy() -> DisturbanceSpec {
        DisturbanceSpec {
            segments: vec![
                seg(
                    5.0,
                    Some(50.0),
                    Profile::BandNoise {
                        amplitude: [0.01, 0.02, 0.05],
                        seed: 7,
                        cutoff: 2.0,
                    },
                ),
                seg(
                    0.0,
                    None,
                    Profile::Sinusoid {
                        amplitude: [0.01, 0.0, 0.0],
                        frequency: 0.2,
                        phase: 0.3,
                    },
                ),
                seg(
                    10.0,
                    None,
                    Profile::SmoothStep {
                        value: [-0.02, 0.01, 0.0],
                        rise_time: 2.0,
                    },
                ),
            ],
            declared_bound: 0.08,
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        let sched = DisturbanceSchedule::new(&noisy(), 3);
        let h = 1e-6;
        for k in 0..500 {
            // keep clear of segment on/off instants
            let t = 5.05 + k as f64 * 0.0891;
            if (t - 50.0).abs() < 1e-3 {
                continue;
            }
            let (a, b, d) = (sched.sample(t - h), sched.sample(t + h), sched.sample(t));
            assert_abs_diff_eq!((b.dx - a.dx) / (2.0 * h), d.dx_dot, epsilon = 1e-6);
            assert_abs_diff_eq!((b.dy - a.dy) / (2.0 * h), d.dy_dot, epsilon = 1e-6);
            assert_abs_diff_eq!((b.dtheta - a.dtheta) / (2.0 * h), d.dtheta_dot, epsilon = 1e-6);
        }
    }

    #[test]
    fn samples_respect_declared_bound() {
        let spec = noisy();
        spec.validate("disturbance").unwrap();
        let sched = DisturbanceSchedule::new(&spec, 11);
        for k in 0..20_000 {
            assert!(sched.sample(k as f64 * 0.005).norm_inf() <= spec.declared_bound);
        }
    }

    #[test]
    fn noise_is_seeded() {
        let a = DisturbanceSchedule::new(&noisy(), 1);
        let b = DisturbanceSchedule::new(&noisy(), 1);
        let c = DisturbanceSchedule::new(&noisy(), 2);
        assert_eq!(a.sample(20.0), b.sample(20.0));
        assert_ne!(a.sample(20.0), c.sample(20.0));
    }

    #[test]
    fn bound_violation_is_reported() {
        let mut spec = noisy();
        spec.declared_bound = 0.05;
        assert_eq!(
            spec.validate("disturbance").unwrap_err().field(),
            Some("disturbance.declared_bound")
        );
        let mut spec = noisy();
        spec.segments[0].t_end = Some(1.0);
        assert_eq!(
            spec.validate("disturbance").unwrap_err().field(),
            Some("disturbance.segments[0].t_end")
        );
    }

    #[test]
    fn gust_ratio_hits_target() {
        let g = AxisGains::PUBLISHED;
        let m = gust_magnitude_for_ratio(0.5, &g, 1.0);
        let spec = DisturbanceSpec::wind_gust(70.0, 1.0, [m, m, 0.0]);
        let peak = (0..=1000)
            .map(|k| disturbance_at(&spec, 70.0 + k as f64 * 1e-3).dx_dot.abs())
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(g.kappa1 * peak, 0.5 * g.upsilon2, epsilon = 1e-12);
    }
}
