//! Named velocity fields. Every flow is piecewise constant in time, so a run can
//! step each segment with a fixed field.

use crate::error::{MixError, Result};
use crate::field::{project_divergence_free, sobolev_w1p_seminorm, ScalarField, VelocityField};
use crate::grid::Grid;
use crate::random::{rng_from_seed, solenoidal_field};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowKind {
    Steady,
    TimePeriodic,
    SelfSimilar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum VelocityGenerator {
    Zero,
    /// Constant velocity.
    Translation { velocity: [f64; 2] },
    /// `u = (A sin(2 pi x_2), 0)`.
    Shear { amplitude: f64 },
    /// Horizontal shear on the first half of each period, vertical shear on the second.
    AlternatingShears { amplitude: f64, period: f64 },
    /// `u = A grad^perp (sin(2 pi x_1) sin(2 pi x_2))`.
    Cellular { amplitude: f64 },
    /// Random band-limited solenoidal field, redrawn every `interval` and scaled so
    /// that `||grad u||_{L^p} = target`.
    Random { max_mode: i64, target: f64, p: f64, interval: f64, seed: u64 },
}

/// Parameters accepted by [`velocity_library`]; unused ones are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowParams {
    pub amplitude: f64,
    pub period: f64,
    pub velocity: [f64; 2],
    pub max_mode: i64,
    pub target: f64,
    pub p: f64,
    pub interval: f64,
    pub seed: u64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            amplitude: 1.0,
            period: 1.0,
            velocity: [1.0, 0.0],
            max_mode: 4,
            target: 1.0,
            p: 2.0,
            interval: 0.1,
            seed: 0,
        }
    }
}

pub const DEFAULT_CFL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    pub kind: FlowKind,
    pub generator: VelocityGenerator,
    /// Target Courant number `max|u| dt / h`.
    pub cfl: f64,
    pub dealias: bool,
}

impl FlowSpec {
    pub fn new(generator: VelocityGenerator) -> Self {
        let kind = match generator {
            VelocityGenerator::AlternatingShears { .. } | VelocityGenerator::Random { .. } => FlowKind::TimePeriodic,
            _ => FlowKind::Steady,
        };
        FlowSpec { kind, generator, cfl: DEFAULT_CFL, dealias: true }
    }

    /// End of the constant segment containing `t`, if the flow ever changes.
    pub fn segment_end(&self, t: f64) -> Option<f64> {
        let len = match self.generator {
            VelocityGenerator::AlternatingShears { period, .. } => 0.5 * period,
            VelocityGenerator::Random { interval, .. } => interval,
            _ => return None,
        };
        Some((self.segment_index(t, len) + 1) as f64 * len)
    }

    /// Velocity in force on the segment containing `t`.
    pub fn velocity(&self, grid: &Grid, t: f64) -> Result<VelocityField> {
        let d = grid.dim();
        let need_2d = |name: &str| -> Result<()> {
            if d != 2 {
                return Err(MixError::UnsupportedDomain(format!("{name} flow needs d = 2")));
            }
            Ok(())
        };
        if !grid.is_torus() {
            return Err(MixError::UnsupportedDomain("flows are defined on the torus".into()));
        }
        match self.generator {
            VelocityGenerator::Zero => Ok(VelocityField::zeros(*grid)),
            VelocityGenerator::Translation { velocity } => {
                let comps = (0..d).map(|a| ScalarField::constant(*grid, velocity[a])).collect();
                VelocityField::new(comps)
            }
            VelocityGenerator::Shear { amplitude } => {
                need_2d("shear")?;
                Ok(shear(grid, amplitude, 0))
            }
            VelocityGenerator::AlternatingShears { amplitude, period } => {
                need_2d("alternating-shears")?;
                let second = self.segment_index(t, 0.5 * period).rem_euclid(2) == 1;
                Ok(shear(grid, amplitude, usize::from(second)))
            }
            VelocityGenerator::Cellular { amplitude } => {
                need_2d("cellular")?;
                let c = 2.0 * PI * amplitude;
                Ok(VelocityField::from_fns(*grid, |x| {
                    let (s1, c1) = (2.0 * PI * x[0]).sin_cos();
                    let (s2, c2) = (2.0 * PI * x[1]).sin_cos();
                    [c * s1 * c2, -c * c1 * s2]
                }))
            }
            VelocityGenerator::Random { max_mode, target, p, interval, seed } => {
                let j = self.segment_index(t, interval);
                let mut rng = rng_from_seed(seed ^ (j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let u = project_divergence_free(&solenoidal_field(*grid, max_mode, &mut rng));
                let norm = sobolev_w1p_seminorm(&u, p)?;
                if norm == 0.0 {
                    return Ok(u);
                }
                Ok(u.scaled(target / norm))
            }
        }
    }

    /// Index of the segment of length `len` containing `t`; a `t` within rounding
    /// of a boundary belongs to the later segment.
    fn segment_index(&self, t: f64, len: f64) -> i64 {
        ((t / len) * (1.0 + 1e-12) + 1e-12).floor() as i64
    }
}

fn shear(grid: &Grid, amplitude: f64, axis: usize) -> VelocityField {
    VelocityField::from_fns(*grid, |x| {
        if axis == 0 {
            [amplitude * (2.0 * PI * x[1]).sin(), 0.0]
        } else {
            [0.0, amplitude * (2.0 * PI * x[0]).sin()]
        }
    })
}

/// Look up a flow by name: `zero`, `translation`, `shear`, `alternating-shears`,
/// `cellular`, `random`.
pub fn velocity_library(name: &str, params: &FlowParams) -> Result<FlowSpec> {
    let g = match name {
        "zero" => VelocityGenerator::Zero,
        "translation" => VelocityGenerator::Translation { velocity: params.velocity },
        "shear" => VelocityGenerator::Shear { amplitude: params.amplitude },
        "alternating-shears" | "alternating_shears" => {
            if params.period <= 0.0 {
                return Err(MixError::InvalidArgument("period must be positive".into()));
            }
            VelocityGenerator::AlternatingShears { amplitude: params.amplitude, period: params.period }
        }
        "cellular" => VelocityGenerator::Cellular { amplitude: params.amplitude },
        "random" => {
            if params.interval <= 0.0 || params.max_mode < 1 || params.p < 1.0 {
                return Err(MixError::InvalidArgument("random flow needs interval > 0, max_mode >= 1, p >= 1".into()));
            }
            VelocityGenerator::Random {
                max_mode: params.max_mode,
                target: params.target,
                p: params.p,
                interval: params.interval,
                seed: params.seed,
            }
        }
        other => return Err(MixError::UnknownName(other.to_string())),
    };
    Ok(FlowSpec::new(g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid {
        Grid::torus(2, 32).unwrap()
    }

    #[test]
    fn shear_gradient_norm() {
        let f = velocity_library("shear", &FlowParams { amplitude: 1.5, ..Default::default() }).unwrap();
        let u = f.velocity(&grid(), 0.0).unwrap();
        let n = sobolev_w1p_seminorm(&u, 2.0).unwrap();
        assert!((n - 2f64.sqrt() * PI * 1.5).abs() < 1e-12);
    }

    #[test]
    fn cellular_is_solenoidal() {
        let f = velocity_library("cellular", &FlowParams::default()).unwrap();
        f.velocity(&grid(), 0.0).unwrap().check_solenoidal().unwrap();
    }

    #[test]
    fn random_is_normalised_per_segment() {
        let params = FlowParams { target: 1.0, p: 2.0, interval: 0.25, seed: 3, ..Default::default() };
        let f = velocity_library("random", &params).unwrap();
        let a = f.velocity(&grid(), 0.1).unwrap();
        let b = f.velocity(&grid(), 0.3).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, f.velocity(&grid(), 0.2).unwrap());
        for u in [a, b] {
            u.check_solenoidal().unwrap();
            assert!((sobolev_w1p_seminorm(&u, 2.0).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn alternating_segments() {
        let f = velocity_library("alternating-shears", &FlowParams { period: 1.0, ..Default::default() }).unwrap();
        assert_eq!(f.segment_end(0.0), Some(0.5));
        assert_eq!(f.segment_end(0.5), Some(1.0));
        let g = grid();
        let u0 = f.velocity(&g, 0.2).unwrap();
        let u1 = f.velocity(&g, 0.7).unwrap();
        assert_eq!(u0.component(1).max_abs(), 0.0);
        assert_eq!(u1.component(0).max_abs(), 0.0);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(velocity_library("vortex", &FlowParams::default()), Err(MixError::UnknownName(_))));
    }
}
