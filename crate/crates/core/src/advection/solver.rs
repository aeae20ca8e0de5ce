//! Pseudo-spectral RK4 solver for `d_t theta + u . grad theta = 0` on the torus.

use super::flows::FlowSpec;
use crate::error::{MixError, Result};
use crate::fft::{self, Direction};
use crate::field::{sobolev_w1p_seminorm, ScalarField, VelocityField};
use crate::grid::Grid;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Hard Courant limit `max|u| |dt| / h` for [`step`].
pub const CFL_LIMIT: f64 = 0.5;

/// Spectral right-hand side for one fixed velocity field.
pub(crate) struct Advector {
    grid: Grid,
    velocity: Vec<Vec<f64>>,
    /// `2 pi i k_a` per axis, zero on the Nyquist slot.
    derivative: Vec<Vec<Complex64>>,
    mask: Vec<bool>,
    max_speed: f64,
}

impl Advector {
    pub(crate) fn new(u: &VelocityField, dealias: bool) -> Result<Self> {
        let grid = *u.grid();
        if !grid.is_torus() {
            return Err(MixError::UnsupportedDomain("advection runs on the torus".into()));
        }
        u.check_solenoidal()?;
        let n = grid.n() as i64;
        let d = grid.dim();
        let derivative = (0..d)
            .map(|a| {
                (0..grid.len())
                    .map(|i| {
                        if grid.is_nyquist(i) {
                            Complex64::new(0.0, 0.0)
                        } else {
                            Complex64::new(0.0, 2.0 * PI * grid.mode(i)[a] as f64)
                        }
                    })
                    .collect()
            })
            .collect();
        let mask = (0..grid.len())
            .map(|i| !dealias || grid.mode(i)[..d].iter().all(|&k| 3 * k.abs() < n))
            .collect();
        Ok(Advector {
            grid,
            velocity: u.components().iter().map(|c| c.values().to_vec()).collect(),
            derivative,
            mask,
            max_speed: u.max_speed(),
        })
    }

    pub(crate) fn max_dt(&self) -> f64 {
        if self.max_speed == 0.0 {
            f64::INFINITY
        } else {
            CFL_LIMIT * self.grid.spacing() / self.max_speed
        }
    }

    /// `-(u . grad theta)^` with the product truncated by the dealiasing mask.
    /// Coefficients are raw (unnormalised) DFT values.
    fn rhs(&self, theta_hat: &[Complex64]) -> Vec<Complex64> {
        let (d, n) = (self.grid.dim(), self.grid.n());
        let scale = 1.0 / self.grid.len() as f64;
        let mut product = vec![0.0; self.grid.len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for a in 0..d {
            for ((b, t), k) in buf.iter_mut().zip(theta_hat).zip(&self.derivative[a]) {
                *b = t * k;
            }
            fft::transform(&mut buf, d, n, Direction::Inverse);
            for ((p, b), u) in product.iter_mut().zip(&buf).zip(&self.velocity[a]) {
                *p += b.re * scale * u;
            }
        }
        for (b, p) in buf.iter_mut().zip(&product) {
            *b = Complex64::new(-p, 0.0);
        }
        fft::transform(&mut buf, d, n, Direction::Forward);
        for (b, &keep) in buf.iter_mut().zip(&self.mask) {
            if !keep {
                *b = Complex64::new(0.0, 0.0);
            }
        }
        buf
    }

    pub(crate) fn rk4(&self, y: &mut [Complex64], dt: f64) {
        let axpy = |y: &[Complex64], k: &[Complex64], c: f64| -> Vec<Complex64> {
            y.iter().zip(k).map(|(a, b)| a + b * c).collect()
        };
        let k1 = self.rhs(y);
        let k2 = self.rhs(&axpy(y, &k1, 0.5 * dt));
        let k3 = self.rhs(&axpy(y, &k2, 0.5 * dt));
        let k4 = self.rhs(&axpy(y, &k3, dt));
        for i in 0..y.len() {
            y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (dt / 6.0);
        }
    }
}

pub(crate) fn raw_spectrum(f: &ScalarField) -> Vec<Complex64> {
    let g = f.grid();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::transform(&mut data, g.dim(), g.n(), Direction::Forward);
    data
}

pub(crate) fn from_raw_spectrum(grid: Grid, mut data: Vec<Complex64>) -> ScalarField {
    fft::transform(&mut data, grid.dim(), grid.n(), Direction::Inverse);
    let scale = 1.0 / grid.len() as f64;
    ScalarField::new(grid, data.into_iter().map(|c| c.re * scale).collect()).expect("finite after transform")
}

/// One RK4 step of length `dt` (negative `dt` steps backwards) with 2/3 dealiasing.
pub fn step(theta: &ScalarField, u: &VelocityField, dt: f64) -> Result<ScalarField> {
    step_with(theta, u, dt, true)
}

pub fn step_with(theta: &ScalarField, u: &VelocityField, dt: f64, dealias: bool) -> Result<ScalarField> {
    theta.grid().same_as(u.grid())?;
    let adv = Advector::new(u, dealias)?;
    let max_dt = adv.max_dt();
    if dt.abs() > max_dt {
        return Err(MixError::Cfl { dt: dt.abs(), max_dt });
    }
    let mut y = raw_spectrum(theta);
    adv.rk4(&mut y, dt);
    Ok(from_raw_spectrum(*theta.grid(), y))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: ScalarField,
    /// `int_0^t ||grad u||_{L^p} dt'`.
    pub cum_grad_p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub flow: FlowSpec,
    /// Exponent used for the accumulated velocity gradient.
    pub grad_p: f64,
    snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn new(flow: FlowSpec, grad_p: f64, snapshots: Vec<Snapshot>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(MixError::InvalidArgument("trajectory needs at least one snapshot".into()));
        }
        for w in snapshots.windows(2) {
            if w[1].t <= w[0].t {
                return Err(MixError::InvalidArgument("snapshot times must increase strictly".into()));
            }
            w[0].field.grid().same_as(w[1].field.grid())?;
        }
        Ok(Trajectory { flow, grad_p, snapshots })
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("non-empty")
    }

    pub fn grid(&self) -> &Grid {
        self.snapshots[0].field.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub segments: usize,
}

/// Sample times `0, dt, 2 dt, ...` up to `horizon`, with `horizon` appended if it is
/// not itself a sample.
fn sample_times(horizon: f64, sample_dt: f64) -> Vec<f64> {
    let count = (horizon / sample_dt * (1.0 + 1e-12)).floor() as usize;
    let mut times: Vec<f64> = (0..=count).map(|j| j as f64 * sample_dt).collect();
    let last = *times.last().expect("non-empty");
    if horizon - last > 1e-9 * sample_dt {
        times.push(horizon);
    } else if count > 0 {
        times[count] = horizon;
    }
    times
}

/// Integrate from `theta0` to `horizon`, recording snapshots every `sample_dt`.
pub fn run(theta0: &ScalarField, flow: &FlowSpec, horizon: f64, sample_dt: f64, grad_p: f64) -> Result<Trajectory> {
    run_with_stats(theta0, flow, horizon, sample_dt, grad_p).map(|(t, _)| t)
}

pub fn run_with_stats(
    theta0: &ScalarField,
    flow: &FlowSpec,
    horizon: f64,
    sample_dt: f64,
    grad_p: f64,
) -> Result<(Trajectory, RunStats)> {
    if !(horizon >= 0.0) || !(sample_dt > 0.0) {
        return Err(MixError::InvalidArgument("need horizon >= 0 and sample_dt > 0".into()));
    }
    if !(flow.cfl > 0.0 && flow.cfl <= CFL_LIMIT) {
        return Err(MixError::InvalidArgument(format!("CFL target must lie in (0, {CFL_LIMIT}]")));
    }
    let grid = *theta0.grid();
    let times = sample_times(horizon, sample_dt);
    let mut snapshots = vec![Snapshot { t: 0.0, field: theta0.clone(), cum_grad_p: 0.0 }];
    let mut y = raw_spectrum(theta0);
    let mut t = 0.0;
    let mut cum = 0.0;
    let mut stats = RunStats { steps: 0, segments: 0 };
    let mut current: Option<(f64, Advector, f64)> = None;
    for &target in &times[1..] {
        while target - t > 1e-12 * target.max(1.0) {
            let seg_end = flow.segment_end(t).unwrap_or(f64::INFINITY);
            let stop = target.min(seg_end);
            let fresh = !matches!(&current, Some((end, _, _)) if *end == seg_end);
            if fresh {
                let u = flow.velocity(&grid, 0.5 * (t + stop))?;
                let gnorm = sobolev_w1p_seminorm(&u, grad_p)?;
                current = Some((seg_end, Advector::new(&u, flow.dealias)?, gnorm));
                stats.segments += 1;
            }
            let (_, adv, gnorm) = current.as_ref().expect("set above");
            let len = stop - t;
            let dt_cap = adv.max_dt() * flow.cfl / CFL_LIMIT;
            let nsteps = if dt_cap.is_finite() { (len / dt_cap).ceil().max(1.0) as usize } else { 1 };
            let dt = len / nsteps as f64;
            for _ in 0..nsteps {
                adv.rk4(&mut y, dt);
            }
            stats.steps += nsteps;
            cum += gnorm * len;
            t = stop;
        }
        t = target;
        snapshots.push(Snapshot { t, field: from_raw_spectrum(grid, y.clone()), cum_grad_p: cum });
    }
    Ok((Trajectory::new(*flow, grad_p, snapshots)?, stats))
}
