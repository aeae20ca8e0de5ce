//! Fourier transform of the truncated `|x|^{-d}` kernel.
//!
//! The distribution `T` acts by
//! `<T, f> = int_{|x|<=1} (f(x) - f(0)) / |x|^d dx + int_{|x|>1} f(x) / |x|^d dx`
//! and its transform is the locally integrable function `zeta_d - sigma_{d-1} log|xi|`.
//! This module evaluates `zeta_d` by quadrature of the radial Bessel integral,
//! checks the identity on Gaussian test functions, and derives the constants of
//! the physical-space form of `V`.

pub mod bessel;
pub mod quadrature;

use crate::error::{MixError, Result};
use bessel::bessel_jtilde;
use quadrature::{integrate, integrate_panels};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

pub use bessel::gamma_half_integer;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Default split point `S`: `[1, S]` by panels, `[S, inf)` by the asymptotic tail.
pub const DEFAULT_SPLIT: f64 = 32.0;

fn check_dim(d: usize) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        Err(MixError::InvalidArgument(format!("dimension must be 1 or 2, got {d}")))
    }
}

/// Surface area `sigma_{d-1}` of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half_integer(d as f64 / 2.0)
}

/// Volume of the unit ball in `R^d`.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaResult {
    pub d: usize,
    pub value: f64,
    /// Split point between the panel quadrature and the asymptotic tail.
    pub split: f64,
    pub inner: f64,
    pub middle: f64,
    pub tail: f64,
    /// Sum of the quadrature error estimates and the tail truncation estimate.
    pub error_bound: f64,
}

/// Radial integrand `(2pi)^{d/2} J~_{d/2-1}(2 pi s)`.
fn radial_kernel(d: usize, s: f64) -> f64 {
    (2.0 * PI).powf(d as f64 / 2.0) * bessel_jtilde(d as f64 / 2.0 - 1.0, 2.0 * PI * s)
}

/// `int_T^inf t^{-nu-1} J_nu(t) dt` for large `T`, combining the Hankel expansion of
/// `J_nu` with the integration-by-parts expansion of `int_T^inf t^{-m} e^{it} dt`.
/// Returns `(value, truncation_estimate)`.
pub fn bessel_tail_integral(nu: f64, t0: f64) -> (f64, f64) {
    use rustfft::num_complex::Complex64 as C;
    let mu = 4.0 * nu * nu;
    let i = C::new(0.0, 1.0);
    let e_it = C::from_polar(1.0, t0);
    let mut total = C::new(0.0, 0.0);
    let mut omitted = 0.0_f64;
    // a_k(nu) i^k
    let mut a_k = C::new(1.0, 0.0);
    let mut last_a = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let kf = k as f64;
            a_k *= i * ((mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf));
            if a_k.norm() == 0.0 {
                break;
            }
        }
        let m = nu + 1.5 + k as f64;
        // E(m, T) = i e^{iT} T^{-m} sum_j (m)_j (-i/T)^j
        let mut term = C::new(1.0, 0.0);
        let mut series = term;
        let mut prev = f64::INFINITY;
        let mut e_omit = 0.0;
        for j in 0..200 {
            let next = term * (-i) * ((m + j as f64) / t0);
            if next.norm() >= prev || next.norm() < 1e-18 {
                e_omit = next.norm();
                break;
            }
            prev = next.norm();
            term = next;
            series += term;
        }
        let scale = t0.powf(-m);
        let e_m = i * e_it * scale * series;
        let contrib = a_k * e_m;
        total += contrib;
        omitted += a_k.norm() * scale * e_omit;
        let size = contrib.norm();
        if size >= last_a && k > 2 {
            break;
        }
        last_a = size;
        if size < 1e-20 {
            break;
        }
    }
    let phase = C::from_polar(1.0, -(nu * FRAC_PI_2 + FRAC_PI_4));
    let factor = (2.0 / PI).sqrt();
    ((factor * phase * total).re, factor * omitted)
}

/// `zeta_d = int_0^1 ((2pi)^{d/2} J~(2 pi s) - sigma_{d-1}) ds/s + int_1^inf (2pi)^{d/2} J~(2 pi s) ds/s`.
pub fn zeta_constant(d: usize) -> Result<ZetaResult> {
    zeta_constant_with_split(d, DEFAULT_SPLIT)
}

pub fn zeta_constant_with_split(d: usize, split: f64) -> Result<ZetaResult> {
    check_dim(d)?;
    if !(split >= 2.0 && split.fract() == 0.0) {
        return Err(MixError::InvalidArgument(format!("split must be an integer >= 2, got {split}")));
    }
    let sigma = sphere_area(d);
    let nu = d as f64 / 2.0 - 1.0;
    let inner = integrate(|s| (radial_kernel(d, s) - sigma) / s, 0.0, 1.0, 1e-14, 0.0, 200);
    let bps: Vec<f64> = (1..=split as usize).map(|i| i as f64).collect();
    let middle = integrate_panels(|s| radial_kernel(d, s) / s, &bps, 1e-13, 0.0);
    // int_S^inf (2pi)^{d/2} (2 pi s)^{-nu} J_nu(2 pi s) ds/s = (2pi)^{d/2} int_T^inf t^{-nu-1} J_nu(t) dt
    let (tail_raw, tail_err) = bessel_tail_integral(nu, 2.0 * PI * split);
    let pref = (2.0 * PI).powf(d as f64 / 2.0);
    let tail = pref * tail_raw;
    Ok(ZetaResult {
        d,
        value: inner.value + middle.value + tail,
        split,
        inner: inner.value,
        middle: middle.value,
        tail,
        error_bound: inner.error + middle.error + pref * tail_err,
    })
}

/// Closed forms `zeta_1 = -2(gamma + ln 2pi)`, `zeta_2 = -2pi(gamma + ln pi)`.
pub fn zeta_closed_form(d: usize) -> Result<f64> {
    check_dim(d)?;
    Ok(match d {
        1 => -2.0 * (EULER_GAMMA + (2.0 * PI).ln()),
        _ => -2.0 * PI * (EULER_GAMMA + PI.ln()),
    })
}

/// `(alpha_d, beta_d) = (1 / sigma_{d-1}, zeta_d / sigma_{d-1})`.
pub fn alpha_beta(d: usize, zeta: f64) -> Result<(f64, f64)> {
    check_dim(d)?;
    let sigma = sphere_area(d);
    Ok((1.0 / sigma, zeta / sigma))
}

/// A radial Schwartz test function with a known radial Fourier transform.
pub trait RadialTestFunction {
    /// `psi(xi)` at `|xi| = r`.
    fn psi(&self, r: f64) -> f64;
    /// `psi_hat(x)` at `|x| = r`.
    fn psi_hat(&self, r: f64) -> f64;
    /// Radius beyond which both are negligible (below 1e-30).
    fn support_radius(&self) -> f64;
    /// Spatial radius beyond which `psi_hat` is negligible.
    fn hat_support_radius(&self) -> f64;
}

/// `psi(xi) = exp(-pi a^2 |xi|^2)`, so `psi_hat(x) = a^{-d} exp(-pi |x|^2 / a^2)`.
#[derive(Debug, Clone, Copy)]
pub struct DilatedGaussian {
    pub d: usize,
    pub a: f64,
}

impl RadialTestFunction for DilatedGaussian {
    fn psi(&self, r: f64) -> f64 {
        (-PI * self.a * self.a * r * r).exp()
    }
    fn psi_hat(&self, r: f64) -> f64 {
        self.a.powi(-(self.d as i32)) * (-PI * r * r / (self.a * self.a)).exp()
    }
    fn support_radius(&self) -> f64 {
        5.0 / self.a
    }
    fn hat_support_radius(&self) -> f64 {
        5.0 * self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFtCheck {
    /// `<T, psi_hat>` from the defining split integral.
    pub physical: f64,
    /// `int (zeta_d - sigma log|xi|) psi(xi) dxi`.
    pub spectral: f64,
    pub residual: f64,
}

/// Radial `int_0^R g(r) r^{d-1} dr` with an `r = u^2` substitution on `[0, 1]`
/// to tame logarithmic endpoint behaviour.
fn radial_integral(g: impl Fn(f64) -> f64, d: usize, outer: f64) -> f64 {
    let near = integrate(|u| g(u * u) * (u * u).powi(d as i32 - 1) * 2.0 * u, 0.0, 1.0, 1e-15, 0.0, 400);
    let far = if outer > 1.0 {
        integrate(|r| g(r) * r.powi(d as i32 - 1), 1.0, outer, 1e-15, 0.0, 400).value
    } else {
        0.0
    };
    near.value + far
}

/// Evaluate both sides of `<T_hat, psi> = int (zeta_d - sigma log|xi|) psi`.
pub fn verify_log_ft(d: usize, test: &impl RadialTestFunction, zeta: f64) -> Result<LogFtCheck> {
    check_dim(d)?;
    let sigma = sphere_area(d);
    let h0 = test.psi_hat(0.0);
    // int_{|x|<=1} (g(x) - g(0))/|x|^d dx + int_{|x|>1} g/|x|^d, radially reduced.
    let near = integrate(|r| (test.psi_hat(r) - h0) / r, 0.0, 1.0, 1e-15, 0.0, 400).value;
    let outer = test.hat_support_radius().max(2.0);
    let far = integrate(|r| test.psi_hat(r) / r, 1.0, outer, 1e-15, 0.0, 400).value;
    let physical = sigma * (near + far);

    let outer = test.support_radius().max(2.0);
    let mass = sigma * radial_integral(|r| test.psi(r), d, outer);
    let log_moment = sigma * radial_integral(|r| if r > 0.0 { r.ln() * test.psi(r) } else { 0.0 }, d, outer);
    let spectral = zeta * mass - sigma * log_moment;
    Ok(LogFtCheck { physical, spectral, residual: (physical - spectral).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sphere_areas() {
        assert_eq!(sphere_area(1), 2.0);
        assert_abs_diff_eq!(sphere_area(2), 2.0 * PI, epsilon = 1e-15);
        assert_abs_diff_eq!(ball_volume(2), PI, epsilon = 1e-15);
    }

    #[test]
    fn zeta_integrand_vanishes_at_origin() {
        assert_abs_diff_eq!(radial_kernel(2, 0.0) - sphere_area(2), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(radial_kernel(1, 0.0) - sphere_area(1), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn cosine_tail_matches_cosine_integral() {
        // nu = -1/2: t^{-1/2} J_{-1/2}(t) = sqrt(2/pi) cos t / t, and
        // int_T^inf cos t / t dt = -Ci(T); compare with panel quadrature on [T, T+L]
        // plus the expansion from T+L.
        let t0 = 50.0;
        let t1 = 50.0 + 40.0 * PI;
        let (a, _) = bessel_tail_integral(-0.5, t0);
        let (b, _) = bessel_tail_integral(-0.5, t1);
        let bps: Vec<f64> = (0..=80).map(|i| t0 + i as f64 * (t1 - t0) / 80.0).collect();
        let mid = integrate_panels(|t| (2.0 / PI).sqrt() * t.cos() / t, &bps, 1e-15, 0.0).value;
        assert_abs_diff_eq!(a, mid + b, epsilon = 1e-13);
    }

    #[test]
    fn bad_dimension() {
        assert!(zeta_constant(3).is_err());
        assert!(alpha_beta(0, 1.0).is_err());
    }

    #[test]
    fn alpha_beta_values() {
        let (a1, b1) = alpha_beta(1, -4.0).unwrap();
        assert_eq!(a1, 0.5);
        assert_eq!(b1, -2.0);
        let (a2, _) = alpha_beta(2, 0.0).unwrap();
        assert_abs_diff_eq!(a2, 1.0 / (2.0 * PI), epsilon = 1e-16);
    }
}
