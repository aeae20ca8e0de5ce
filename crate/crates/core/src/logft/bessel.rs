//! Bessel functions of the first kind for integer and half-integer orders.
//!
//! Three branches:
//! - power series of `s^{-nu} J_nu(s)` for `s <= SERIES_MAX`;
//! - the Hankel asymptotic expansion for `s >= ASYMPTOTIC_MIN`, and for every
//!   `s > SERIES_MAX` when the order is a half-integer (the expansion terminates
//!   and is exact there);
//! - for integer orders in between, Bessel's integral
//!   `J_n(s) = (1/2pi) int_0^{2pi} cos(n t - s sin t) dt` by the trapezoid rule,
//!   which converges geometrically for this periodic integrand.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

pub const SERIES_MAX: f64 = 8.0;
pub const ASYMPTOTIC_MIN: f64 = 30.0;

fn check_order(nu: f64) -> i64 {
    let twice = 2.0 * nu;
    assert!(
        twice.fract() == 0.0 && nu >= -0.5,
        "Bessel order must be an integer or half-integer >= -1/2, got {nu}"
    );
    twice as i64
}

/// `Gamma(x)` for `x` a positive integer or half-integer.
pub fn gamma_half_integer(x: f64) -> f64 {
    let twice = 2.0 * x;
    assert!(twice.fract() == 0.0 && x > 0.0, "gamma_half_integer needs 2x in N, x > 0");
    let (mut g, mut y) = if twice as i64 % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    while y < x {
        g *= y;
        y += 1.0;
    }
    g
}

/// `s^{-nu} J_nu(s)` by its power series; finite at `s = 0` with value `1 / (2^nu Gamma(nu+1))`.
pub fn jtilde_series(nu: f64, s: f64) -> f64 {
    let q = -(s * 0.5) * (s * 0.5);
    let mut term = 1.0 / (2f64.powf(nu) * gamma_half_integer(nu + 1.0));
    let mut sum = term;
    for k in 1..200 {
        let k = k as f64;
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Hankel coefficients `a_k(nu)` up to the point where the series stops improving.
fn hankel_terms(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        let factor = (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        let next = term * factor;
        if next == 0.0 {
            break;
        }
        if next.abs() >= last {
            break;
        }
        last = next.abs();
        term = next;
        // a_k / x^k with sign (-1)^{floor(k/2)} split into P (even k) and Q (odd k).
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

/// `J_nu(x)` from the Hankel expansion, `x > 0`.
pub fn j_asymptotic(nu: f64, x: f64) -> f64 {
    let (p, q) = hankel_terms(nu, x);
    let omega = x - nu * FRAC_PI_2 - FRAC_PI_4;
    (2.0 / (PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
}

/// `J_n(x)` from Bessel's integral, integer `n >= 0`.
pub fn j_integral(n: i64, x: f64) -> f64 {
    let m = ((x.abs() + n as f64 + 48.0) as usize).next_multiple_of(8);
    let h = 2.0 * PI / m as f64;
    let sum: f64 = (0..m)
        .map(|j| {
            let t = j as f64 * h;
            (n as f64 * t - x * t.sin()).cos()
        })
        .sum();
    sum / m as f64
}

/// `J_nu(x)` for `x >= 0`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    let twice = check_order(nu);
    assert!(x >= 0.0, "bessel_j needs x >= 0");
    if x <= SERIES_MAX {
        if x == 0.0 {
            return if nu == 0.0 { 1.0 } else if nu > 0.0 { 0.0 } else { f64::INFINITY };
        }
        return x.powf(nu) * jtilde_series(nu, x);
    }
    if twice % 2 != 0 || x >= ASYMPTOTIC_MIN {
        j_asymptotic(nu, x)
    } else {
        j_integral(twice / 2, x)
    }
}

/// `J~_nu(s) = s^{-nu} J_nu(s)`, continuous at `s = 0`.
///
/// # Panics
/// If `2 nu` is not an integer or `nu < -1/2`, or if `s < 0`.
pub fn bessel_jtilde(nu: f64, s: f64) -> f64 {
    check_order(nu);
    assert!(s >= 0.0, "bessel_jtilde needs s >= 0");
    if s <= SERIES_MAX {
        jtilde_series(nu, s)
    } else {
        bessel_j(nu, s) * s.powf(-nu)
    }
}
