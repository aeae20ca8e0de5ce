//! Log-Sobolev functionals `V`, `W`, the homogeneous `H^s` family, and the
//! physical-space double-integral form of `V`.
//!
//! On the torus the sums run over integer modes `k != 0`. On a box they are Riemann
//! sums over the dual lattice `xi = k / (2R)`; the cell at `xi = 0`, where the log
//! weight is singular, receives the weight that makes the lattice sum agree with the
//! integral for smooth spectra (a generalized Euler-Maclaurin correction involving
//! the lattice zeta constants below).

use crate::constants::Constants;
use crate::error::{MixError, Result};
use crate::field::{ScalarField, Spectrum, BOUNDARY_MASS_THRESHOLD};
use crate::grid::Grid;
use crate::logft::EULER_GAMMA;
use serde::{Deserialize, Serialize};

/// `sum_{k != 0} log|k| phi(k) - int log|x| phi(x) dx`, per unit `phi(0)`, on `Z^d`.
const LOG_LATTICE: [f64; 2] = [1.837_877_066_409_345_5, 1.310_532_925_911_509_5];
/// Same for the squared log.
const LOG2_LATTICE: [f64; 2] = [-4.012_712_911_817_169_7, -1.606_464_139_895_196_2];
/// Next-order terms, per unit `Laplacian phi(0)`.
const LOG_LATTICE_LAPLACE: [f64; 2] = [0.030_448_457_058_393_27, 0.024_296_742_002_568_23];
const LOG2_LATTICE_LAPLACE: [f64; 2] = [-0.065_763_516_187_425_2, -0.046_766_048_538_068_46];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FunctionalKind {
    V,
    W,
    Hs { s: f64 },
    L2,
}

/// A functional value together with where it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalValue {
    #[serde(flatten)]
    pub kind: FunctionalKind,
    pub value: f64,
    pub grid: Grid,
    /// Present for the physical-space form of `V`.
    pub truncation: Option<PhysicalTruncation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalTruncation {
    /// Radius of the lag cell treated by the gradient limit (the grid spacing).
    pub inner_cutoff: f64,
    /// Largest lag magnitude that enters the sum.
    pub outer_radius: f64,
}

/// Physical-space `V` and its pieces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalV {
    pub value: f64,
    /// Lattice sum of the regularised lag integrand, origin excluded.
    pub lag_sum: f64,
    /// Contribution of the origin lag cell.
    pub origin_cell: f64,
    pub l2_squared: f64,
    /// `int |grad f|^2` from centred differences.
    pub gradient_energy: f64,
    pub truncation: PhysicalTruncation,
}

/// Spectral weight `w(|xi|)` summed against `|f_hat|^2`, excluding the origin slot.
fn weighted_sum(spec: &Spectrum, w: impl Fn(f64) -> f64) -> f64 {
    let grid = spec.grid();
    let mut total = 0.0;
    for (i, c) in spec.coeffs().iter().enumerate() {
        let r = grid.frequency_norm(i);
        if r > 0.0 {
            total += w(r) * c.norm_sqr();
        }
    }
    total * grid.dual_cell_volume()
}

fn origin_energy(spec: &Spectrum) -> f64 {
    spec.coeffs()[0].norm_sqr() * spec.grid().dual_cell_volume()
}

/// `dxi^d` times the Laplacian of `|f_hat|^2` at the origin, by the 5-point stencil.
fn origin_laplacian(spec: &Spectrum) -> f64 {
    let grid = spec.grid();
    let c0 = spec.coeffs()[0].norm_sqr();
    let mut lap = 0.0;
    for axis in 0..grid.dim() {
        for k in [1, -1] {
            let mut m = [0i64; 2];
            m[axis] = k;
            lap += spec.at_mode(m).map_or(0.0, |c| c.norm_sqr()) - c0;
        }
    }
    let delta = grid.dual_spacing();
    lap / (delta * delta) * grid.dual_cell_volume()
}

fn v_of_spectrum(spec: &Spectrum) -> f64 {
    let grid = spec.grid();
    let sum = weighted_sum(spec, f64::ln);
    if grid.is_torus() {
        return sum;
    }
    let delta = grid.dual_spacing();
    let d = grid.dim() - 1;
    let w = delta.ln() - LOG_LATTICE[d];
    sum + w * origin_energy(spec) - LOG_LATTICE_LAPLACE[d] * delta * delta * origin_laplacian(spec)
}

fn w_of_spectrum(spec: &Spectrum) -> f64 {
    let grid = spec.grid();
    let sum = weighted_sum(spec, |r| r.ln().powi(2));
    if grid.is_torus() {
        return sum;
    }
    let ld = grid.dual_spacing().ln();
    let d = grid.dim() - 1;
    let w = ld * ld - 2.0 * LOG_LATTICE[d] * ld - LOG2_LATTICE[d];
    let w2 = 2.0 * LOG_LATTICE_LAPLACE[d] * ld + LOG2_LATTICE_LAPLACE[d];
    let delta = grid.dual_spacing();
    sum + w * origin_energy(spec) - w2 * delta * delta * origin_laplacian(spec)
}

/// `V(f) = int log|xi| |f_hat|^2` (torus: `sum_{k != 0}`).
pub fn v_functional(f: &ScalarField) -> f64 {
    v_of_spectrum(&f.spectrum())
}

/// `W(f) = int (log|xi|)^2 |f_hat|^2` (torus: `sum_{k != 0}`).
///
/// On a box the origin correction can make the value slightly negative for spectra
/// that are not resolved by the dual lattice; it is clamped at zero.
pub fn w_functional(f: &ScalarField) -> f64 {
    w_of_spectrum(&f.spectrum()).max(0.0)
}

/// `||f||_{H^s}`, the root of `int |xi|^{2s} |f_hat|^2` over `xi != 0`.
///
/// On a box the origin cell is dropped, which for `s < 0` omits a divergent but
/// integrable contribution of size `O(dxi^{d+2s})`.
pub fn hs_norm(f: &ScalarField, s: f64) -> f64 {
    hs_norm_squared(&f.spectrum(), s).sqrt()
}

pub(crate) fn hs_norm_squared(spec: &Spectrum, s: f64) -> f64 {
    weighted_sum(spec, |r| r.powf(2.0 * s))
}

/// Mass of the spectrum that the functionals see: `||f - mean||^2` on the torus,
/// `||f||^2` on a box.
pub fn active_l2_squared(f: &ScalarField) -> f64 {
    let spec = f.spectrum();
    if f.grid().is_torus() {
        spec.energy() - origin_energy(&spec)
    } else {
        spec.energy()
    }
}

pub fn evaluate(f: &ScalarField, kind: FunctionalKind) -> FunctionalValue {
    let value = match kind {
        FunctionalKind::V => v_functional(f),
        FunctionalKind::W => w_functional(f),
        FunctionalKind::Hs { s } => hs_norm(f, s),
        FunctionalKind::L2 => f.l2_norm(),
    };
    FunctionalValue { kind, value, grid: *f.grid(), truncation: None }
}

/// `| ||f||_{H^s}^2 - (||f||^2 + 2 s V + 2 s^2 W) |`, with `||f||^2` the mass seen by
/// the functionals (mean removed on the torus).
pub fn small_s_expansion_residual(f: &ScalarField, s: f64) -> f64 {
    let spec = f.spectrum();
    let hs2 = hs_norm_squared(&spec, s);
    let mass = weighted_sum(&spec, |_| 1.0);
    let v = weighted_sum(&spec, f64::ln);
    let w = weighted_sum(&spec, |r| r.ln().powi(2));
    (hs2 - (mass + 2.0 * s * v + 2.0 * s * s * w)).abs()
}

/// Spectral field `phi` with `phi_hat = log|xi| f_hat` (zero at the origin).
pub fn log_derivative(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    f.spectrum()
        .apply_real(|i| {
            let r = grid.frequency_norm(i);
            if r > 0.0 {
                r.ln()
            } else {
                0.0
            }
        })
        .to_field()
}

/// Autocorrelation `A(a, b) = h^d sum_x f(x) f(x + (a, b) h)` without wrap-around,
/// for `a` in `0..n` and `b` in `-(n-1)..n` (offset by `n - 1` in the output).
fn autocorrelation(f: &ScalarField) -> Vec<f64> {
    let grid = f.grid();
    let n = grid.n();
    let v = f.values();
    let w = grid.cell_volume();
    if grid.dim() == 1 {
        return (0..n)
            .map(|a| w * v[..n - a].iter().zip(&v[a..]).map(|(x, y)| x * y).sum::<f64>())
            .collect();
    }
    let width = 2 * n - 1;
    let mut out = vec![0.0; n * width];
    for a in 0..n {
        for b in 0..width {
            let shift = b as isize - (n as isize - 1);
            // Half-plane: a = 0 only needs b >= 0.
            if a == 0 && shift < 0 {
                continue;
            }
            let (j0, j1) = if shift >= 0 { (0, n - shift as usize) } else { ((-shift) as usize, n) };
            let mut acc = 0.0;
            for i in 0..n - a {
                let row = &v[i * n..(i + 1) * n];
                let other = &v[(i + a) * n..(i + a + 1) * n];
                let s = shift;
                acc += (j0..j1).map(|j| row[j] * other[(j as isize + s) as usize]).sum::<f64>();
            }
            out[a * width + b] = w * acc;
        }
    }
    out
}

fn gradient_energy_fd(f: &ScalarField) -> f64 {
    let grid = f.grid();
    let n = grid.n() as isize;
    let h = grid.spacing();
    let v = f.values();
    let at = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i >= n || j >= n {
            0.0
        } else {
            v[grid.flatten([i as usize, j as usize])]
        }
    };
    let mut total = 0.0;
    for flat in 0..grid.len() {
        let [i, j] = grid.unflatten(flat);
        let (i, j) = (i as isize, j as isize);
        let dx = (at(i + 1, j) - at(i - 1, j)) / (2.0 * h);
        total += dx * dx;
        if grid.dim() == 2 {
            let dy = (at(i, j + 1) - at(i, j - 1)) / (2.0 * h);
            total += dy * dy;
        }
    }
    total * grid.cell_volume()
}

/// `V` from the physical-space identity
/// `alpha_d ( 1/2 iint_{|x-y|<=1} |f(x)-f(y)|^2/|x-y|^d - iint_{|x-y|>1} f(x) f(y)/|x-y|^d ) + beta_d ||f||^2`.
///
/// With `A(h) = int f(x) f(x+h) dx` the bracket equals
/// `int (A(0) e^{-|h|^2} - A(h)) / |h|^d dh + A(0) sigma_{d-1} gamma / 2`, whose
/// integrand is bounded near `h = 0`. The lag integral is a lattice sum over all
/// lags of the box grid; the origin cell uses the second-order expansion
/// `A(h) = A(0) - h.G h / 2` with `G` from centred differences.
pub fn v_physical(f: &ScalarField, consts: &Constants) -> Result<PhysicalV> {
    let grid = *f.grid();
    if grid.is_torus() {
        return Err(MixError::UnsupportedDomain("the physical form of V is defined on R^d; use a box grid".into()));
    }
    if consts.d != grid.dim() {
        return Err(MixError::InvalidArgument(format!(
            "constants are for d = {}, field has d = {}",
            consts.d,
            grid.dim()
        )));
    }
    let ratio = f.boundary_mass_ratio();
    if ratio > BOUNDARY_MASS_THRESHOLD {
        return Err(MixError::Hypothesis(format!(
            "field does not decay inside the box (boundary mass ratio {ratio:.3e})"
        )));
    }
    let d = grid.dim();
    let n = grid.n();
    let h = grid.spacing();
    let corr = autocorrelation(f);
    let a0 = corr[if d == 1 { 0 } else { n - 1 }];
    let integrand = |r2: f64, a: f64| (a0 * (-r2).exp() - a) / r2.powf(d as f64 / 2.0);

    let mut lag_sum = 0.0;
    if d == 1 {
        for (a, &c) in corr.iter().enumerate().skip(1) {
            let r = a as f64 * h;
            lag_sum += 2.0 * integrand(r * r, c);
        }
        lag_sum *= h;
    } else {
        let width = 2 * n - 1;
        for a in 0..n {
            for b in 0..width {
                let shift = b as isize - (n as isize - 1);
                if a == 0 && shift <= 0 {
                    continue;
                }
                let (x, y) = (a as f64 * h, shift as f64 * h);
                lag_sum += 2.0 * integrand(x * x + y * y, corr[a * width + b]);
            }
        }
        lag_sum *= h * h;
    }
    let g = gradient_energy_fd(f);
    let origin_cell = if d == 1 {
        // Kink correction for c|h| at a lattice node.
        h * h * (g / 2.0 - a0) / 6.0
    } else {
        h * h * (g / (2.0 * d as f64) - a0)
    };
    let bracket = lag_sum + origin_cell + a0 * consts.sigma * EULER_GAMMA / 2.0;
    let value = consts.alpha * bracket + consts.beta * a0;
    let outer = 2.0 * grid.half_width().unwrap_or(0.0) * (d as f64).sqrt();
    Ok(PhysicalV {
        value,
        lag_sum,
        origin_cell,
        l2_squared: a0,
        gradient_energy: g,
        truncation: PhysicalTruncation { inner_cutoff: h, outer_radius: outer },
    })
}
