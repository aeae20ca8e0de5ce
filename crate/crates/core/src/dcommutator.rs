//! The trilinear singular integral
//! `c_d PV ∬ f(x) g(y) (v(x) - v(y)) . (x - y) / |x - y|^{d+2} dx dy`
//! on the torus: a principal-value lattice quadrature, an exact Fourier-side
//! evaluation, time-derivative checks along trajectories and a Hölder-ratio probe.

use crate::advection::{run, step_with, FlowSpec};
use crate::error::{MixError, Result};
use crate::field::{gradient, lp_norm, project_divergence_free, sobolev_w1p_seminorm, ScalarField, Spectrum, VelocityField};
use crate::functionals::{log_derivative, v_functional, w_functional};
use crate::grid::Grid;
use crate::logft::sphere_area;
use crate::mixing::dual_exponent;
use crate::random::{band_limited_field, rng_from_seed, solenoidal_field};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `c_d = d / sigma_{d-1}`.
pub fn commutator_constant(d: usize) -> f64 {
    d as f64 / sphere_area(d)
}

/// `K(h) = c_d (h ⊗ h - |h|^2 I / d) / |h|^{d+2}`.
pub fn kernel_matrix(h: &[f64], d: usize) -> Result<Vec<Vec<f64>>> {
    if h.len() != d || !(1..=2).contains(&d) {
        return Err(MixError::InvalidArgument(format!("displacement must have {d} components, d in {{1, 2}}")));
    }
    let r2: f64 = h.iter().map(|x| x * x).sum();
    if r2 == 0.0 {
        return Err(MixError::InvalidArgument("kernel is singular at h = 0".into()));
    }
    let c = commutator_constant(d) / r2.powf(0.5 * (d as f64 + 2.0));
    Ok((0..d)
        .map(|i| (0..d).map(|j| c * (h[i] * h[j] - if i == j { r2 / d as f64 } else { 0.0 })).collect())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrilinearMethod {
    PvPhysical,
    Fourier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffValue {
    pub eps: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrilinearResult {
    pub value: f64,
    pub method: TrilinearMethod,
    /// Truncated sums, largest cutoff first.
    pub cutoffs: Vec<CutoffValue>,
    /// Richardson limit of the cutoff ladder.
    pub extrapolated: f64,
    /// Convergence order estimated from the last three rungs, clamped to `[1, 3]`.
    pub observed_order: f64,
    /// `|extrapolated - value|`.
    pub residual: f64,
    /// Untruncated sums on each lag lattice, coarsest first.
    pub lattice: Vec<LatticeValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeValue {
    pub spacing: f64,
    pub value: f64,
}

impl TrilinearResult {
    fn exact(value: f64) -> Self {
        TrilinearResult {
            value,
            method: TrilinearMethod::Fourier,
            cutoffs: Vec::new(),
            extrapolated: value,
            observed_order: f64::NAN,
            residual: 0.0,
            lattice: Vec::new(),
        }
    }
}

/// Number of lattice images per axis on each side of the nearest-image cell.
pub const KERNEL_IMAGES: i64 = 64;
/// Rungs of the cutoff ladder `eps_j = 2^{-j} 4h`, `h` the grid spacing.
pub const CUTOFF_RUNGS: usize = 4;

fn check_triple(f: &ScalarField, g: &ScalarField, v: &VelocityField) -> Result<Grid> {
    let grid = *f.grid();
    grid.same_as(g.grid())?;
    grid.same_as(v.grid())?;
    if !grid.is_torus() {
        return Err(MixError::UnsupportedDomain("the trilinear form is evaluated on the torus".into()));
    }
    v.check_solenoidal()?;
    Ok(grid)
}

/// Lattice sum `sum_n (h + n) / |h + n|^{d+2}` over `|n_i| <= KERNEL_IMAGES`, plus
/// the leading far-field correction of the omitted images.
fn periodized_kernel(h: [f64; 2], d: usize) -> [f64; 2] {
    let m = KERNEL_IMAGES;
    let l = m as f64 + 0.5;
    let mut out = [0.0; 2];
    if d == 1 {
        for n in -m..=m {
            let x = h[0] + n as f64;
            out[0] += x.signum() / (x * x);
        }
        out[0] -= 2.0 * h[0] / (l * l);
        return out;
    }
    for n1 in -m..=m {
        let x1 = h[0] + n1 as f64;
        for n2 in -m..=m {
            let x2 = h[1] + n2 as f64;
            let r2 = x1 * x1 + x2 * x2;
            let w = 1.0 / (r2 * r2);
            out[0] += x1 * w;
            out[1] += x2 * w;
        }
    }
    let tail = (0.5 * PI + 1.0) / (l * l);
    out[0] -= h[0] * tail;
    out[1] -= h[1] * tail;
    out
}

fn nearest_image(k: usize, n: usize) -> f64 {
    let k = if 2 * k >= n { k as f64 - n as f64 } else { k as f64 };
    k / n as f64
}

/// Smooth radial cutoff: 1 on `[0, CUTOFF_INNER]`, 0 beyond `CUTOFF_OUTER`.
fn partition(r: f64) -> f64 {
    let t = (r - CUTOFF_INNER) / (CUTOFF_OUTER - CUTOFF_INNER);
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let e = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    e(1.0 - t) / (e(1.0 - t) + e(t))
}

pub const CUTOFF_INNER: f64 = 0.15;
pub const CUTOFF_OUTER: f64 = 0.4;
/// Lag lattices `2N, 4N, 8N` per axis for the singular part.
pub const LATTICE_LEVELS: usize = 3;

/// Spectrum of the lag correlation
/// `C_c(h) = int f(x) g(x+h) (v_c(x) - v_c(x+h)) dx`, one per velocity component,
/// on the torus of twice the resolution where every product is exact.
fn lag_correlation(f: &ScalarField, g: &ScalarField, v: &VelocityField) -> Result<Vec<Spectrum>> {
    let grid = *f.grid();
    let fine = Grid::torus(grid.dim(), 2 * grid.n())?;
    let f2 = pad(f, fine);
    let g2 = pad(g, fine);
    let fs = f2.spectrum();
    let gs = g2.spectrum();
    v.components()
        .iter()
        .map(|vc| {
            let v2 = pad(vc, fine);
            let fv = f2.mul(&v2)?.spectrum();
            let gv = g2.mul(&v2)?.spectrum();
            let coeffs = (0..fine.len())
                .map(|k| fv.coeffs()[k].conj() * gs.coeffs()[k] - fs.coeffs()[k].conj() * gv.coeffs()[k])
                .collect();
            Spectrum::new(fine, coeffs)
        })
        .collect()
}

/// Values of a trigonometric polynomial on the `m`-point lattice.
fn sample_on(spec: &Spectrum, m: usize) -> Result<Vec<f64>> {
    let src = *spec.grid();
    let d = src.dim();
    let dst = Grid::torus(d, m)?;
    let mut out = Spectrum::zeros(dst);
    for (i, c) in spec.coeffs().iter().enumerate() {
        let k = src.mode(i);
        if k[..d].iter().any(|&x| x.abs() >= src.max_mode()) {
            continue;
        }
        let a = dst.slot_of_mode(k[0]).expect("band fits");
        let b = if d == 2 { dst.slot_of_mode(k[1]).expect("band fits") } else { 0 };
        out.coeffs_mut()[dst.flatten([a, b])] = *c;
    }
    Ok(out.to_field().into_values())
}

fn lag_displacement(grid: &Grid, lag: usize) -> [f64; 2] {
    let [a, b] = grid.unflatten(lag);
    let n = grid.n();
    [nearest_image(a, n), if grid.dim() == 2 { nearest_image(b, n) } else { 0.0 }]
}

/// `K1(h) = h / |h|^{d+2}`.
fn kernel_vector(h: [f64; 2], d: usize) -> [f64; 2] {
    let r2 = h[0] * h[0] + h[1] * h[1];
    let w = 1.0 / r2.powf(0.5 * (d as f64 + 2.0));
    [h[0] * w, h[1] * w]
}

#[derive(Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    fn add(&mut self, t: f64) {
        let s = self.sum + t;
        self.comp += if self.sum.abs() >= t.abs() { (self.sum - s) + t } else { (t - s) + self.sum };
        self.sum = s;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Principal-value quadrature of the trilinear form in physical space.
///
/// The lag correlation `C(h)` is a trigonometric polynomial, so it is sampled
/// exactly on lag lattices finer than the grid. The periodized kernel is split by
/// a smooth radial cutoff into a compact singular part, summed on the lattices
/// `2N, 4N, 8N` and Romberg-extrapolated in the spacing, and a smooth periodic
/// remainder summed on the grid lattice. The cutoff ladder `eps_j = 2^{-j} 4h`
/// drops lags `|h| <= eps_j` from the finest singular sum.
pub fn trilinear_pv(f: &ScalarField, g: &ScalarField, v: &VelocityField) -> Result<TrilinearResult> {
    let grid = check_triple(f, g, v)?;
    let d = grid.dim();
    let n = grid.n();
    let corr = lag_correlation(f, g, v)?;
    let scale = -commutator_constant(d);

    // Smooth remainder on the grid lattice.
    let doubled = Grid::torus(d, 2 * n)?;
    let base: Vec<Vec<f64>> = corr.iter().map(|c| sample_on(c, 2 * n)).collect::<Result<_>>()?;
    let mut smooth = Compensated::default();
    for lag in 1..grid.len() {
        let [a, b] = grid.unflatten(lag);
        let fine_lag = doubled.flatten([2 * a, 2 * b]);
        let h = lag_displacement(&grid, lag);
        let kp = periodized_kernel(h, d);
        let k1 = kernel_vector(h, d);
        let chi = partition(h[0].hypot(h[1]));
        for c in 0..d {
            smooth.add(base[c][fine_lag] * (kp[c] - chi * k1[c]));
        }
    }
    let smooth = smooth.total() * grid.cell_volume();

    // Singular part on refined lattices.
    let mut lattice = Vec::with_capacity(LATTICE_LEVELS);
    let mut cutoffs = Vec::new();
    for level in 0..LATTICE_LEVELS {
        let m = n << (level + 1);
        let lat = Grid::torus(d, m)?;
        let vals: Vec<Vec<f64>> = corr.iter().map(|c| sample_on(c, m)).collect::<Result<_>>()?;
        let mut terms = Vec::new();
        let mut total = Compensated::default();
        for lag in 1..lat.len() {
            let h = lag_displacement(&lat, lag);
            let r = h[0].hypot(h[1]);
            if r >= CUTOFF_OUTER {
                continue;
            }
            let k1 = kernel_vector(h, d);
            let chi = partition(r);
            let t: f64 = (0..d).map(|c| vals[c][lag] * chi * k1[c]).sum();
            total.add(t);
            terms.push((r, t));
        }
        let cell = lat.cell_volume();
        lattice.push(LatticeValue { spacing: 1.0 / m as f64, value: scale * (smooth + total.total() * cell) });
        if level + 1 == LATTICE_LEVELS {
            for j in 0..CUTOFF_RUNGS {
                let eps = 4.0 * grid.spacing() / f64::powi(2.0, j as i32);
                let mut acc = Compensated::default();
                for &(_, t) in terms.iter().filter(|(r, _)| *r > eps * (1.0 + 1e-12)) {
                    acc.add(t);
                }
                cutoffs.push(CutoffValue { eps, value: scale * (smooth + acc.total() * cell) });
            }
        }
    }

    let s: Vec<f64> = lattice.iter().map(|l| l.value).collect();
    let r1 = [(4.0 * s[1] - s[0]) / 3.0, (4.0 * s[2] - s[1]) / 3.0];
    let value = (16.0 * r1[1] - r1[0]) / 15.0;

    let k = cutoffs.len();
    let (v0, v1, v2) = (cutoffs[k - 3].value, cutoffs[k - 2].value, cutoffs[k - 1].value);
    let ratio = (v0 - v1) / (v1 - v2);
    let observed_order = if ratio.is_finite() && ratio > 0.0 { ratio.log2().clamp(1.0, 3.0) } else { 1.0 };
    let extrapolated = if v1 == v2 { v2 } else { v2 + (v2 - v1) / (f64::powf(2.0, observed_order) - 1.0) };
    Ok(TrilinearResult {
        value,
        method: TrilinearMethod::PvPhysical,
        cutoffs,
        extrapolated,
        observed_order,
        residual: (extrapolated - value).abs(),
        lattice,
    })
}

/// Copy `f` onto the finer torus `fine` by zero-padding its spectrum. Nyquist
/// coefficients are split evenly between `+-N/2` so the result stays real.
fn pad(f: &ScalarField, fine: Grid) -> ScalarField {
    let coarse = *f.grid();
    let spec = f.spectrum();
    let d = coarse.dim();
    let half = coarse.max_mode();
    let targets = |k: i64| -> Vec<(usize, f64)> {
        if k.abs() == half {
            vec![(fine.slot_of_mode(half).unwrap(), 0.5), (fine.slot_of_mode(-half).unwrap(), 0.5)]
        } else {
            vec![(fine.slot_of_mode(k).unwrap(), 1.0)]
        }
    };
    let mut out = Spectrum::zeros(fine);
    for (i, c) in spec.coeffs().iter().enumerate() {
        let k = coarse.mode(i);
        let ys = if d == 2 { targets(k[1]) } else { vec![(0, 1.0)] };
        for (a, wa) in targets(k[0]) {
            for &(b, wb) in &ys {
                out.coeffs_mut()[fine.flatten([a, b])] += c * (wa * wb);
            }
        }
    }
    out.to_field()
}

/// `2 Re sum_{xi, eta} log|xi| (-2 pi i) xi . v_hat(xi + eta) f_hat(-xi) g_hat(-eta)`,
/// evaluated as `2 ∫ g v . grad(phi_f)` with `phi_f_hat = log|xi| f_hat` on a grid
/// twice as fine, where the quadrature of the band-limited product is exact.
pub fn fourier_pairing(f: &ScalarField, g: &ScalarField, v: &VelocityField) -> Result<f64> {
    let grid = check_triple(f, g, v)?;
    let fine = Grid::torus(grid.dim(), 2 * grid.n())?;
    let phi = pad(&log_derivative(f), fine);
    let g2 = pad(g, fine);
    let grad = gradient(&phi);
    let mut total = 0.0;
    for (c, vc) in v.components().iter().enumerate() {
        let vf = pad(vc, fine);
        let gc = grad.component(c).values();
        total += g2.values().iter().zip(vf.values()).zip(gc).map(|((a, b), c)| a * b * c).sum::<f64>();
    }
    Ok(2.0 * total * fine.cell_volume())
}

/// Symmetrised double mode sum `(P(f,g) + P(g,f)) / 2` with `P` the
/// [`fourier_pairing`]; equals the principal-value integral.
pub fn trilinear_fourier(f: &ScalarField, g: &ScalarField, v: &VelocityField) -> Result<f64> {
    Ok(0.5 * (fourier_pairing(f, g, v)? + fourier_pairing(g, f, v)?))
}

/// [`trilinear_fourier`] wrapped as a [`TrilinearResult`].
pub fn trilinear_fourier_result(f: &ScalarField, g: &ScalarField, v: &VelocityField) -> Result<TrilinearResult> {
    trilinear_fourier(f, g, v).map(TrilinearResult::exact)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    pub t: f64,
    pub dt: f64,
    /// Centred difference of the functional.
    pub lhs: f64,
    /// Trilinear right-hand side.
    pub rhs: f64,
    pub gap: f64,
}

impl DerivativeCheck {
    /// `gap <= tol * max(1, |rhs|)`.
    pub fn within(&self, tol: f64) -> bool {
        self.gap <= tol * self.rhs.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Derivative {
    V,
    W,
}

/// `u(t)` and the neighbours `theta(t +- dt)` of `theta = theta(t)` from single RK4 steps.
fn neighbours(theta: &ScalarField, flow: &FlowSpec, t: f64, dt: f64) -> Result<(VelocityField, ScalarField, ScalarField)> {
    if !(t >= 0.0) || !(dt > 0.0) {
        return Err(MixError::InvalidArgument("need t >= 0 and dt > 0".into()));
    }
    if let Some(end) = flow.segment_end(t) {
        let start = flow.segment_end(t - dt).unwrap_or(end);
        if t + dt > end || start != end {
            return Err(MixError::InvalidArgument(format!("[t - dt, t + dt] must lie inside one flow segment (t = {t})")));
        }
    }
    let u = flow.velocity(theta.grid(), t)?;
    let plus = step_with(theta, &u, dt, flow.dealias)?;
    let minus = step_with(theta, &u, -dt, flow.dealias)?;
    Ok((u, plus, minus))
}

/// As [`dv_dt_check`] / [`dw_dt_check`], starting from the state `theta = theta(t)`
/// instead of integrating from time 0.
pub fn derivative_check_at(which: Derivative, theta: &ScalarField, flow: &FlowSpec, t: f64, dt: f64) -> Result<DerivativeCheck> {
    let (u, plus, minus) = neighbours(theta, flow, t, dt)?;
    let (lhs, rhs) = match which {
        Derivative::V => ((v_functional(&plus) - v_functional(&minus)) / (2.0 * dt), trilinear_fourier(theta, theta, &u)?),
        Derivative::W => {
            let phi = log_derivative(theta);
            ((w_functional(&plus) - w_functional(&minus)) / (2.0 * dt), fourier_pairing(&phi, theta, &u)?)
        }
    };
    Ok(DerivativeCheck { t, dt, lhs, rhs, gap: (lhs - rhs).abs() })
}

fn derivative_check(which: Derivative, theta0: &ScalarField, flow: &FlowSpec, t: f64, dt: f64) -> Result<DerivativeCheck> {
    if !(t >= 0.0) || !(dt > 0.0) {
        return Err(MixError::InvalidArgument("need t >= 0 and dt > 0".into()));
    }
    let theta = if t == 0.0 { theta0.clone() } else { run(theta0, flow, t, t, 2.0)?.last().field.clone() };
    derivative_check_at(which, &theta, flow, t, dt)
}

/// Centred difference of `V` against `trilinear(theta, theta, u)` at time `t`.
pub fn dv_dt_check(theta0: &ScalarField, flow: &FlowSpec, t: f64, dt: f64) -> Result<DerivativeCheck> {
    derivative_check(Derivative::V, theta0, flow, t, dt)
}

/// Centred difference of `W` against `2 trilinear(phi, theta, u)`,
/// `phi_hat = log|xi| theta_hat`. The factor 2 collects the two orderings of the
/// pairing; the second, `P(theta, phi)`, vanishes because `div u = 0`.
pub fn dw_dt_check(theta0: &ScalarField, flow: &FlowSpec, t: f64, dt: f64) -> Result<DerivativeCheck> {
    derivative_check(Derivative::W, theta0, flow, t, dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderCheck {
    pub coarse: DerivativeCheck,
    pub fine: DerivativeCheck,
    /// `gap(dt) / gap(dt / 2)`; close to 4 for a second-order difference.
    pub ratio: f64,
}

pub fn order_check(which: Derivative, theta0: &ScalarField, flow: &FlowSpec, t: f64, dt: f64) -> Result<OrderCheck> {
    let coarse = derivative_check(which, theta0, flow, t, dt)?;
    let fine = derivative_check(which, theta0, flow, t, 0.5 * dt)?;
    Ok(OrderCheck { coarse, fine, ratio: coarse.gap / fine.gap })
}

/// Random `(f, g, v)` triples: mean-zero band-limited scalars and a solenoidal
/// velocity, one seed per triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderFamily {
    pub d: usize,
    pub n: usize,
    pub max_mode: i64,
    pub count: usize,
    pub seed: u64,
    /// Degenerate family with `v = 0`.
    pub zero_velocity: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderSample {
    pub seed: u64,
    pub p: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderStats {
    pub p: f64,
    pub count: usize,
    /// Largest observed ratio: an empirical lower estimate for the constant, not a bound.
    pub max: f64,
    pub mean: f64,
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
    pub samples: Vec<HolderSample>,
}

impl HolderStats {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("seed,p,ratio\n");
        for r in &self.samples {
            s.push_str(&format!("{},{:.16e},{:.16e}\n", r.seed, r.p, r.ratio));
        }
        s
    }

    /// Summary without the per-sample rows.
    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "p": self.p, "count": self.count, "max": self.max, "mean": self.mean,
            "q50": self.q50, "q90": self.q90, "q99": self.q99,
        }))
        .expect("summary serialises")
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Distribution of `|trilinear(f, g, v)| / (||f||_inf ||g||_{p'} ||grad v||_p)`.
pub fn holder_ratio_probe(family: &HolderFamily, p: f64) -> Result<HolderStats> {
    if !(p >= 1.0) {
        return Err(MixError::InvalidArgument("p must be at least 1".into()));
    }
    let grid = Grid::torus(family.d, family.n)?;
    let mut samples = Vec::with_capacity(family.count);
    for i in 0..family.count {
        let seed = family.seed.wrapping_add(i as u64);
        let mut rng = rng_from_seed(seed);
        let f = band_limited_field(grid, family.max_mode, true, &mut rng);
        let g = band_limited_field(grid, family.max_mode, true, &mut rng);
        let v = if family.zero_velocity {
            VelocityField::zeros(grid)
        } else {
            project_divergence_free(&solenoidal_field(grid, family.max_mode, &mut rng))
        };
        let value = trilinear_fourier(&f, &g, &v)?;
        let denom = f.max_abs() * lp_norm(&g, dual_exponent(p))? * sobolev_w1p_seminorm(&v, p)?;
        let ratio = if value == 0.0 { 0.0 } else { value.abs() / denom };
        samples.push(HolderSample { seed, p, ratio });
    }
    let mut sorted: Vec<f64> = samples.iter().map(|s| s.ratio).collect();
    sorted.sort_by(f64::total_cmp);
    let count = sorted.len();
    Ok(HolderStats {
        p,
        count,
        max: sorted.last().copied().unwrap_or(f64::NAN),
        mean: sorted.iter().sum::<f64>() / count.max(1) as f64,
        q50: quantile(&sorted, 0.5),
        q90: quantile(&sorted, 0.9),
        q99: quantile(&sorted, 0.99),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::num_complex::Complex64;
    use crate::advection::{velocity_library, FlowParams};

    fn shear(g: Grid) -> VelocityField {
        VelocityField::from_fns(g, |x| [(2.0 * PI * x[1]).sin(), 0.0])
    }

    fn brute_force_pairing(f: &ScalarField, g: &ScalarField, v: &VelocityField) -> f64 {
        let grid = *f.grid();
        let d = grid.dim();
        let fs = f.spectrum();
        let gs = g.spectrum();
        let vs: Vec<Spectrum> = v.components().iter().map(|c| c.spectrum()).collect();
        let modes: Vec<[i64; 2]> = (0..grid.len()).map(|i| grid.mode(i)).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for xi in &modes {
            let r = (xi[0] as f64).hypot(xi[1] as f64);
            if r == 0.0 {
                continue;
            }
            let fxi = fs.at_mode([-xi[0], -xi[1]]).unwrap_or_default();
            for eta in &modes {
                let s = [xi[0] + eta[0], xi[1] + eta[1]];
                let geta = gs.at_mode([-eta[0], -eta[1]]).unwrap_or_default();
                let mut dot = Complex64::new(0.0, 0.0);
                for a in 0..d {
                    if let Some(c) = vs[a].at_mode(s) {
                        dot += c * xi[a] as f64;
                    }
                }
                total += r.ln() * Complex64::new(0.0, -2.0 * PI) * dot * fxi * geta;
            }
        }
        2.0 * total.re
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_matrix(&[1.0, 0.0], 2).unwrap();
        let c2 = 1.0 / PI;
        assert!((k[0][0] - 0.5 * c2).abs() < 1e-16 && (k[1][1] + 0.5 * c2).abs() < 1e-16);
        assert_eq!(k[0][1], 0.0);
        assert!(kernel_matrix(&[0.0, 0.0], 2).is_err());
        let h = [0.3, -0.7];
        let k1 = kernel_matrix(&h, 2).unwrap();
        let k2 = kernel_matrix(&[0.6, -1.4], 2).unwrap();
        assert!((k1[0][0] + k1[1][1]).abs() < 1e-15);
        for i in 0..2 {
            for j in 0..2 {
                assert!((k2[i][j] - 0.25 * k1[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn pairing_matches_double_mode_sum() {
        let g = Grid::torus(2, 16).unwrap();
        let mut rng = rng_from_seed(11);
        let f = band_limited_field(g, 3, false, &mut rng);
        let h = band_limited_field(g, 3, true, &mut rng);
        let v = project_divergence_free(&solenoidal_field(g, 3, &mut rng));
        let fast = fourier_pairing(&f, &h, &v).unwrap();
        let slow = brute_force_pairing(&f, &h, &v);
        assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1.0), "{fast} vs {slow}");
    }

    #[test]
    fn zero_and_constant_velocity() {
        let g = Grid::torus(2, 16).unwrap();
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).cos() + (4.0 * PI * x[1]).sin());
        assert_eq!(trilinear_fourier(&f, &f, &VelocityField::zeros(g)).unwrap(), 0.0);
        let c = VelocityField::from_fns(g, |_| [0.3, -1.1]);
        assert!(trilinear_pv(&f, &f, &c).unwrap().value.abs() <= 1e-10);
        assert!(trilinear_fourier(&f, &f, &c).unwrap().abs() <= 1e-10);
    }

    #[test]
    fn pv_matches_fourier_small() {
        let g = Grid::torus(2, 32).unwrap();
        let mut rng = rng_from_seed(2);
        let f = band_limited_field(g, 4, true, &mut rng);
        let h = band_limited_field(g, 4, true, &mut rng);
        let v = project_divergence_free(&solenoidal_field(g, 4, &mut rng));
        let pv = trilinear_pv(&f, &h, &v).unwrap();
        let fo = trilinear_fourier(&f, &h, &v).unwrap();
        assert!((pv.value - fo).abs() <= 1e-4 * fo.abs(), "{} vs {fo}", pv.value);
        assert_eq!(pv.cutoffs.len(), CUTOFF_RUNGS);
        assert!(pv.observed_order >= 1.0);
    }

    #[test]
    fn symmetric_in_scalars() {
        let g = Grid::torus(2, 32).unwrap();
        let mut rng = rng_from_seed(5);
        let f = band_limited_field(g, 4, true, &mut rng);
        let h = band_limited_field(g, 4, true, &mut rng);
        let v = shear(g);
        let a = trilinear_fourier(&f, &h, &v).unwrap();
        let b = trilinear_fourier(&h, &f, &v).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn rejects_compressible_velocity() {
        let g = Grid::torus(2, 16).unwrap();
        let f = ScalarField::constant(g, 1.0);
        let v = VelocityField::from_fns(g, |x| [(2.0 * PI * x[0]).sin(), 0.0]);
        assert!(matches!(trilinear_pv(&f, &f, &v), Err(MixError::NotSolenoidal { .. })));
    }

    #[test]
    fn zero_flow_derivatives_vanish() {
        let g = Grid::torus(2, 16).unwrap();
        let f = ScalarField::from_fn(g, |x| 2.0 * (2.0 * PI * x[0]).cos());
        let flow = velocity_library("zero", &FlowParams::default()).unwrap();
        let c = dv_dt_check(&f, &flow, 0.0, 1e-3).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
        let c = dw_dt_check(&f, &flow, 0.0, 1e-3).unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
    }

    #[test]
    fn holder_probe_degenerate_and_deterministic() {
        let fam = HolderFamily { d: 2, n: 16, max_mode: 3, count: 3, seed: 9, zero_velocity: true };
        let s = holder_ratio_probe(&fam, 2.0).unwrap();
        assert!(s.samples.iter().all(|r| r.ratio == 0.0));
        let fam = HolderFamily { zero_velocity: false, count: 1, ..fam };
        let a = holder_ratio_probe(&fam, 2.0).unwrap();
        let b = holder_ratio_probe(&fam, 2.0).unwrap();
        assert_eq!(a.samples[0].ratio.to_bits(), b.samples[0].ratio.to_bits());
        assert!(a.to_csv().starts_with("seed,p,ratio\n"));
    }
}
