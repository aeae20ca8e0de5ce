//! Scalar and vector fields on a [`Grid`] with the `e^{-2 pi i xi x}` Fourier convention.
//!
//! On the torus the coefficient at integer mode `k` approximates
//! `int_{T^d} e^{-2 pi i k x} f(x) dx`. On a box the coefficient at `xi = k / (2R)`
//! is the Riemann-sum approximation of the continuum transform, including the
//! phase from the box offset, so the inverse transform uses the dual cell weight.

use crate::error::{MixError, Result};
use crate::fft::{self, Direction};
use crate::grid::Grid;
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

/// Fraction of L2 mass allowed on the outermost box cells before a field is
/// considered not to decay.
pub const BOUNDARY_MASS_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(MixError::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(MixError::InvalidArgument(format!("non-finite sample at index {bad}")));
        }
        Ok(ScalarField { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        ScalarField { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        ScalarField { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        ScalarField { grid, values: vec![c; grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(ScalarField { grid: self.grid, values })
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(ScalarField { grid: self.grid, values })
    }

    /// `int f dx` by the rectangle rule.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().sum::<f64>()
    }

    /// Domain average. On the torus this is `f_hat(0)`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn spectrum(&self) -> Spectrum {
        forward_transform(self)
    }

    /// Root of the L2 mass carried by the outermost ring of cells, relative to the
    /// total L2 norm. Zero on the torus.
    pub fn boundary_mass_ratio(&self) -> f64 {
        if self.grid.is_torus() {
            return 0.0;
        }
        let n = self.grid.n();
        let d = self.grid.dim();
        let mut edge = 0.0;
        let mut total = 0.0;
        for (flat, v) in self.values.iter().enumerate() {
            let idx = self.grid.unflatten(flat);
            let on_edge = idx[..d].iter().any(|&i| i == 0 || i == n - 1);
            total += v * v;
            if on_edge {
                edge += v * v;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (edge / total).sqrt()
        }
    }
}

/// Fourier coefficients in FFT slot order, normalised as described at module level.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(MixError::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Spectrum { grid, coeffs })
    }

    pub fn zeros(grid: Grid) -> Self {
        Spectrum { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn at_mode(&self, k: [i64; 2]) -> Option<Complex64> {
        let i = self.grid.slot_of_mode(k[0])?;
        let j = if self.grid.dim() == 2 { self.grid.slot_of_mode(k[1])? } else { 0 };
        Some(self.coeffs[self.grid.flatten([i, j])])
    }

    /// `sum |c|^2` times the dual cell weight, i.e. the L2 norm squared via Parseval.
    pub fn energy(&self) -> f64 {
        self.grid.dual_cell_volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Largest violation of `c(-k) = conj(c(k))`, relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if scale == 0.0 {
            return 0.0;
        }
        let n = self.grid.n();
        let d = self.grid.dim();
        let mut worst = 0.0_f64;
        for flat in 0..self.coeffs.len() {
            let idx = self.grid.unflatten(flat);
            let mut neg = [0usize; 2];
            for a in 0..d {
                neg[a] = (n - idx[a]) % n;
            }
            let other = self.coeffs[self.grid.flatten(neg)];
            worst = worst.max((self.coeffs[flat] - other.conj()).norm());
        }
        worst / scale
    }

    /// Multiply every coefficient by `m(flat_slot)`.
    pub fn apply(&self, m: impl Fn(usize) -> Complex64) -> Spectrum {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| c * m(i)).collect();
        Spectrum { grid: self.grid, coeffs }
    }

    /// Multiply every coefficient by the real weight `w(flat_slot)`.
    pub fn apply_real(&self, w: impl Fn(usize) -> f64) -> Spectrum {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, c)| c * w(i)).collect();
        Spectrum { grid: self.grid, coeffs }
    }

    pub fn to_field(&self) -> ScalarField {
        inverse_transform(self)
    }
}

fn box_phase(grid: &Grid, flat: usize) -> f64 {
    // e^{2 pi i xi R} at xi = k / (2R) is (-1)^k per axis.
    let k = grid.mode(flat);
    if (k[0] + k[1]).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn forward_transform(field: &ScalarField) -> Spectrum {
    let grid = field.grid;
    let mut data: Vec<Complex64> = field.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::transform(&mut data, grid.dim(), grid.n(), Direction::Forward);
    let w = grid.cell_volume();
    if grid.is_torus() {
        data.iter_mut().for_each(|c| *c *= w);
    } else {
        for (i, c) in data.iter_mut().enumerate() {
            *c *= w * box_phase(&grid, i);
        }
    }
    Spectrum { grid, coeffs: data }
}

/// Inverse transform; the imaginary part (roundoff for Hermitian input) is dropped.
pub fn inverse_transform(spectrum: &Spectrum) -> ScalarField {
    let grid = spectrum.grid;
    let mut data = spectrum.coeffs.clone();
    if !grid.is_torus() {
        let w = grid.dual_cell_volume();
        for (i, c) in data.iter_mut().enumerate() {
            *c *= w * box_phase(&grid, i);
        }
    }
    fft::transform(&mut data, grid.dim(), grid.n(), Direction::Inverse);
    ScalarField { grid, values: data.into_iter().map(|c| c.re).collect() }
}

/// A `d`-component field. Solenoidality is not enforced on construction; consumers
/// that need it call [`VectorField::check_solenoidal`].
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: Vec<ScalarField>,
}

/// Velocity fields are vector fields that consumers check for zero divergence.
pub type VelocityField = VectorField;

/// Relative spectral divergence allowed for a velocity field.
pub const SOLENOIDAL_TOLERANCE: f64 = 1e-10;

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let grid = *components
            .first()
            .ok_or_else(|| MixError::InvalidArgument("vector field needs components".into()))?
            .grid();
        if components.len() != grid.dim() {
            return Err(MixError::InvalidArgument(format!(
                "expected {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        for c in &components {
            grid.same_as(c.grid())?;
        }
        Ok(VectorField { grid, components })
    }

    pub fn from_fns(grid: Grid, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let components = (0..grid.dim())
            .map(|a| ScalarField::from_fn(grid, |x| f(x)[a]))
            .collect();
        VectorField { grid, components }
    }

    pub fn zeros(grid: Grid) -> Self {
        VectorField { grid, components: vec![ScalarField::zeros(grid); grid.dim()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn component(&self, a: usize) -> &ScalarField {
        &self.components[a]
    }

    pub fn scaled(&self, c: f64) -> Self {
        VectorField { grid: self.grid, components: self.components.iter().map(|f| f.scaled(c)).collect() }
    }

    pub fn max_speed(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| self.components.iter().map(|c| c.values[i] * c.values[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// `max_k |xi . u_hat(xi)| / max_k |u_hat(xi)|` (zero for the zero field).
    pub fn divergence_residual(&self) -> f64 {
        let spectra: Vec<Spectrum> = self.components.iter().map(forward_transform).collect();
        let mut div_max = 0.0_f64;
        let mut amp_max = 0.0_f64;
        for i in 0..self.grid.len() {
            let xi = self.grid.wavevector(i);
            let mut div = Complex64::new(0.0, 0.0);
            for (a, s) in spectra.iter().enumerate() {
                div += s.coeffs[i] * xi[a];
                amp_max = amp_max.max(s.coeffs[i].norm());
            }
            div_max = div_max.max(div.norm());
        }
        if amp_max == 0.0 {
            0.0
        } else {
            div_max / amp_max
        }
    }

    pub fn check_solenoidal(&self) -> Result<()> {
        let residual = self.divergence_residual();
        if residual > SOLENOIDAL_TOLERANCE {
            return Err(MixError::NotSolenoidal { residual });
        }
        Ok(())
    }

    /// Pointwise Frobenius norm of the Jacobian `d_i u_j`.
    pub fn jacobian_magnitude(&self) -> ScalarField {
        let mut acc = vec![0.0; self.grid.len()];
        for c in &self.components {
            for g in gradient(c).components {
                for (a, v) in acc.iter_mut().zip(g.values) {
                    *a += v * v;
                }
            }
        }
        ScalarField { grid: self.grid, values: acc.into_iter().map(f64::sqrt).collect() }
    }
}

/// Spectral Leray projection `u_hat <- u_hat - (xi . u_hat) xi / |xi|^2`, `xi != 0`.
pub fn project_divergence_free(v: &VelocityField) -> VelocityField {
    let grid = v.grid;
    let spectra: Vec<Spectrum> = v.components.iter().map(forward_transform).collect();
    let d = grid.dim();
    let mut out: Vec<Spectrum> = spectra.clone();
    for i in 0..grid.len() {
        let xi = grid.wavevector(i);
        let xi2: f64 = xi[..d].iter().map(|x| x * x).sum();
        if xi2 == 0.0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for a in 0..d {
            dot += spectra[a].coeffs[i] * xi[a];
        }
        for a in 0..d {
            out[a].coeffs[i] = spectra[a].coeffs[i] - dot * (xi[a] / xi2);
        }
    }
    VectorField { grid, components: out.iter().map(inverse_transform).collect() }
}

/// `(int |f|^p)^{1/p}` by the rectangle rule; `p = inf` gives `max |f|`.
pub fn lp_norm(field: &ScalarField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(MixError::InvalidArgument(format!("L^p exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(field.max_abs());
    }
    let w = field.grid.cell_volume();
    let s: f64 = field.values.iter().map(|v| v.abs().powf(p)).sum();
    Ok((w * s).powf(1.0 / p))
}

/// Spectral partial derivative along axis `a`. The Nyquist slot is zeroed.
pub fn partial(field: &ScalarField, a: usize) -> ScalarField {
    let grid = field.grid;
    let s = forward_transform(field);
    s.apply(|i| {
        if grid.is_nyquist(i) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, 2.0 * PI * grid.wavevector(i)[a])
        }
    })
    .to_field()
}

pub fn gradient(field: &ScalarField) -> VectorField {
    let components = (0..field.grid.dim()).map(|a| partial(field, a)).collect();
    VectorField { grid: field.grid, components }
}

/// `|| |grad v| ||_{L^p}` with the pointwise Frobenius norm of the Jacobian.
pub fn sobolev_w1p_seminorm(v: &VelocityField, p: f64) -> Result<f64> {
    lp_norm(&v.jacobian_magnitude(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn torus2(n: usize) -> Grid {
        Grid::torus(2, n).unwrap()
    }

    #[test]
    fn cosine_has_two_unit_modes() {
        let g = torus2(16);
        let f = ScalarField::from_fn(g, |x| 2.0 * (2.0 * PI * x[0]).cos());
        let s = f.spectrum();
        for i in 0..g.len() {
            let k = g.mode(i);
            let expect = if k == [1, 0] || k == [-1, 0] { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(s.coeffs()[i].re, expect, epsilon = 1e-14);
            assert_abs_diff_eq!(s.coeffs()[i].im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn constant_has_only_mean_mode() {
        let g = torus2(8);
        let s = ScalarField::constant(g, 1.0).spectrum();
        assert_abs_diff_eq!(s.at_mode([0, 0]).unwrap().re, 1.0, epsilon = 1e-15);
        let rest: f64 = s.coeffs().iter().skip(1).map(|c| c.norm()).sum();
        assert!(rest < 1e-14);
    }

    #[test]
    fn box_gaussian_transform_is_gaussian() {
        let g = Grid::boxed(1, 256, 8.0).unwrap();
        let f = ScalarField::from_fn(g, |x| (-PI * x[0] * x[0]).exp());
        let s = f.spectrum();
        for i in 0..g.len() {
            let xi = g.wavevector(i)[0];
            if xi.abs() <= 4.0 {
                let c = s.coeffs()[i];
                assert!((c.re - (-PI * xi * xi).exp()).abs() < 1e-8, "xi={xi}");
                assert!(c.im.abs() < 1e-8);
            }
        }
        assert_abs_diff_eq!(s.to_field().values()[100], f.values()[100], epsilon = 1e-13);
    }

    #[test]
    fn shear_is_already_solenoidal() {
        let g = torus2(32);
        let u = VectorField::from_fns(g, |x| [(2.0 * PI * x[1]).sin(), 0.0]);
        let p = project_divergence_free(&u);
        for a in 0..2 {
            for (x, y) in u.component(a).values().iter().zip(p.component(a).values()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-14);
            }
        }
        u.check_solenoidal().unwrap();
    }

    #[test]
    fn gradient_field_projects_to_zero() {
        let g = torus2(32);
        let phi = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin());
        let p = project_divergence_free(&gradient(&phi));
        assert!(p.max_speed() < 1e-12);
        assert!(gradient(&phi).check_solenoidal().is_err());
    }

    #[test]
    fn lp_examples() {
        let g = torus2(16);
        assert_abs_diff_eq!(lp_norm(&ScalarField::constant(g, 1.0), 2.0).unwrap(), 1.0, epsilon = 1e-15);
        let f = ScalarField::from_fn(g, |x| 2.0 * (2.0 * PI * x[0]).cos());
        assert_abs_diff_eq!(lp_norm(&f, 2.0).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(lp_norm(&f, f64::INFINITY).unwrap(), 2.0, epsilon = 1e-15);
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn gradient_examples() {
        let g = torus2(32);
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin());
        let grad = gradient(&f);
        for i in 0..g.len() {
            let x = g.point(i);
            assert_abs_diff_eq!(grad.component(0).values()[i], 2.0 * PI * (2.0 * PI * x[0]).cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(grad.component(1).values()[i], 0.0, epsilon = 1e-12);
        }
        let shear = VectorField::from_fns(g, |x| [(2.0 * PI * x[1]).sin(), 0.0]);
        assert_abs_diff_eq!(sobolev_w1p_seminorm(&shear, 2.0).unwrap(), 2f64.sqrt() * PI, epsilon = 1e-12);
        let c = VectorField::from_fns(g, |_| [1.0, -2.0]);
        assert_abs_diff_eq!(sobolev_w1p_seminorm(&c, 3.0).unwrap(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn box_boundary_mass() {
        let g = Grid::boxed(1, 128, 8.0).unwrap();
        let gauss = ScalarField::from_fn(g, |x| (-PI * x[0] * x[0]).exp());
        assert!(gauss.boundary_mass_ratio() < BOUNDARY_MASS_THRESHOLD);
        let wide = ScalarField::constant(g, 1.0);
        assert!(wide.boundary_mass_ratio() > BOUNDARY_MASS_THRESHOLD);
    }
}
