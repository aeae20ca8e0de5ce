//! Geometric and functional mixing scales, and the exponential-decay certificates
//! that follow from upper bounds on `V`.

use crate::error::{MixError, Result};
use crate::field::{lp_norm, ScalarField};
use crate::functionals::{hs_norm, v_functional};
use crate::logft::{ball_volume, bessel::bessel_jtilde};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Fourier transform of the normalised unit-ball indicator at radius `r`:
/// `(2 pi)^{d/2} J~_{d/2}(2 pi r) / |B_1|`.
pub fn ball_indicator_symbol(r: f64, d: usize) -> f64 {
    assert!(r >= 0.0, "radius must be non-negative");
    (2.0 * PI).powf(d as f64 / 2.0) * bessel_jtilde(d as f64 / 2.0, 2.0 * PI * r) / ball_volume(d)
}

fn check_torus(f: &ScalarField) -> Result<()> {
    if f.grid().is_torus() {
        Ok(())
    } else {
        Err(MixError::UnsupportedDomain("mixing scales are computed on the torus".into()))
    }
}

/// `theta * chi_eps` via `theta_hat(k) chi_hat(eps k)`. Requires `0 < eps < 1/2`.
pub fn mollify(theta: &ScalarField, eps: f64) -> Result<ScalarField> {
    check_torus(theta)?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(MixError::InvalidArgument(format!("mollifier scale must lie in (0, 1/2), got {eps}")));
    }
    let grid = *theta.grid();
    let d = grid.dim();
    Ok(theta.spectrum().apply_real(|i| ball_indicator_symbol(eps * grid.frequency_norm(i), d)).to_field())
}

/// `||theta * chi_eps||_inf / ||theta||_inf`.
pub fn mollified_ratio(theta: &ScalarField, eps: f64) -> Result<f64> {
    Ok(mollify(theta, eps)?.max_abs() / theta.max_abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricScaleResult {
    pub kappa: f64,
    /// Infimum of admissible scales; `+inf` when none is found in the window
    /// (serialised as `null`).
    pub epsilon: f64,
    /// Ratio at the returned scale (1 for the sentinel).
    pub ratio: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub scan_points: usize,
    /// Relative bisection tolerance.
    pub tolerance: f64,
    /// The smallest scale of the window already satisfies the criterion, so the
    /// true infimum may lie below the resolved range.
    pub clamped_at_min: bool,
}

impl GeometricScaleResult {
    pub fn is_sentinel(&self) -> bool {
        self.epsilon.is_infinite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub eps_min: Option<f64>,
    pub eps_max: f64,
    pub scan_points: usize,
    pub tolerance: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { eps_min: None, eps_max: 0.5 * (1.0 - 1e-9), scan_points: 96, tolerance: 1e-4 }
    }
}

/// Infimum of `eps` with `||theta * chi_eps||_inf <= (1 - kappa) ||theta||_inf`.
pub fn geometric_mixing_scale(theta: &ScalarField, kappa: f64) -> Result<GeometricScaleResult> {
    geometric_mixing_scale_with(theta, kappa, &ScanOptions::default())
}

/// As [`geometric_mixing_scale`] with an explicit window: a geometric scan over
/// `[eps_min, eps_max]` (default `eps_min = 1/N`) locates the first admissible scan
/// point, then bisection refines the crossing from the previous one.
pub fn geometric_mixing_scale_with(theta: &ScalarField, kappa: f64, opts: &ScanOptions) -> Result<GeometricScaleResult> {
    check_torus(theta)?;
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(MixError::InvalidArgument(format!("kappa must lie in (0, 1), got {kappa}")));
    }
    let linf = theta.max_abs();
    if linf == 0.0 {
        return Err(MixError::InvalidArgument("the zero field has no mixing scale".into()));
    }
    let eps_min = opts.eps_min.unwrap_or(1.0 / theta.grid().n() as f64);
    let eps_max = opts.eps_max.min(0.5 * (1.0 - 1e-12));
    if !(eps_min > 0.0 && eps_min < eps_max) || opts.scan_points < 2 {
        return Err(MixError::InvalidArgument("invalid scan window".into()));
    }
    let target = 1.0 - kappa;
    let spec = theta.spectrum();
    let grid = *theta.grid();
    let d = grid.dim();
    let ratio = |eps: f64| -> f64 {
        spec.apply_real(|i| ball_indicator_symbol(eps * grid.frequency_norm(i), d)).to_field().max_abs() / linf
    };
    let mut result = GeometricScaleResult {
        kappa,
        epsilon: f64::INFINITY,
        ratio: 1.0,
        eps_min,
        eps_max,
        scan_points: opts.scan_points,
        tolerance: opts.tolerance,
        clamped_at_min: false,
    };
    let q = (eps_max / eps_min).powf(1.0 / (opts.scan_points - 1) as f64);
    let mut prev = eps_min;
    for j in 0..opts.scan_points {
        let eps = if j + 1 == opts.scan_points { eps_max } else { eps_min * q.powi(j as i32) };
        let r = ratio(eps);
        if r <= target {
            if j == 0 {
                result.epsilon = eps;
                result.ratio = r;
                result.clamped_at_min = true;
                return Ok(result);
            }
            let (mut lo, mut hi, mut r_hi) = (prev, eps, r);
            while hi - lo > opts.tolerance * hi {
                let mid = 0.5 * (lo + hi);
                let rm = ratio(mid);
                if rm <= target {
                    hi = mid;
                    r_hi = rm;
                } else {
                    lo = mid;
                }
            }
            result.epsilon = hi;
            result.ratio = r_hi;
            return Ok(result);
        }
        prev = eps;
    }
    Ok(result)
}

/// Spectral mass `sum_{|xi| > radius} |f_hat|^2`.
pub fn high_frequency_mass(f: &ScalarField, radius: f64) -> f64 {
    let spec = f.spectrum();
    let grid = spec.grid();
    let total: f64 = spec
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.frequency_norm(*i) > radius)
        .map(|(_, c)| c.norm_sqr())
        .sum();
    total * grid.dual_cell_volume()
}

/// Largest `rho` with `min_{|xi| <= rho} |chi_hat(xi)| >= sqrt(eta)`: a scan with
/// step `1e-3` followed by bisection of the first crossing.
pub fn rho_for_eta(eta: f64, d: usize) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(MixError::InvalidArgument(format!("eta must lie in (0, 1), got {eta}")));
    }
    if d != 1 && d != 2 {
        return Err(MixError::InvalidArgument(format!("dimension must be 1 or 2, got {d}")));
    }
    let level = eta.sqrt();
    let step = 1e-3;
    let mut lo = 0.0;
    loop {
        let hi = lo + step;
        if ball_indicator_symbol(hi, d).abs() < level {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if ball_indicator_symbol(m, d).abs() >= level {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(a);
        }
        lo = hi;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateKind {
    Functional,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The bound is reported without a measured value to compare with.
    Unchecked,
}

/// Inputs to the functional decay bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayInputs {
    pub s: f64,
    pub p: f64,
    pub l2: f64,
    pub linf: f64,
    /// `||theta_0||_{L^{p'}}`.
    pub lp_dual: f64,
    pub v0: f64,
    /// `int_0^t ||grad u||_{L^p}`.
    pub cumulative_grad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub kind: CertificateKind,
    pub bound: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_provenance")]
    pub c_provenance: String,
    pub inputs: serde_json::Value,
    pub verdict: Verdict,
    /// Measured quantity the bound was compared with, if any.
    pub measured: Option<f64>,
}

impl DecayCertificate {
    /// Compare against a measured lower-bounded quantity with relative slack.
    pub fn check(mut self, measured: f64, slack: f64) -> Self {
        self.measured = Some(measured);
        self.verdict = if measured >= self.bound * (1.0 - slack) { Verdict::Pass } else { Verdict::Fail };
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }
}

/// `p' = p / (p - 1)`, with `p' = inf` at `p = 1`.
pub fn dual_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Lower bound on `||theta(t)||_{H^{-s}}` obtained by combining the convexity
/// inequality with the linear growth bound on `V`:
/// `||theta_0|| exp(-s (V_0 + C ||theta_0||_inf ||theta_0||_{p'} int ||grad u||_p) / ||theta_0||^2)`.
pub fn functional_decay_bound(inputs: &DecayInputs, c: f64, c_provenance: &str) -> Result<DecayCertificate> {
    if !(inputs.l2 > 0.0) || inputs.s < 0.0 || c < 0.0 || inputs.cumulative_grad < 0.0 {
        return Err(MixError::InvalidArgument("need ||theta_0|| > 0, s >= 0, C >= 0, cumulative gradient >= 0".into()));
    }
    let growth = inputs.v0 + c * inputs.linf * inputs.lp_dual * inputs.cumulative_grad;
    let bound = inputs.l2 * (-inputs.s * growth / (inputs.l2 * inputs.l2)).exp();
    Ok(DecayCertificate {
        kind: CertificateKind::Functional,
        bound,
        c,
        c_provenance: c_provenance.to_string(),
        inputs: serde_json::to_value(inputs).expect("inputs serialise"),
        verdict: Verdict::Unchecked,
        measured: None,
    })
}

/// Norm inputs for [`functional_decay_bound`] from an initial field.
pub fn decay_inputs(theta0: &ScalarField, s: f64, p: f64, cumulative_grad: f64) -> Result<DecayInputs> {
    Ok(DecayInputs {
        s,
        p,
        l2: theta0.l2_norm(),
        linf: theta0.max_abs(),
        lp_dual: lp_norm(theta0, dual_exponent(p))?,
        v0: v_functional(theta0),
        cumulative_grad,
    })
}

/// Slack `||f||_{H^{-s}}/||f|| - exp(-s V / ||f||^2)` of the convexity inequality,
/// with `||f||` the mass seen by the functionals (mean removed on the torus).
pub fn jensen_slack(f: &ScalarField, s: f64) -> f64 {
    let mass = crate::functionals::active_l2_squared(f);
    let norm = mass.sqrt();
    hs_norm(f, -s) / norm - (-s * v_functional(f) / mass).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricWitness {
    pub eps: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricCertificate {
    pub kappa: f64,
    pub b: f64,
    pub eta: f64,
    pub rho: f64,
    pub a: f64,
    /// `A^{-1} exp(-A V / ||f||^2)`.
    pub threshold: f64,
    /// `(1 - kappa) ||f||^2 / (||f||_1 ||f||_inf)`.
    pub required_ratio: f64,
    pub witnesses: Vec<GeometricWitness>,
    pub verdict: Verdict,
}

pub const CERTIFICATE_SAMPLES: usize = 10;

/// Check the implication `eps < A^{-1} exp(-A V/||f||^2) => ratio(eps) > (1-kappa) ||f||^2/(||f||_1 ||f||_inf)`
/// at [`CERTIFICATE_SAMPLES`] scales below the threshold, with `eta` the midpoint
/// of `((1-kappa)/(1-1/B), 1)` and `A = max(B, 1/rho(eta))`.
pub fn geometric_certificate(f: &ScalarField, kappa: f64, b: f64) -> Result<GeometricCertificate> {
    check_torus(f)?;
    if !(kappa > 0.0 && kappa < 1.0) || !(b > 1.0) {
        return Err(MixError::InvalidArgument("need 0 < kappa < 1 and B > 1".into()));
    }
    let v = v_functional(f);
    if !(v > 0.0) {
        return Err(MixError::Hypothesis(format!("V(f) must be positive, got {v:.6e}")));
    }
    let eta_min = (1.0 - kappa) / (1.0 - 1.0 / b);
    if eta_min >= 1.0 {
        return Err(MixError::InvalidArgument(format!(
            "no eta < 1 satisfies eta (1 - 1/B) > 1 - kappa for kappa = {kappa}, B = {b}"
        )));
    }
    let eta = 0.5 * (eta_min + 1.0);
    let d = f.grid().dim();
    let rho = rho_for_eta(eta, d)?;
    let a = b.max(1.0 / rho);
    let l2sq = f.l2_norm().powi(2);
    let threshold = (-a * v / l2sq).exp() / a;
    let required_ratio = (1.0 - kappa) * l2sq / (lp_norm(f, 1.0)? * f.max_abs());
    let mut witnesses = Vec::with_capacity(CERTIFICATE_SAMPLES);
    let mut ok = true;
    for j in 0..CERTIFICATE_SAMPLES {
        let eps = threshold * (j as f64 + 0.5) / CERTIFICATE_SAMPLES as f64;
        let ratio = mollified_ratio(f, eps.min(0.5 * (1.0 - 1e-12)))?;
        ok &= ratio > required_ratio;
        witnesses.push(GeometricWitness { eps, ratio });
    }
    Ok(GeometricCertificate {
        kappa,
        b,
        eta,
        rho,
        a,
        threshold,
        required_ratio,
        witnesses,
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
    })
}

/// Lower bound `A^{-1} exp(-A V_0) exp(-A C int ||grad u||_p)` on the geometric
/// mixing scale of `+-1`-valued data.
pub fn geometric_decay_bound(a: f64, v0: f64, c: f64, cumulative_grad: f64, c_provenance: &str) -> DecayCertificate {
    let bound = (-a * v0).exp() * (-a * c * cumulative_grad).exp() / a;
    DecayCertificate {
        kind: CertificateKind::Geometric,
        bound,
        c,
        c_provenance: c_provenance.to_string(),
        inputs: serde_json::json!({ "A": a, "v0": v0, "cumulative_grad": cumulative_grad }),
        verdict: Verdict::Unchecked,
        measured: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn symbol_values() {
        assert!((ball_indicator_symbol(0.0, 1) - 1.0).abs() < 1e-15);
        assert!((ball_indicator_symbol(0.0, 2) - 1.0).abs() < 1e-15);
        assert!(ball_indicator_symbol(0.5, 1).abs() < 1e-15);
        let r: f64 = 0.3;
        let sinc = (2.0 * PI * r).sin() / (2.0 * PI * r);
        assert!((ball_indicator_symbol(r, 1) - sinc).abs() < 1e-15);
    }

    #[test]
    fn mollify_kills_resonant_cosine() {
        let g = Grid::torus(1, 64).unwrap();
        let f = ScalarField::from_fn(g, |x| 2.0 * (2.0 * PI * x[0]).cos());
        assert!(mollify(&f, 0.5).is_err());
        let m = mollify(&f, 0.5 - 1e-12).unwrap();
        assert!(m.max_abs() < 1e-10);
        let c = ScalarField::constant(g, 3.0);
        assert!((mollify(&c, 0.3).unwrap().max_abs() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn constant_field_has_sentinel_scale() {
        let g = Grid::torus(2, 16).unwrap();
        let r = geometric_mixing_scale(&ScalarField::constant(g, 1.0), 0.5).unwrap();
        assert!(r.is_sentinel());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"epsilon\":null"));
    }

    #[test]
    fn rho_is_monotone() {
        let a = rho_for_eta(0.5, 2).unwrap();
        let b = rho_for_eta(0.81, 2).unwrap();
        assert!(a > b);
        assert!((ball_indicator_symbol(b, 2) - 0.9).abs() < 1e-12);
        assert!(rho_for_eta(1e-6, 1).unwrap() < 0.5);
    }

    #[test]
    fn decay_bound_structure() {
        let inputs = DecayInputs { s: 0.0, p: 2.0, l2: 2f64.sqrt(), linf: 2.0, lp_dual: 2f64.sqrt(), v0: 0.7, cumulative_grad: 3.0 };
        let c = functional_decay_bound(&inputs, 1.0, "test").unwrap();
        assert_eq!(c.bound, inputs.l2);
        let json = c.to_json();
        assert!(json.contains("\"C\"") && json.contains("\"C_provenance\""));
    }
}
