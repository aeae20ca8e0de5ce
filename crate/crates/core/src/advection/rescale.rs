//! Integer rescaling `f(x) -> f(m x)` on the torus and the self-similar trajectory
//! `theta(t) = theta_base(t - n)(m^n x)`, `n = floor(t)`.

use super::solver::Trajectory;
use crate::error::{MixError, Result};
use crate::field::{ScalarField, Spectrum};

/// Coefficients below this fraction of the largest one count as inactive.
pub const ACTIVE_MODE_THRESHOLD: f64 = 1e-13;

/// Largest `max_i |k_i|` over active modes.
pub fn max_active_mode(spec: &Spectrum) -> i64 {
    let grid = spec.grid();
    let scale = spec.coeffs().iter().fold(0.0_f64, |m, c| m.max(c.norm()));
    if scale == 0.0 {
        return 0;
    }
    let d = grid.dim();
    spec.coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm() > ACTIVE_MODE_THRESHOLD * scale)
        .map(|(i, _)| grid.mode(i)[..d].iter().map(|k| k.abs()).max().unwrap_or(0))
        .max()
        .unwrap_or(0)
}

/// `g(x) = f(m x)`, realised spectrally as `g_hat(m k) = f_hat(k)`.
///
/// Fails if `m` times the largest active mode reaches the Nyquist index.
pub fn rescale_field(f: &ScalarField, m: u64) -> Result<ScalarField> {
    let grid = *f.grid();
    if !grid.is_torus() {
        return Err(MixError::UnsupportedDomain("rescaling is defined on the torus".into()));
    }
    if m == 0 {
        return Err(MixError::InvalidArgument("scale factor must be >= 1".into()));
    }
    if m == 1 {
        return Ok(f.clone());
    }
    let spec = f.spectrum();
    let kmax = max_active_mode(&spec);
    let m = m as i64;
    if kmax.saturating_mul(m) >= grid.max_mode() {
        return Err(MixError::BandOverflow(format!(
            "mode {kmax} times {m} does not fit below the Nyquist index {} of N = {}",
            grid.max_mode(),
            grid.n()
        )));
    }
    let d = grid.dim();
    let mut out = Spectrum::zeros(grid);
    for (i, c) in spec.coeffs().iter().enumerate() {
        let k = grid.mode(i);
        if k[..d].iter().any(|&v| v.abs() > kmax) {
            continue;
        }
        let a = grid.slot_of_mode(k[0] * m).expect("checked band");
        let b = if d == 2 { grid.slot_of_mode(k[1] * m).expect("checked band") } else { 0 };
        out.coeffs_mut()[grid.flatten([a, b])] = *c;
    }
    Ok(out.to_field())
}

/// The one-period evolution that the self-similar construction repeats.
pub trait BaseEvolution {
    /// `theta_base(s)` for `s` in `[0, 1)`.
    fn at(&self, s: f64) -> Result<ScalarField>;
}

/// Frozen base: `theta_base(s) = theta_0`.
#[derive(Debug, Clone)]
pub struct FrozenBase(pub ScalarField);

impl BaseEvolution for FrozenBase {
    fn at(&self, _s: f64) -> Result<ScalarField> {
        Ok(self.0.clone())
    }
}

/// Base evolution read from a precomputed trajectory on `[0, 1]`; `s` must be one
/// of its sample times.
#[derive(Debug, Clone)]
pub struct SampledBase(pub Trajectory);

impl BaseEvolution for SampledBase {
    fn at(&self, s: f64) -> Result<ScalarField> {
        self.0
            .snapshots()
            .iter()
            .find(|snap| (snap.t - s).abs() <= 1e-12)
            .map(|snap| snap.field.clone())
            .ok_or_else(|| MixError::InvalidArgument(format!("base trajectory has no sample at s = {s}")))
    }
}

pub struct SelfSimilarSchedule<B: BaseEvolution> {
    /// `m = 1 / lambda`, at least 2.
    pub m: u64,
    pub base: B,
    /// Mean of `theta_base(0)`.
    pub base_mean: f64,
}

impl<B: BaseEvolution> SelfSimilarSchedule<B> {
    pub fn new(m: u64, base: B) -> Result<Self> {
        if m < 2 {
            return Err(MixError::InvalidArgument("1/lambda must be an integer >= 2".into()));
        }
        let base_mean = base.at(0.0)?.mean();
        Ok(SelfSimilarSchedule { m, base, base_mean })
    }

    /// Largest period count `n` for which `theta_base(0)` rescaled by `m^n` stays
    /// inside the band of its grid.
    pub fn max_periods(&self) -> Result<u32> {
        let f = self.base.at(0.0)?;
        let kmax = max_active_mode(&f.spectrum()).max(1);
        let limit = f.grid().max_mode();
        let mut n = 0u32;
        let mut reach = kmax;
        while reach.saturating_mul(self.m as i64) < limit {
            reach *= self.m as i64;
            n += 1;
        }
        Ok(n)
    }
}

/// `theta(t) = rescale(theta_base(t - n), m^n)`, `n = floor(t)`.
pub fn self_similar_trajectory<B: BaseEvolution>(schedule: &SelfSimilarSchedule<B>, t: f64) -> Result<ScalarField> {
    if !(t >= 0.0) {
        return Err(MixError::InvalidArgument("time must be non-negative".into()));
    }
    let n = t.floor();
    let base = schedule.base.at(t - n)?;
    let factor = schedule.m.checked_pow(n as u32).filter(|_| n < 64.0);
    let out = factor.map_or_else(
        || Err(MixError::BandOverflow("scale factor overflows".into())),
        |f| rescale_field(&base, f),
    );
    match out {
        Err(MixError::BandOverflow(msg)) => Err(MixError::BandOverflow(format!(
            "{msg}; at most {} periods fit on this grid",
            schedule.max_periods().unwrap_or(0)
        ))),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::v_functional;
    use crate::grid::Grid;
    use std::f64::consts::{LN_2, PI};

    fn cos1(n: usize) -> ScalarField {
        ScalarField::from_fn(Grid::torus(1, n).unwrap(), |x| 2.0 * (2.0 * PI * x[0]).cos())
    }

    #[test]
    fn identity_and_doubling() {
        let f = cos1(32);
        assert_eq!(rescale_field(&f, 1).unwrap(), f);
        let g = rescale_field(&f, 2).unwrap();
        let expect = ScalarField::from_fn(*f.grid(), |x| 2.0 * (4.0 * PI * x[0]).cos());
        for (a, b) in g.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!((v_functional(&g) - 2.0 * LN_2).abs() < 1e-13);
    }

    #[test]
    fn band_overflow_is_an_error() {
        let f = cos1(16);
        assert!(rescale_field(&f, 7).is_ok());
        assert!(matches!(rescale_field(&f, 8), Err(MixError::BandOverflow(_))));
    }

    #[test]
    fn frozen_schedule() {
        let s = SelfSimilarSchedule::new(2, FrozenBase(cos1(64))).unwrap();
        assert_eq!(s.max_periods().unwrap(), 4);
        let f = self_similar_trajectory(&s, 3.0).unwrap();
        assert!((v_functional(&f) - 3.0 * LN_2 * 2.0).abs() < 1e-12);
        let err = self_similar_trajectory(&s, 5.5).unwrap_err();
        assert!(err.to_string().contains("at most 4 periods"));
    }
}
