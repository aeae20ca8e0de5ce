//! Named self-check suites with machine-readable results.

use crate::advection::{velocity_library, FlowParams};
use crate::constants::Constants;
use crate::dcommutator::{order_check, Derivative};
use crate::error::{MixError, Result};
use crate::field::{inverse_transform, ScalarField};
use crate::functionals::{v_functional, v_physical};
use crate::grid::Grid;
use crate::logft::{verify_log_ft, zeta_closed_form, zeta_constant, DilatedGaussian, EULER_GAMMA};
use crate::mixing::{geometric_certificate, jensen_slack, Verdict};
use crate::random::{band_limited_field, rng_from_seed};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const SUITES: [&str; 7] = ["parseval", "lemma31", "lemma32", "lemma33", "jensen", "geomcert", "zeta"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, passed: value <= tolerance }
    }

    /// Passes when `value >= tolerance`.
    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, passed: value >= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteResult {
    fn new(suite: &str, checks: Vec<Check>) -> Self {
        SuiteResult { suite: suite.to_string(), passed: checks.iter().all(|c| c.passed), checks }
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteResult> {
    match name {
        "parseval" => parseval(seed),
        "lemma31" => lemma31(),
        "lemma32" => derivative_suite("lemma32", Derivative::V),
        "lemma33" => derivative_suite("lemma33", Derivative::W),
        "jensen" => jensen(seed),
        "geomcert" => geomcert(seed),
        "zeta" => zeta(),
        other => Err(MixError::UnknownName(other.to_string())),
    }
}

/// Worst relative round-trip and Parseval errors over `count` seeded fields.
pub fn parseval_errors(grid: Grid, count: usize, seed: u64) -> (f64, f64) {
    let mut round = 0.0_f64;
    let mut pars = 0.0_f64;
    for i in 0..count {
        let mut rng = rng_from_seed(seed.wrapping_add(i as u64));
        let f = band_limited_field(grid, grid.max_mode() - 1, false, &mut rng);
        let spec = f.spectrum();
        let back = inverse_transform(&spec);
        let diff = back.sub(&f).expect("same grid").l2_norm();
        let norm = f.l2_norm();
        round = round.max(diff / norm);
        pars = pars.max((spec.energy() - norm * norm).abs() / (norm * norm));
    }
    (round, pars)
}

fn parseval(seed: u64) -> Result<SuiteResult> {
    let mut checks = Vec::new();
    for (d, n) in [(1, 256), (2, 64)] {
        let (round, pars) = parseval_errors(Grid::torus(d, n)?, 100, seed);
        checks.push(Check::at_most(format!("round_trip_d{d}"), round, 1e-12));
        checks.push(Check::at_most(format!("parseval_d{d}"), pars, 1e-12));
    }
    Ok(SuiteResult::new("parseval", checks))
}

pub fn gaussian(grid: Grid) -> ScalarField {
    ScalarField::from_fn(grid, |x| (-PI * (x[0] * x[0] + x[1] * x[1])).exp())
}

fn lemma31() -> Result<SuiteResult> {
    let mut checks = Vec::new();
    for (d, n, r) in [(1, 512, 8.0), (2, 256, 6.0)] {
        let f = gaussian(Grid::boxed(d, n, r)?);
        let consts = Constants::new(d)?;
        let phys = v_physical(&f, &consts)?.value;
        let spec = v_functional(&f);
        checks.push(Check::at_most(format!("physical_vs_spectral_d{d}"), (phys - spec).abs(), 2e-3 * spec.abs().max(1.0)));
        if d == 1 {
            let closed = -(EULER_GAMMA + (8.0 * PI).ln()) / (2.0 * 2f64.sqrt());
            checks.push(Check::at_most("spectral_vs_closed_form_d1", (spec - closed).abs(), 1e-4));
        }
    }
    Ok(SuiteResult::new("lemma31", checks))
}

fn derivative_suite(name: &str, which: Derivative) -> Result<SuiteResult> {
    let grid = Grid::torus(2, 256)?;
    let theta0 = ScalarField::from_fn(grid, |x| 2.0 * (2.0 * PI * x[0]).cos());
    let flow = velocity_library("shear", &FlowParams::default())?;
    let o = order_check(which, &theta0, &flow, 0.25, 1e-3)?;
    Ok(SuiteResult::new(
        name,
        vec![
            Check::at_most("gap", o.coarse.gap, 1e-4 * o.coarse.rhs.abs().max(1.0)),
            Check::at_most("gap_ratio_deviation", (o.ratio - 4.0).abs(), 0.5),
        ],
    ))
}

fn jensen(seed: u64) -> Result<SuiteResult> {
    let grid = Grid::torus(2, 32)?;
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let mut rng = rng_from_seed(seed.wrapping_add(i));
        let f = band_limited_field(grid, 8, true, &mut rng);
        for s in [0.25, 0.5, 1.0] {
            worst = worst.min(jensen_slack(&f, s));
        }
    }
    let shell = ScalarField::from_fn(grid, |x| (2.0 * PI * (3.0 * x[0] + 4.0 * x[1])).cos());
    let eq = [0.25, 0.5, 1.0].iter().map(|&s| jensen_slack(&shell, s).abs()).fold(0.0, f64::max);
    Ok(SuiteResult::new(
        "jensen",
        vec![Check::at_least("min_slack", worst, -1e-12), Check::at_most("shell_equality", eq, 1e-9)],
    ))
}

fn geomcert(seed: u64) -> Result<SuiteResult> {
    let grid = Grid::torus(2, 64)?;
    let mut failures = 0;
    let mut tested = 0;
    let mut i = 0u64;
    while tested < 100 {
        let mut rng = rng_from_seed(seed.wrapping_add(i));
        i += 1;
        let f = band_limited_field(grid, 6, true, &mut rng);
        if v_functional(&f) <= 0.0 {
            continue;
        }
        tested += 1;
        if geometric_certificate(&f, 0.5, 10.0)?.verdict != Verdict::Pass {
            failures += 1;
        }
    }
    Ok(SuiteResult::new("geomcert", vec![Check::at_most("failures", failures as f64, 0.0)]))
}

fn zeta() -> Result<SuiteResult> {
    let mut checks = Vec::new();
    for d in [1, 2] {
        let z = zeta_constant(d)?;
        checks.push(Check::at_most(format!("zeta_d{d}"), (z.value - zeta_closed_form(d)?).abs(), 1e-8));
        let r = verify_log_ft(d, &DilatedGaussian { d, a: 1.0 }, z.value)?;
        checks.push(Check::at_most(format!("log_ft_residual_d{d}"), r.residual, 1e-6));
    }
    Ok(SuiteResult::new("zeta", checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(matches!(run_suite("nope", 0), Err(MixError::UnknownName(_))));
    }

    #[test]
    fn fast_suites_pass() {
        for s in ["zeta", "jensen", "parseval"] {
            let r = run_suite(s, 1).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }
}
