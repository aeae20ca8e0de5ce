use mixlog_core::advection::{rescale_field, self_similar_trajectory, FrozenBase, SelfSimilarSchedule};
use mixlog_core::diagnostics::sharpness;
use mixlog_core::functionals::{active_l2_squared, hs_norm, small_s_expansion_residual, v_functional, v_physical, w_functional};
use mixlog_core::random::{band_limited_field, rng_from_seed};
use mixlog_core::{Constants, Grid, ScalarField};
use proptest::prelude::*;
use std::f64::consts::{LN_2, PI};

fn cos_mode(grid: Grid, k: f64) -> ScalarField {
    ScalarField::from_fn(grid, move |x| 2.0 * (2.0 * PI * k * x[0]).cos())
}

#[test]
fn shell_values() {
    let grid = Grid::torus(2, 64).unwrap();
    assert!(v_functional(&cos_mode(grid, 1.0)).abs() < 1e-14);
    assert!((v_functional(&cos_mode(grid, 2.0)) - 2.0 * LN_2).abs() < 1e-13);
    assert!((w_functional(&cos_mode(grid, 2.0)) - 2.0 * LN_2 * LN_2).abs() < 1e-13);
    assert!((hs_norm(&cos_mode(grid, 1.0), -1.0) - 2f64.sqrt()).abs() < 1e-13);
    assert!((hs_norm(&cos_mode(grid, 2.0), -1.0) - 2f64.sqrt() / 2.0).abs() < 1e-13);
}

#[test]
fn unit_shell_at_four() {
    let grid = Grid::torus(2, 32).unwrap();
    let f = ScalarField::from_fn(grid, |x| 2f64.sqrt() * (2.0 * PI * 4.0 * x[1]).sin());
    assert!((f.l2_norm() - 1.0).abs() < 1e-13);
    assert!((w_functional(&f) - 4f64.ln().powi(2)).abs() < 1e-13);
}

#[test]
fn dilation_of_physical_form() {
    let consts = Constants::new(1).unwrap();
    let a: f64 = 2.0;
    let f = ScalarField::from_fn(Grid::boxed(1, 512, 8.0).unwrap(), |x| (-PI * x[0] * x[0]).exp());
    let fa = ScalarField::from_fn(Grid::boxed(1, 1024, 16.0).unwrap(), |x| (-PI * (x[0] / a).powi(2)).exp());
    let v = v_functional(&f);
    // f_a hat(xi) = a f_hat(a xi), so V(f_a) = a (V(f) - log a ||f||^2).
    let expected = a * (v - a.ln() * f.l2_norm().powi(2));
    let got = v_physical(&fa, &consts).unwrap().value;
    assert!((got - expected).abs() <= 2e-3 * expected.abs().max(1.0), "{got} vs {expected}");
    assert!((v_functional(&fa) - expected).abs() < 1e-8);
}

#[test]
fn expansion_residual_on_shell() {
    let grid = Grid::torus(2, 32).unwrap();
    let f = cos_mode(grid, 2.0);
    let s = 0.01;
    let x = 2.0 * s * LN_2;
    let expected = (x.exp() - 1.0 - x - x * x / 2.0) * 2.0;
    assert!((small_s_expansion_residual(&f, s) - expected).abs() < 1e-15);
    assert_eq!(small_s_expansion_residual(&f, 0.0), 0.0);
}

#[test]
fn rescaling_adds_log_m_mass() {
    let grid = Grid::torus(2, 64).unwrap();
    let f = band_limited_field(grid, 6, true, &mut rng_from_seed(21));
    let g = rescale_field(&f, 3).unwrap();
    let gap = v_functional(&g) - v_functional(&f) - 3f64.ln() * f.l2_norm().powi(2);
    assert!(gap.abs() < 1e-10, "{gap}");
    assert_eq!(rescale_field(&f, 1).unwrap(), f);
}

#[test]
fn frozen_schedule_at_three() {
    let grid = Grid::torus(1, 64).unwrap();
    let schedule = SelfSimilarSchedule::new(2, FrozenBase(cos_mode(grid, 1.0))).unwrap();
    let th = self_similar_trajectory(&schedule, 3.0).unwrap();
    assert!(th.sub(&cos_mode(grid, 8.0)).unwrap().max_abs() < 1e-12);
    assert!((v_functional(&th) - 3.0 * LN_2 * 2.0).abs() < 1e-12);
}

#[test]
fn sharpness_uses_centred_mass() {
    let grid = Grid::torus(1, 256).unwrap();
    let theta0 = ScalarField::from_fn(grid, |x| 1.5 + 2.0 * (2.0 * PI * x[0]).cos());
    let report = sharpness(&theta0, 2, 5).unwrap();
    let slope = report.slope.unwrap();
    let centred = LN_2 * active_l2_squared(&theta0);
    let raw = LN_2 * theta0.l2_norm().powi(2);
    assert!((slope - centred).abs() < 1e-9);
    assert!((slope - raw).abs() > 1.0);
}

#[test]
fn single_point_sharpness() {
    let grid = Grid::torus(1, 64).unwrap();
    let report = sharpness(&cos_mode(grid, 1.0), 2, 0).unwrap();
    assert!(report.slope.is_none());
    assert!(report.notice.is_some());
    assert_eq!(report.rows.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn richardson_ratio_near_eight(seed in any::<u64>()) {
        let f = band_limited_field(Grid::torus(2, 16).unwrap(), 5, true, &mut rng_from_seed(seed));
        let r = small_s_expansion_residual(&f, 1e-2) / small_s_expansion_residual(&f, 5e-3);
        prop_assert!((6.0..=10.0).contains(&r), "{}", r);
    }

    #[test]
    fn hs_zero_is_centred_l2(seed in any::<u64>()) {
        let f = band_limited_field(Grid::torus(2, 16).unwrap(), 5, false, &mut rng_from_seed(seed));
        prop_assert!((hs_norm(&f, 0.0).powi(2) - active_l2_squared(&f)).abs() < 1e-12);
    }
}
