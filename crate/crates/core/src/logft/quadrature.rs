//! Globally adaptive 7/15-point Gauss-Kronrod quadrature.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * h;
    let err = ((kronrod - gauss) * h).abs();
    (value, err)
}

/// Integrate `f` over `[a, b]` until the summed error estimate drops below
/// `max(abs_tol, rel_tol * |value|)` or `max_intervals` is reached.
pub fn integrate(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult {
    let (v, e) = gk15(&mut f, a, b);
    let mut segments = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let value: f64 = segments.iter().map(|s| s.2).sum();
        let error: f64 = segments.iter().map(|s| s.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || segments.len() >= max_intervals {
            // Deterministic summation order: sort by left endpoint.
            segments.sort_by(|x, y| x.0.total_cmp(&y.0));
            let value = segments.iter().map(|s| s.2).sum();
            return QuadResult { value, error, evaluations };
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .expect("non-empty");
        let (l, r, _, _) = segments.swap_remove(worst);
        let m = 0.5 * (l + r);
        let (v1, e1) = gk15(&mut f, l, m);
        let (v2, e2) = gk15(&mut f, m, r);
        evaluations += 30;
        segments.push((l, m, v1, e1));
        segments.push((m, r, v2, e2));
    }
}

/// Sum of [`integrate`] over consecutive panels `[p_i, p_{i+1}]`.
pub fn integrate_panels(
    mut f: impl FnMut(f64) -> f64,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    let mut total = QuadResult { value: 0.0, error: 0.0, evaluations: 0 };
    let panels = breakpoints.len().saturating_sub(1).max(1) as f64;
    for w in breakpoints.windows(2) {
        let r = integrate(&mut f, w[0], w[1], abs_tol / panels, rel_tol, 200);
        total.value += r.value;
        total.error += r.error;
        total.evaluations += r.evaluations;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(7) - 3.0 * x * x, 0.0, 2.0, 1e-14, 0.0, 10);
        assert_abs_diff_eq!(r.value, 256.0 / 8.0 - 8.0, epsilon = 1e-12);
    }

    #[test]
    fn log_endpoint_singularity() {
        let r = integrate(|x| x.ln(), 0.0, 1.0, 1e-12, 0.0, 500);
        assert_abs_diff_eq!(r.value, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn oscillatory_panels() {
        let bps: Vec<f64> = (0..=20).map(|i| i as f64).collect();
        let r = integrate_panels(|x| (2.0 * std::f64::consts::PI * x).cos() * (-x).exp(), &bps, 1e-13, 0.0);
        let w = 2.0 * std::f64::consts::PI;
        let exact = (1.0 - (-20.0_f64).exp()) / (1.0 + w * w);
        assert_abs_diff_eq!(r.value, exact, epsilon = 1e-12);
    }
}
