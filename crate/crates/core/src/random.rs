//! Seeded random band-limited fields for property sweeps and flow generation.

use crate::field::{inverse_transform, ScalarField, Spectrum, VectorField};
use crate::grid::Grid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real field whose spectrum is supported on `1 <= max_i |k_i| <= max_mode`
/// (plus the mean when `mean_zero` is false), with coefficients uniform in the
/// unit disc and Hermitian symmetry enforced.
pub fn band_limited_field<R: Rng>(grid: Grid, max_mode: i64, mean_zero: bool, rng: &mut R) -> ScalarField {
    assert!(max_mode >= 1 && max_mode < grid.max_mode(), "band must sit strictly inside the grid");
    let mut spec = Spectrum::zeros(grid);
    let d = grid.dim();
    let range = || -max_mode..=max_mode;
    let k2_range: Vec<i64> = if d == 2 { range().collect() } else { vec![0] };
    for k1 in range() {
        for &k2 in &k2_range {
            let k = [k1, k2];
            // Fill one representative of each +-k pair, in lexicographic order.
            if (k1, k2) <= (0, 0) && !(k1 == 0 && k2 == 0) {
                continue;
            }
            let r: f64 = rng.random::<f64>().sqrt();
            let phase: f64 = 2.0 * PI * rng.random::<f64>();
            let mut c = Complex64::from_polar(r, phase);
            if k == [0, 0] {
                c = Complex64::new(if mean_zero { 0.0 } else { 2.0 * rng.random::<f64>() - 1.0 }, 0.0);
            }
            let slot = |k: [i64; 2]| {
                let i = grid.slot_of_mode(k[0]).unwrap();
                let j = if d == 2 { grid.slot_of_mode(k[1]).unwrap() } else { 0 };
                grid.flatten([i, j])
            };
            spec.coeffs_mut()[slot(k)] = c;
            spec.coeffs_mut()[slot([-k1, -k2])] = c.conj();
        }
    }
    inverse_transform(&spec)
}

/// Random divergence-free field `u = grad^perp psi` from a band-limited stream
/// function (d = 2), or a random constant (d = 1).
pub fn solenoidal_field<R: Rng>(grid: Grid, max_mode: i64, rng: &mut R) -> VectorField {
    if grid.dim() == 1 {
        let c = 2.0 * rng.random::<f64>() - 1.0;
        return VectorField::new(vec![ScalarField::constant(grid, c)]).expect("one component");
    }
    let psi = band_limited_field(grid, max_mode, true, rng);
    perpendicular_gradient(&psi)
}

/// `(d_2 psi, -d_1 psi)`.
pub fn perpendicular_gradient(psi: &ScalarField) -> VectorField {
    let g = crate::field::gradient(psi);
    VectorField::new(vec![g.component(1).clone(), g.component(0).scaled(-1.0)]).expect("two components")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_fields_are_real_and_reproducible() {
        let g = Grid::torus(2, 32).unwrap();
        let a = band_limited_field(g, 5, true, &mut rng_from_seed(7));
        let b = band_limited_field(g, 5, true, &mut rng_from_seed(7));
        assert_eq!(a, b);
        assert!(a.mean().abs() < 1e-15);
        assert!(a.spectrum().hermitian_defect() < 1e-12);
    }

    #[test]
    fn random_velocity_is_solenoidal() {
        let g = Grid::torus(2, 32).unwrap();
        let u = solenoidal_field(g, 4, &mut rng_from_seed(3));
        u.check_solenoidal().unwrap();
    }
}
