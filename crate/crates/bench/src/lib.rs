//! Shared fixtures for the benchmarks.

use mixlog_core::advection::{velocity_library, FlowParams};
use mixlog_core::random::{band_limited_field, rng_from_seed, solenoidal_field};
use mixlog_core::{Grid, ScalarField, VelocityField};

/// A seeded mean-zero scalar pair and a solenoidal velocity on the `n x n` torus,
/// all band-limited to `n / 8`.
pub fn triple(n: usize, seed: u64) -> (ScalarField, ScalarField, VelocityField) {
    let grid = Grid::torus(2, n).expect("even n");
    let band = (n as i64 / 8).max(1);
    let mut rng = rng_from_seed(seed);
    let f = band_limited_field(grid, band, true, &mut rng);
    let g = band_limited_field(grid, band, true, &mut rng);
    let v = solenoidal_field(grid, band, &mut rng);
    (f, g, v)
}

pub fn shear(grid: Grid) -> VelocityField {
    velocity_library("shear", &FlowParams::default())
        .and_then(|f| f.velocity(&grid, 0.0))
        .expect("shear is defined on every torus grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_consistent() {
        let (f, g, v) = triple(32, 1);
        assert_eq!(f.grid(), g.grid());
        assert!(v.check_solenoidal().is_ok());
        assert!(shear(*f.grid()).check_solenoidal().is_ok());
    }
}
