//! Uniform grids on the unit torus or on a symmetric box `[-R, R]^d`.

use crate::error::{MixError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainKind {
    /// Periodic cell `[0, 1)^d`.
    Torus,
    /// Truncated whole space `[-R, R)^d`; fields are assumed negligible at the edges.
    Box { half_width: f64 },
}

/// Grid descriptor. Axis 0 is the slow (row) index in row-major storage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
    kind: DomainKind,
}

impl Grid {
    pub fn new(dim: usize, kind: DomainKind, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(MixError::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if n < 4 || n % 2 != 0 || !n.is_power_of_two() {
            return Err(MixError::InvalidGrid(format!(
                "points per axis must be an even power of two >= 4, got {n}"
            )));
        }
        if let DomainKind::Box { half_width } = kind {
            if !(half_width > 0.0 && half_width.is_finite()) {
                return Err(MixError::InvalidGrid(format!(
                    "box half-width must be positive, got {half_width}"
                )));
            }
        }
        Ok(Grid { dim, n, kind })
    }

    pub fn torus(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, DomainKind::Torus, n)
    }

    pub fn boxed(dim: usize, n: usize, half_width: f64) -> Result<Self> {
        Self::new(dim, DomainKind::Box { half_width }, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.kind, DomainKind::Torus)
    }

    /// Box half-width, or `None` on the torus.
    pub fn half_width(&self) -> Option<f64> {
        match self.kind {
            DomainKind::Torus => None,
            DomainKind::Box { half_width } => Some(half_width),
        }
    }

    /// Total number of samples, `N^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical spacing `h`.
    pub fn spacing(&self) -> f64 {
        match self.kind {
            DomainKind::Torus => 1.0 / self.n as f64,
            DomainKind::Box { half_width } => 2.0 * half_width / self.n as f64,
        }
    }

    /// Quadrature weight of one cell, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Spacing of the dual (frequency) lattice: 1 on the torus, `1/(2R)` on the box.
    pub fn dual_spacing(&self) -> f64 {
        match self.kind {
            DomainKind::Torus => 1.0,
            DomainKind::Box { half_width } => 1.0 / (2.0 * half_width),
        }
    }

    /// Weight of one dual cell, `dual_spacing^d`.
    pub fn dual_cell_volume(&self) -> f64 {
        self.dual_spacing().powi(self.dim as i32)
    }

    /// Coordinate of sample `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        match self.kind {
            DomainKind::Torus => i as f64 / self.n as f64,
            DomainKind::Box { half_width } => -half_width + i as f64 * self.spacing(),
        }
    }

    /// Signed integer mode index for FFT slot `i` (Nyquist maps to `+N/2`).
    pub fn mode_index(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i <= n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT slot for a signed mode index, if it is representable.
    pub fn slot_of_mode(&self, k: i64) -> Option<usize> {
        let n = self.n as i64;
        if k > n / 2 || k <= -n / 2 {
            return None;
        }
        Some(k.rem_euclid(n) as usize)
    }

    /// Split a flat index into per-axis indices (unused axes are 0).
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.n, flat % self.n],
        }
    }

    pub fn flatten(&self, idx: [usize; 2]) -> usize {
        match self.dim {
            1 => idx[0],
            _ => idx[0] * self.n + idx[1],
        }
    }

    /// Physical position of flat sample `flat` (second entry 0 when d = 1).
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let [i, j] = self.unflatten(flat);
        match self.dim {
            1 => [self.coord(i), 0.0],
            _ => [self.coord(i), self.coord(j)],
        }
    }

    /// Integer mode vector of flat FFT slot `flat`.
    pub fn mode(&self, flat: usize) -> [i64; 2] {
        let [i, j] = self.unflatten(flat);
        match self.dim {
            1 => [self.mode_index(i), 0],
            _ => [self.mode_index(i), self.mode_index(j)],
        }
    }

    /// Frequency vector `xi` of flat FFT slot `flat` (mode times dual spacing).
    pub fn wavevector(&self, flat: usize) -> [f64; 2] {
        let k = self.mode(flat);
        let s = self.dual_spacing();
        [k[0] as f64 * s, k[1] as f64 * s]
    }

    /// `|xi|` of flat FFT slot `flat`.
    pub fn frequency_norm(&self, flat: usize) -> f64 {
        let xi = self.wavevector(flat);
        xi[0].hypot(xi[1])
    }

    /// True if any component of the mode sits on the Nyquist slot.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let k = self.mode(flat);
        let half = (self.n / 2) as i64;
        k[..self.dim].iter().any(|&c| c == half)
    }

    /// Largest per-axis mode magnitude.
    pub fn max_mode(&self) -> i64 {
        (self.n / 2) as i64
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(MixError::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_modes_cover_half_band() {
        let g = Grid::torus(2, 64).unwrap();
        assert_eq!(g.len(), 4096);
        let max = (0..g.len()).map(|f| g.mode(f)[0].abs().max(g.mode(f)[1].abs())).max();
        assert_eq!(max, Some(32));
    }

    #[test]
    fn box_spacing() {
        let g = Grid::boxed(1, 256, 8.0).unwrap();
        assert_eq!(g.spacing(), 1.0 / 16.0);
        assert_eq!(g.coord(0), -8.0);
        assert_eq!(g.dual_spacing(), 1.0 / 16.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Grid::torus(2, 5).is_err());
        assert!(Grid::torus(2, 12).is_err());
        assert!(Grid::torus(3, 16).is_err());
        assert!(Grid::torus(2, 2).is_err());
        assert!(Grid::boxed(1, 16, 0.0).is_err());
        assert!(Grid::boxed(1, 16, -1.0).is_err());
    }

    #[test]
    fn slots_round_trip() {
        let g = Grid::torus(1, 16).unwrap();
        for i in 0..16 {
            assert_eq!(g.slot_of_mode(g.mode_index(i)), Some(i));
        }
        assert_eq!(g.slot_of_mode(9), None);
        assert_eq!(g.slot_of_mode(-8), None);
    }
}
