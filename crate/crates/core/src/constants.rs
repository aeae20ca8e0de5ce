use crate::error::Result;
use crate::logft::{alpha_beta, sphere_area, zeta_constant, ZetaResult};
use serde::{Deserialize, Serialize};

/// Dimensional constants of the physical-space form of `V` and of the commutator kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub d: usize,
    /// Surface area of the unit sphere, `sigma_{d-1}`.
    pub sigma: f64,
    pub zeta: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Commutator kernel constant `d / sigma_{d-1}`.
    pub c_d: f64,
    /// Quadrature error bound on `zeta`.
    pub zeta_error: f64,
}

impl Constants {
    /// Computes `zeta_d` by quadrature.
    pub fn new(d: usize) -> Result<Self> {
        let z = zeta_constant(d)?;
        Self::from_zeta(&z)
    }

    pub fn from_zeta(z: &ZetaResult) -> Result<Self> {
        let (alpha, beta) = alpha_beta(z.d, z.value)?;
        let sigma = sphere_area(z.d);
        Ok(Constants { d: z.d, sigma, zeta: z.value, alpha, beta, c_d: z.d as f64 / sigma, zeta_error: z.error_bound })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bundle_relations() {
        let c1 = Constants::new(1).unwrap();
        assert_eq!(c1.sigma, 2.0);
        assert_eq!(c1.alpha, 0.5);
        assert_eq!(c1.c_d, 0.5);
        assert_eq!(c1.beta, c1.zeta * c1.alpha);
        let c2 = Constants::new(2).unwrap();
        assert_eq!(c2.sigma, 2.0 * PI);
        assert!((c2.c_d - 1.0 / PI).abs() < 1e-16);
        assert!(c2.zeta_error < 1e-8);
    }
}
