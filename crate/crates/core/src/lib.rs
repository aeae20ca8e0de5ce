//! Quantitative mixing of passive scalars on periodic and whole-space grids.

pub mod advection;
pub mod constants;
pub mod dcommutator;
pub mod diagnostics;
pub mod error;
pub(crate) mod fft;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod io;
pub mod logft;
pub mod mixing;
pub mod random;
pub mod verify;

pub use constants::Constants;
pub use error::{MixError, Result};
pub use field::{ScalarField, Spectrum, VectorField, VelocityField};
pub use grid::{DomainKind, Grid};
pub use rustfft::num_complex::Complex64;
