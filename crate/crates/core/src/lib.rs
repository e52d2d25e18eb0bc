//! Numerical laboratory for Hölder and Besov well-posedness questions of the
//! incompressible Euler equations.

pub mod error;
pub mod fft;
pub mod grid;
pub mod inflation;
pub mod io;
pub mod lagrangian;
pub mod quad;
pub mod shear_flow;
pub mod spaces;

pub use error::{Error, Result};
pub use grid::{Grid2D, ScalarField2D, VectorField2D};
