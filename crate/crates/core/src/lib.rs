//! Numerical laboratory for back-and-forth nudging (BFN) on one-dimensional
//! transport, diffusion and Bürgers equations.

pub mod acceptance;
pub mod bfn;
pub mod burgers;
pub mod characteristics;
pub mod cli_io;
pub mod equation;
pub mod error;
pub mod field;
pub mod gain;
pub mod grid;
pub mod interp;
pub mod linear_pde;
pub mod path;
pub mod spectral;
pub mod trajectory;

pub use equation::{Advection, EquationClass, EquationSpec};
pub use error::{BfnError, Result};
pub use field::{l2_norm, linf_grad, Field, Profile};
pub use gain::{Gain, Support, Window};
pub use grid::{BoundaryKind, Grid1D};
pub use trajectory::{Observations, Stepping, Sweep, Trajectory};
