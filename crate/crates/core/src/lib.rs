//! Constrained split augmented Lagrangian shrinkage (C-SALSA) for imaging
//! inverse problems of the form `min φ(x)` subject to `‖B x − y‖₂ ≤ ε`.
//!
//! * [`operators`]: grids, the unitary FFT, the undecimated Haar frame and the
//!   three observation operators with their fast regularized inverses.
//! * [`proximity`]: soft threshold, TV prox, ε-ball projection.
//! * [`solver`]: the generic three-block ADMM and its C-SALSA instantiation.
//! * [`bench`]: deblurring and compressive-MRI experiment harness.
//! * [`oracle`]: brute-force reference checks shared by the test suites and
//!   the command-line self-test.

pub mod bench;
pub mod error;
pub mod operators;
pub mod oracle;
pub mod proximity;
pub mod solver;

pub use error::{Error, Result};
