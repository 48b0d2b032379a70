//! Exact computations with characteristic-2 modular forms of level 3.
//!
//! The layers, bottom to top:
//!
//! - [`gf2poly`]: bit-packed polynomials over Z/2.
//! - [`gf2linalg`]: dense GF(2) matrices, kernels, incremental echelon.
//! - [`semilinear`]: the operators `U`, `alpha`, `T` on Z/2[r] and the
//!   module decompositions over Z/2[G] and Z/2[G^2].
//! - [`recurrence`]: the `A_n`, `C_n` families and the `C_{4m}` expander.
//! - [`kernelspaces`]: `L`, `L*`, `K_m` in g-coordinates.
//! - [`qseries`]: truncated q-expansions and the Hecke operators on them.
//! - [`adapted`]: `K` as a Hecke module and its basis adapted to `T_7`, `T_13`.
//! - [`suite`]: the end-to-end checks behind `verify all` and the acceptance test.

pub mod adapted;
pub mod gf2linalg;
pub mod gf2poly;
pub mod kernelspaces;
pub mod qseries;
pub mod recurrence;
pub mod semilinear;
pub mod suite;

pub use gf2linalg::{BitMatrix, IncrementalEchelon};
pub use gf2poly::{BitPoly, Degree};
pub use semilinear::RElement;
