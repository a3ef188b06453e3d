//! Desk-scale realization of two-dimensional models with factorizing S-matrices.
//!
//! The crate is organized around the objects that appear when such a model is
//! built from a scattering function `S2`:
//!
//! * [`scatfn`]: scattering-function families, their analytic continuation,
//!   regularity data, phase shift and permutation factors.
//! * [`fock`]: an exact finite-mode S2-symmetric Fock space with
//!   Zamolodchikov–Faddeev creation/annihilation operators.
//! * [`formfactor`]: the contraction calculus for completely contracted matrix
//!   elements and the brute-force check of their commutator recursions.
//! * [`nuclearity`]: Hardy-norm factors, trace norms of the splitting kernel,
//!   minimal splitting distances and the series bounds on `‖Ξ(s)‖₁`.
//! * [`scattering`]: collision states, Møller maps and the S-matrix.

pub mod config;
pub mod error;
pub mod fock;
pub mod formfactor;
pub mod grid;
pub mod linalg;
pub mod nuclearity;
pub mod perm;
pub mod quad;
pub mod sample;
pub mod scatfn;
pub mod scattering;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use grid::RapidityGrid;
pub use scatfn::ScatteringFunction;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
