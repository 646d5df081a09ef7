//! Dynamical zeta functions and complex-valued torsion on finite models.
//!
//! The crate computes, from hyperbolic length-spectrum data:
//!
//! - twisted Ruelle and Selberg zeta functions as truncated Euler products
//!   with certified truncation errors ([`zeta`]);
//! - zeta-regularized and graded determinants of finite (optionally tailed)
//!   non-self-adjoint spectra with Agmon-angle branch bookkeeping ([`regdet`]);
//! - chain-level complex Reidemeister and Cappell-Miller torsions of based
//!   cochain complexes with a duality (star) structure ([`torsion`]);
//! - the limit identity at `s = 0` relating the two sides on finite
//!   spectral models ([`torsion::fried_limit_check`]).
//!
//! See the book under `book/` for worked examples; its code blocks run as
//! doctests of this crate.

pub mod fixtures;
pub mod geodesics;
pub mod linalg;
pub mod model;
pub mod regdet;
pub mod reps;
pub mod tolerances;
pub mod torsion;
pub mod zeta;

pub use linalg::{c64, C64, CMatrix, CVector};
