//! Evanescent plane-wave approximation of Helmholtz solutions in the unit ball.
//!
//! The library covers special functions ([`specfun`]), Wigner matrices
//! ([`wigner`]), the spherical-wave and Herglotz bases ([`basis`]), sphere and
//! polyhedral cubature ([`sphquad`]), plane waves ([`waves`]), parameter
//! sampling ([`sampling`]), the regularized sampling solver ([`solver`]) and the
//! experiment drivers used by the `epw` binary ([`scenarios`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod config;
pub mod error;
pub mod output;
pub mod rng;
pub mod sampling;
pub mod scenarios;
pub mod sobol;
pub mod solver;
pub mod specfun;
pub mod sphquad;
pub mod waves;
pub mod wigner;

pub use error::{EpwError, Result};
