//! Finite-size laboratory for d-graded spin chains.
//!
//! The crate realizes the qudit Weyl algebra symbolically ([`weyl`]), checks it
//! against dense matrices ([`dense`]), builds string-dressed (parafermionic)
//! operators ([`dressing`]), runs one-particle quasifree dynamics
//! ([`one_particle`]) and finite-chain Heisenberg dynamics ([`dynamics`]), and
//! evaluates tracial-state correlations ([`states`]). [`lab`] wires everything
//! into the `grading-lab` command line tool.

pub mod dense;
pub mod dressing;
pub mod dynamics;
pub mod error;
pub mod lab;
pub mod one_particle;
pub mod states;
pub mod weyl;

pub use error::{LabError, Result};
pub use weyl::{AlgebraElement, GradingParams, Label, PhaseExp, WeylMonomial, C64};
