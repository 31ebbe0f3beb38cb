//! Numerical verification laboratory for Morera-type theorems on families
//! of analytic discs.
//!
//! A [`family::DiscFamily`] stores analytic discs `G(zeta, t)` as per-node
//! Taylor data. On top of it:
//!
//! - [`extension`] decides whether a boundary function extends
//!   holomorphically into every disc;
//! - [`jacobian`] builds the Jacobian `J` of the pair `(F, G)`, tracks its
//!   zero branches and the phase `Theta = J / conj(J)`;
//! - [`topology`] traces level curves of `G`, counts boundary preimages
//!   (Brouwer degree) and tests the homological conditions;
//! - [`verify`] combines everything into symmetry checks, jump profiles and
//!   a final [`verify::Verdict`];
//! - [`hypersurface`] holds the two-dimensional layer (minors, `K_mu`,
//!   tangential Cauchy-Riemann operator);
//! - [`cli`] is the config-driven runner behind the `crfolio` binary.

pub mod cli;
pub mod error;
pub mod expr;
pub mod extension;
pub mod family;
pub mod function;
pub mod hypersurface;
pub mod jacobian;
pub mod numerics;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
