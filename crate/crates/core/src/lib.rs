//! Semiclassical asymptotics of the focusing nonlinear Schrödinger equation
//!
//! `iε ψ_t + (ε²/2) ψ_xx + |ψ|² ψ = 0`, `ψ(x, 0) = q` on `|x| ≤ L`, `0` elsewhere,
//!
//! covering the exact scattering data of the barrier, the level-set geometry
//! of the modified phases and the breaking curves, the genus-zero and
//! genus-one asymptotic wave forms, and a split-step Fourier solver used to
//! validate them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod genus0;
pub mod genus1;
pub mod nls_direct;
pub mod phase_geometry;
pub mod scattering;
pub mod specfun;

pub use error::{Error, Result};
