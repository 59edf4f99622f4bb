//! Numerical laboratory for subordination inequalities between martingales
//! on a two-dimensional Brownian filtration, where the dominating martingale
//! is orthogonal (conformal integrand).
//!
//! The crate computes the sharp constants
//! `C_{p'} = z_{p'}/(sqrt(2)(1 - z_{p'}))` and
//! `C_p = sqrt(2)(1 - z_p)/z_p` from certified least positive roots of the
//! Laguerre function, property-checks Burkholder's Bellman function `u` and
//! its minorant `v` (majorization, concavity along admissible directions,
//! the half-projection identity for conformal integrands), and validates the
//! resulting `L^p` bounds by reproducible Monte Carlo simulation of
//! orthogonal/subordinate martingale pairs.

pub mod analysis;
pub mod bellman;
pub mod exponent;
pub mod geom;
pub mod laguerre;
pub mod rng;
pub mod simulator;

pub use exponent::{Exponent, ExponentError};
pub use geom::{DirectionMatrix, Vec2};
pub use laguerre::{LaguerreBranch, RootCertificate};
