//! Information design for linear-quadratic-Gaussian games.
//!
//! A designer chooses how much the players learn about a Gaussian payoff
//! state. Because equilibrium strategies are linear, every attainable
//! action/state covariance `X` is characterised by linear equalities plus
//! `X ⪰ 0`, and any quadratic designer objective becomes `F • X`. This crate
//! builds the games and objectives, solves the resulting semidefinite program,
//! compares against no and full disclosure, issues closed-form optimality
//! certificates and validates designs by simulated play.
//!
//! Module map:
//!
//! - [`game`]: games, validation and the canonical game families
//! - [`equilibrium`]: linear Bayesian Nash equilibria and the disclosure baselines
//! - [`objectives`]: welfare, conformism and blended objective matrices
//! - [`sdp`]: problem assembly, the ADMM solver and KKT checks
//! - [`analysis`]: closed-form certificates and thresholds
//! - [`montecarlo`]: sampling-based validation of designs
//! - [`experiments`]: parameter sweeps written as CSV

pub mod analysis;
pub mod equilibrium;
pub mod error;
pub mod experiments;
pub mod game;
pub mod json;
pub mod linalg;
pub mod montecarlo;
pub mod objectives;
pub mod sdp;

pub use error::{Error, Result};
