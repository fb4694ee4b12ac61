//! Multivariable gradient extremum seeking for static quadratic maps under
//! input saturation (anti-windup) and gradient saturation.
//!
//! The crate covers the whole workflow: dither design and admissibility
//! checks, Hessian polytopes, LMI gain synthesis with a dense interior-point
//! solver, RK4 simulation of the true and averaged closed loops, and
//! post-hoc checks of the resulting trajectories.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod plant;
pub mod polytope;
pub mod sdp;
pub mod signals;
pub mod sim;
pub mod svg;
pub mod synthesis;

pub use error::{EscError, Result};
