//! Numerical laboratory for planar viscous shocks of the 3D compressible
//! Navier–Stokes equations on `ℝ × T²`.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod accept;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod gas;
pub mod grid;
pub mod inequality;
pub mod mms;
pub mod ode;
pub mod par;
pub mod profile;
pub mod run;
pub mod sim;
pub mod solver;
pub mod state;
pub mod weight;

pub use error::{Result, ShockError};
