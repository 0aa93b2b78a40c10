//! Front tracking with pseudo-shocks for the p-system in Lagrangian mass
//! coordinates, with viscous wave profiles, weighted relative entropy and a
//! Navier–Stokes desk solver for inviscid-limit experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod contraction;
pub mod error;
pub mod fronttrack;
pub mod glimm;
pub mod ns_solver;
pub mod numerics;
pub mod profiles;
pub mod riemann;
pub mod scenario;
pub mod thermo;

pub use error::{Error, Result};
