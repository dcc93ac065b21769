//! Path-loss modelling for terahertz links between airborne and ground
//! transceivers.
//!
//! The crate generates 4-D transmittance grids `τ(l, d, θ, f)` from a
//! synthetic layered atmosphere (or ingests externally produced ones), fits
//! closed-form absorption models to them with a cascaded least-squares
//! pipeline, predicts total path loss `FSPL + L_abs` between arbitrary 3-D
//! positions, and scores models with RMSE/NRMSE reports.
//!
//! Lengths are meters at the geometry API and kilometers everywhere else;
//! frequencies are THz and angles degrees.

// Range checks are written `!(x > 0.0)` so that NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atmosphere;
pub mod cli;
pub mod datagrid;
pub mod error;
pub mod evaluation;
mod fmt;
pub mod geometry;
pub mod model;
pub mod regression;

pub use error::{Error, FitStage, Result};
pub use fmt::g17;
