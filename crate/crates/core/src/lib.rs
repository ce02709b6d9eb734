//! Sobolev extremals, their large-p limits and a monotone infinity-Laplacian solver on uniform grids.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod asymptotics;
pub mod cli;
pub mod geometry;
pub mod inflap;
pub mod plap;
