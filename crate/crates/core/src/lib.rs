//! Exact certification of Frobenius manifolds, flat pencils of contravariant
//! metrics and the hydrodynamic Poisson brackets they define.

#![allow(clippy::needless_range_loop)]

pub mod coxeter;
pub mod error;
pub mod exactalg;
pub mod frobenius;
pub mod geometry;
pub mod io;
pub mod loopspace;
pub mod reconstruction;
pub mod report;

pub use error::{Error, Result};
