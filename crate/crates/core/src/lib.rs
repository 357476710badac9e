//! Computational tools for branched covers, Julia-set continua, antennas
//! and Chebyshev interval dynamics.

pub mod antenna;
pub mod chebyshev;
pub mod cxc_cover;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod lifting;
pub mod planar;

pub use error::{Error, Result};
