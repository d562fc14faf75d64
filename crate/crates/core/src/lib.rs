#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bands;
pub mod curvegeom;
pub mod eigen;
pub mod error;
pub mod fourier;
pub mod hill;
pub mod leaky2d;
pub mod quadrature;
pub mod run;
pub mod special;
pub mod transverse;
pub mod tubefibre;
pub mod verify;

pub use error::{Error, Result};
