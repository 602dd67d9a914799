#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod linalg;
pub mod marginal;
pub mod random;
pub mod sharpness;
pub mod specmat;
pub mod subspaces;
pub mod sumproj;
pub mod tensorpow;

pub use error::{Error, Result};
