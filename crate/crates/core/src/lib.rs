// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adjoint;
pub mod error;
pub mod fem;
pub mod forward;
pub mod fracops;
pub mod harness;
pub mod inverse;
pub mod linalg;
pub mod mesh;

pub use error::{Error, Result};
