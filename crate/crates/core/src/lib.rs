#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod oracle;
pub mod sampling;
pub mod scalar;
pub mod state;
pub mod teleport;

pub use error::{Error, Result};
