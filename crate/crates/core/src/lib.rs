// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod cli;
pub mod error;
pub mod models;
pub mod odeint;
pub mod poincare;
pub mod quad;
pub mod roots;
pub mod shapefit;
pub mod transition;

pub use error::{Error, Result};
