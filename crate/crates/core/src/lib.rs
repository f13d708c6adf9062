//! Weighted norm inequalities for operators transferred from the real line to
//! measure-preserving flows.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod flows;
pub mod line_operators;
pub mod literals;
pub mod runner;
pub mod sampled_line;
pub mod transfer;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
