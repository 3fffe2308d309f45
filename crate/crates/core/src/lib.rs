//! Moral-competence toolkit: a normative-ethics scoring calculus, a
//! tail-risk penalty built on it, tabular dataset mapping, five
//! from-scratch classifier families, and a benchmarking harness that
//! compares ethical-competence techniques across all of them.

pub mod data;
pub mod error;
pub mod ethics;
pub mod harness;
pub mod models;
pub mod risk;

pub use error::{Error, Result};
