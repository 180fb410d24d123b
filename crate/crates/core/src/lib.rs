//! Rational approximation of `|x|` (and other sampled functions) from data.

pub mod aaa;
pub mod bounds;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod iterative;
pub mod linalg;
pub mod loewner;
pub mod maxerror;
pub mod model;
pub mod newman;
pub mod sampling;

pub use error::{Error, Result};
