//! Verification engine for Finsler sprays: exact forward-mode jets, spray
//! geometry, Weyl-type curvature tensors and projective pairs.

pub mod autodiff;
pub mod cli;
pub mod catalog;
pub mod error;
pub mod forms;
pub mod geometry;
pub mod projective;
pub mod reference;
pub mod report;
pub mod suite;
pub mod weyl;

pub use error::{Error, Result};
