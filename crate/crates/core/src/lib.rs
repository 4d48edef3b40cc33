//! Verification engine for locally conformal symplectic groupoids.

pub mod catalog;
pub mod cli;
pub mod dsl;
pub mod error;
pub mod exterior;
pub mod expr;
pub mod groupoid;
pub mod jacobi;
pub mod lcs;
pub mod linalg;
pub mod report;

pub use error::{Error, Result};
