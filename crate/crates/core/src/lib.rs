//! Lasso regularization paths, pseudo-inverse least squares, and
//! cross-validated selection of the Lasso fraction parameter in both its
//! standard and normalized forms, plus a simulation harness for studying test
//! error as the observations-to-variables ratio crosses one.

pub mod config;
pub mod cv;
pub mod error;
pub mod io;
pub mod lars;
pub mod linalg;
pub mod simulation;

pub use error::{Error, Result};
