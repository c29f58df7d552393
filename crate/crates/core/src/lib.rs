//! Finite-dimensional workbench for contextual (topos-style) quantum
//! mechanics.

pub mod cli;
pub mod contexts;
pub mod daseinise;
pub mod error;
pub mod gauge;
pub mod interp;
pub mod linalg;
pub mod sheaf;
pub mod twogroup;

pub use error::{Error, Result};
