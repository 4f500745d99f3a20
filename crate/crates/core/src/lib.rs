//! Exact simulator and security-analysis toolkit for quantum private queries.

pub mod analysis;
pub mod error;
pub mod protocol;
pub mod qcore;
pub mod strategies;
pub mod variants;

pub use error::{Error, Result};
