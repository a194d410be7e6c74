//! Weakly orthogonal infinitary term rewriting over rational terms.

pub mod compression;
pub mod error;
pub mod term;
pub mod orthogonalize;
pub mod projection;
pub mod redex;
pub mod sequence;
pub mod sp;
pub mod trs;

pub use error::{Error, Result};
