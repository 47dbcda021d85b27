pub mod bounds;
pub mod cli;
pub mod error;
pub mod fpde;
pub mod mlf;
pub mod oscint;
pub mod phases;
pub mod quad;
pub mod special;
pub mod suite;

pub use error::{Error, Result};
