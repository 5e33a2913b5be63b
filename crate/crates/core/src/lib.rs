//! Block-local key derivation for the bounded retrieval model.

pub mod auth;
pub mod bits;
pub mod disperser;
pub mod entropy;
mod error;
pub mod kdf;
pub mod oracle;
pub mod sim;

pub use bits::Bits;
pub use error::{Error, Result};
