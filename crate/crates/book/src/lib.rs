//! The guide's code blocks, compiled and run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/entropy.md")]
pub mod entropy {}

#[doc = include_str!("../../../book/src/disperser.md")]
pub mod disperser {}

#[doc = include_str!("../../../book/src/oracle.md")]
pub mod oracle {}

#[doc = include_str!("../../../book/src/kdf.md")]
pub mod kdf {}

#[doc = include_str!("../../../book/src/leakage.md")]
pub mod leakage {}

#[doc = include_str!("../../../book/src/auth.md")]
pub mod auth {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
