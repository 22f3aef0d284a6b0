//! Code listings from the guide in `book/`, compiled and run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/systems.md")]
pub mod systems {}

#[doc = include_str!("../../../book/src/shadowing.md")]
pub mod shadowing {}

#[doc = include_str!("../../../book/src/gluing.md")]
pub mod gluing {}

#[doc = include_str!("../../../book/src/entropy.md")]
pub mod entropy {}

#[doc = include_str!("../../../book/src/classify.md")]
pub mod classify {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
