//! The guide's chapters, compiled as doc comments so that every snippet
//! runs under `cargo test`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/linalg.md")]
pub mod linalg {}
#[doc = include_str!("../../../book/src/chain.md")]
pub mod chain {}
#[doc = include_str!("../../../book/src/eigengates.md")]
pub mod eigengates {}
#[doc = include_str!("../../../book/src/driving.md")]
pub mod driving {}
#[doc = include_str!("../../../book/src/protocol.md")]
pub mod protocol {}
#[doc = include_str!("../../../book/src/analysis.md")]
pub mod analysis {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/reproduction.md")]
pub mod reproduction {}
