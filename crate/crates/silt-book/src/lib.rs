//! The guide chapters, compiled as doc-tests.
//!
//! Each module below embeds one chapter of the book under `book/src`,
//! so every code block in the guide is built and run by
//! `cargo test --workspace`; the prose cannot drift from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/connectivity-matrices.md")]
pub mod connectivity_matrices {}

#[doc = include_str!("../../../book/src/multigraphs.md")]
pub mod multigraphs {}

#[doc = include_str!("../../../book/src/gamma-function.md")]
pub mod gamma_function {}

#[doc = include_str!("../../../book/src/sector-sampling.md")]
pub mod sector_sampling {}

#[doc = include_str!("../../../book/src/quadrature.md")]
pub mod quadrature {}

#[doc = include_str!("../../../book/src/integrals.md")]
pub mod integrals {}

#[doc = include_str!("../../../book/src/moments.md")]
pub mod moments {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
