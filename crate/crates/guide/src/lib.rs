//! The book's chapters, compiled as doctests so that their snippets keep
//! building against the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/jets.md")]
pub mod jets {}
#[doc = include_str!("../../../book/src/subequations.md")]
pub mod subequations {}
#[doc = include_str!("../../../book/src/catalog.md")]
pub mod catalog {}
#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}
#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}
#[doc = include_str!("../../../book/src/counterexamples.md")]
pub mod counterexamples {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
