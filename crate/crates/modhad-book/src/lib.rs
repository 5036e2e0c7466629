//! Doc-test shim for the book under `book/`.
//!
//! mdbook cannot run snippets against a crate dependency, so each chapter
//! is included here as module documentation and `cargo test --doc` runs
//! every code block. One module per chapter keeps failures attributable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/matrices.md")]
pub mod matrices {}

#[doc = include_str!("../../../book/src/designs.md")]
pub mod designs {}

#[doc = include_str!("../../../book/src/lifts.md")]
pub mod lifts {}

#[doc = include_str!("../../../book/src/decision.md")]
pub mod decision {}

#[doc = include_str!("../../../book/src/search.md")]
pub mod search {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
