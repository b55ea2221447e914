//! The chapters of `book/` as doc modules, so `cargo test` runs every
//! snippet in the guide.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/states.md")]
pub mod states {}

#[doc = include_str!("../../../book/src/interferometer.md")]
pub mod interferometer {}

#[doc = include_str!("../../../book/src/weak-values.md")]
pub mod weak_values {}

#[doc = include_str!("../../../book/src/contexts.md")]
pub mod contexts {}

#[doc = include_str!("../../../book/src/inequality.md")]
pub mod inequality {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
