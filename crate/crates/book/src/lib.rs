//! The chapters of the guide in `book/src`, compiled so that `cargo test`
//! runs every code block in them. One module per chapter keeps failures
//! traceable to their file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/grids-and-fields.md")]
pub mod grids_and_fields {}
#[doc = include_str!("../../../book/src/littlewood-paley.md")]
pub mod littlewood_paley {}
#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}
#[doc = include_str!("../../../book/src/perturbations.md")]
pub mod perturbations {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
