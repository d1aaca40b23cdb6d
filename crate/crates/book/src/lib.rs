//! Runs the guide's code blocks as doc-tests, since mdbook cannot resolve
//! crate dependencies on its own. One module per chapter keeps failures
//! traceable.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/kernels.md")]
pub mod kernels {}
#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}
#[doc = include_str!("../../../book/src/assembly.md")]
pub mod assembly {}
#[doc = include_str!("../../../book/src/minimization.md")]
pub mod minimization {}
#[doc = include_str!("../../../book/src/spectra.md")]
pub mod spectra {}
#[doc = include_str!("../../../book/src/studies.md")]
pub mod studies {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../README.md")]
pub mod readme {}
