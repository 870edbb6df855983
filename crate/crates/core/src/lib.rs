//! Dense voxel radiance fields and their composition.
//!
//! A scene is a set of voxel lattices placed in a shared world by similarity
//! transforms. Rendering traces rays through the composition, picking the
//! most opaque constituent at every sample. The distiller collapses such a
//! composition back into a single lattice with the render cost and memory
//! footprint of one field.
//!
//! The crate is `no_std`-compatible (`default-features = false`); it needs
//! only `alloc`. File formats, the CLI, parallel rendering, and wall-clock
//! timing live in the companion `voxfuse` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod composer;
pub mod distiller;
pub mod field;
pub mod math;
pub mod renderer;
pub mod sampling;
pub mod scenegen;

mod error;

pub use error::Error;

pub type Result<T> = core::result::Result<T, Error>;
