//! IO, file formats, parallel rendering, and the benchmark harness around
//! `voxfuse-core`. The `voxfuse` binary wires these into the `gen`, `render`,
//! `fuse`, `bench`, and `psnr` subcommands.

pub mod bench;
pub mod commands;
pub mod formats;
pub mod parallel;
pub mod report;
