//! Library half of the `qlho` binary: configuration resolution and the
//! experiment runner, split out so integration tests can drive both
//! without spawning a process.

pub mod config;
pub mod runner;
