//! Configuration loading, trace serialization, and run orchestration for
//! the `sfhf` benchmark binary.
//!
//! The binary is a thin shell over this library so integration tests can
//! exercise config resolution and CSV round-trips in-process.

pub mod config;
pub mod runner;
pub mod trace;
