//! Command line entry points and the HTTP service behind the explorer.

pub mod bench;
pub mod cli;
pub mod service;

pub use cli::main;
