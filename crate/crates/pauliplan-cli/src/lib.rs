//! Library surface behind the `pauliplan` binary: argument handling, the
//! measurement-strategy runners, the benchmark harness, and the fixture
//! generators. Kept as a lib so the integration and acceptance suites can
//! drive the same code paths the binary does.

pub mod bench;
pub mod cli;
pub mod commands;
pub mod config;
pub mod fixtures;
pub mod methods;
