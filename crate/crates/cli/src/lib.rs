//! Configuration, verification suites and table emitters behind the
//! `hypsegal` command-line tool.

pub mod config;
pub mod suite;
pub mod table;

pub use config::{ConfigError, RunConfig, SuiteName};
pub use suite::{run_suite, SuiteReport};
pub use table::{ProfileChoice, TableKind};
