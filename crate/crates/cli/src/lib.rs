#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Command-line driver for `eo-core`: configuration, artifacts and the
//! `verify` acceptance suites.

pub mod commands;
pub mod config;
pub mod error;
pub mod golden;
pub mod inputs;
pub mod output;
pub mod suite;

pub use commands::run;
