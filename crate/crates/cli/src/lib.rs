//! Command-line front end for the TIDBD experiments.

pub mod commands;
pub mod config;
pub mod output;
