//! Command-line front end and file formats for the cocycle toolkit.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod report;
