//! Configuration, orchestration and reporting for the `fnclust` command.

pub mod args;
pub mod commands;
pub mod config;
pub mod pipeline;
pub mod report;
