//! Batch driver: configuration, the stage pipeline and the report.

pub mod config;
pub mod matrix;
pub mod pipeline;
