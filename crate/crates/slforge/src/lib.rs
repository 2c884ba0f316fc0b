//! Query-log to question–query dataset pipeline.

pub mod agent;
pub mod cli;
pub mod config;
pub mod curate;
pub mod embed;
pub mod kg;
pub mod log;
pub mod records;
pub mod split;
