//! Dialect-bias audit tooling: corpus ingestion, scoring backends, score
//! tables, disparity reports, the HTTP service and the command line.

pub mod audit;
pub mod cli;
pub mod ingest;
#[cfg(feature = "onnx")]
pub mod onnx;
pub mod report;
pub mod scoring;
pub mod service;
pub mod table;
