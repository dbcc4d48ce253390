//! Closed-caption news mining.
//!
//! The pipeline runs ingest → segment → annotate → score → match → analyze,
//! with a numeric kit (clustering, biclustering, Tucker3) for the provider
//! and newsmaker analyses.

pub mod analytics;
pub mod annotate;
pub mod config;
pub mod factor;
pub mod ingest;
pub mod matching;
pub mod pipeline;
pub mod records;
pub mod scoring;
pub mod segment;
pub mod toy;
