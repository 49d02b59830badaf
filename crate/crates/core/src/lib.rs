//! Synthesis of balanced, temporally coherent training videos from a small
//! annotated corpus.
//!
//! The pipeline extracts a workflow graph from frame-level annotations
//! ([`graph`]), cuts the source videos into transition-centered segments
//! ([`segment`]), reassembles them along random graph walks ([`assemble`])
//! and augments the result spatially ([`spatial`]) and temporally
//! ([`temporal`]). [`metrics`] and [`stats`] provide the evaluation and
//! dataset-balance reports.

// Negated float comparisons deliberately treat NaN as out of range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annotation;
pub mod assemble;
pub mod error;
pub mod graph;
pub mod metrics;
pub mod num;
pub mod rng;
pub mod segment;
pub mod spatial;
pub mod stats;
pub mod synth;
pub mod temporal;

pub use annotation::{ClassCatalog, ClassId, LabelTrack, RawTrack};
pub use error::{Error, ErrorKind, Result};
pub use num::Real;

/// Workflow graph with `f64` weights.
pub type Graph = graph::WorkflowGraph<f64>;
pub type Summary = stats::Summary<f64>;
pub type CorpusStats = stats::CorpusStats<f64>;
pub type OverallMetrics = metrics::OverallMetrics<f64>;
pub type BinaryMetrics = metrics::BinaryMetrics<f64>;
pub type MetricsReport = metrics::MetricsReport<f64>;
pub type SegmentStats = segment::SegmentStats<f64>;
