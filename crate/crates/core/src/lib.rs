//! Correlation-based principal component analysis with a vector-space
//! reading of its results.
//!
//! The pipeline runs
//! [`ingest`] → [`corrstats`] → [`eigensolve`] → [`tensorops`] → [`pcacore`]
//! → [`varcluster`], and [`report`] assembles everything into one
//! [`report::AnalysisReport`] with markdown, CSV, JSON and SVG renderings.

pub mod corrstats;
pub mod eigensolve;
pub mod error;
pub mod ingest;
pub mod linalg;
pub mod pcacore;
pub mod report;
pub mod special;
pub mod tensorops;
pub mod varcluster;

pub use corrstats::CorrelationMatrix;
pub use eigensolve::EigenSystem;
pub use error::{Error, Result};
pub use linalg::Matrix;
