//! Multi-order path models for higher-order network analytics.
//!
//! Paths are fitted by three model families (a first-order network, the
//! lossless path multiset and the multi-order generative model, MOGen) whose
//! path centralities are computed analytically from the fundamental matrix of
//! an absorbing Markov chain. On top sit a train/test prediction experiment
//! and a rolling-window deviation score for spotting community smells in
//! development-process data.

pub mod error;
pub mod models;
pub mod pathdata;
pub mod centrality;
pub mod experiment;
pub mod smells;
pub mod synth;

pub use error::{Error, Result};
