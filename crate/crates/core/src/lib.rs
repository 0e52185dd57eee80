//! Causal structure toolkit for discrete tabular data.
//!
//! Candidate DAGs (hand-written, LLM-elicited, or discovered with PC or
//! NOTEARS) are validated against data with BDeu scores, fitted as Bayesian
//! networks, and queried for interventional effects by exact inference.

pub mod bayesnet;
pub mod data;
pub mod error;
pub mod graph;
pub mod intervention;
pub mod notears;
pub mod nsclc;
pub mod pc;
pub mod scoring;
pub mod synth;

pub use error::{Error, Result};
