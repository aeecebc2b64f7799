//! Toolkit for clinical drug/problem event and relation annotations:
//! standoff I/O, schema validation, context windows, generative-model
//! codecs, relaxed-match scoring, and synthetic corpora.

pub mod cli;
pub mod codec;
pub mod model;
pub mod segment;
pub mod standoff;
pub mod validate;
pub mod window;
pub mod score;
pub mod synth;
