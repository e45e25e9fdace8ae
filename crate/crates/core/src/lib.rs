//! Learn to map word images straight to semantic concepts.
//!
//! The pipeline mines concept labels from a WordNet hypernym taxonomy
//! ([`taxonomy`]), renders synthetic word images ([`wordgen`]), trains a
//! small convolutional network ([`tinynet`]) with a WARP ranking loss
//! ([`warp`]), and evaluates the joint image/concept embedding space on
//! retrieval tasks ([`embed`], [`harness`]).

pub mod embed;
pub mod error;
pub mod harness;
pub mod rng;
pub mod taxonomy;
pub mod tinynet;
pub mod warp;
pub mod wordgen;

pub use error::{Error, Result};
