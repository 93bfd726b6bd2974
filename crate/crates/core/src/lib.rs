//! Nuclear morphometry from segmentation masks and polygon annotations,
//! emulation of manual sampling protocols, and the statistics used to
//! evaluate segmentation accuracy, rater agreement, prognostic value and
//! intra-tumoral heterogeneity.

pub mod biostats;
pub mod cli;
pub mod descriptive;
pub mod error;
pub mod geometry;
pub mod heterogeneity;
pub mod io;
pub mod morphometry;
pub mod sampling;
pub mod seg_eval;
pub mod synth;

pub use error::{Error, Result};
