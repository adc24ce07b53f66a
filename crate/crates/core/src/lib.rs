//! Topic extraction from short posts and negative binomial regression of
//! engagement counts on topic weights.

pub mod cli;
pub mod countreg;
pub mod design;
pub mod error;
pub mod ingest;
pub mod lda;
pub mod matrix;
pub mod modelsel;
pub mod report;
pub mod synth;
pub mod textproc;

pub use error::{Error, ExitKind, Result};
