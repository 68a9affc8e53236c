//! Lossless compression with sequence predictors driving an arithmetic
//! coder, and the harness for measuring it.

pub mod artifacts;
pub mod bridge;
pub mod codecs;
pub mod coder;
pub mod container;
pub mod datapipe;
pub mod error;
pub mod eval;
pub mod generate;
pub mod predictors;
pub mod tokenize;

pub use error::{Error, Result};
