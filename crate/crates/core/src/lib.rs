pub mod cli;
pub mod diracfield;
pub mod dressing;
pub mod emfield;
pub mod error;
pub mod geometry;
pub mod koopman;
pub mod oscillator;
pub mod packets;
pub mod report;
pub mod scalar;
pub mod shell;
pub mod spectral;

pub use error::{Error, Result};
pub use report::Report;
