//! Exact workbench for kneading maps, generalized odometers, the associated
//! Bratteli-Vershik systems and their simplices of invariant measures.

pub mod bratteli;
pub mod error;
pub mod fixed;
pub mod interval;
pub mod kneading;
pub mod odometer;
pub mod rational;
pub mod runs;
pub mod simplex;

pub use error::{Error, Result};
