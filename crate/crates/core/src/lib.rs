//! Spectral tools for boundary loops of holomorphic maps: Hardy splittings of
//! truncated Fourier loops, the standard node and its gluing map, holomorphic
//! extension tests, finite-dimensional Fredholm intersection theory, and the
//! index and dimension formulas for moduli of stable maps.

pub mod cli;
pub mod complex_io;
pub mod degeneration;
pub mod error;
pub mod extension;
pub mod fredholm;
pub mod linalg;
pub mod loops;
pub mod moduli_index;
pub mod node_model;
pub mod sampling;

pub use error::{Error, Result};
pub use loops::{HardyPart, Loop};
