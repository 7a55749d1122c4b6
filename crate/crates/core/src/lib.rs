//! Exact combinatorics of carries in balanced (signed-digit) addition.
//!
//! * [`numeral`]: balanced numerals, column addition with carry traces.
//! * [`chain`]: the carries transition matrix and its oracles.
//! * [`spectral`]: eigenvectors, signed Eulerian numbers, the stationary law.
//! * [`pointprocess`]: carries down a single column as a determinantal process.
//! * [`simulate`]: seeded Monte Carlo checks of both processes.

pub mod chain;
pub mod error;
pub mod linalg;
pub mod numeral;
pub mod pointprocess;
pub mod poly;
pub mod rational;
pub mod simulate;
pub mod spectral;
pub mod wire;

pub use error::{Error, Result};
pub use rational::Rational;
