//! Energy-preserving discrete gradient methods of arbitrary order.

pub mod bench;
pub mod cli;
pub mod dg;
pub mod error;
pub mod integrator;
pub mod sbar;
pub mod system;
pub mod trees;

pub use error::{Error, Result};

/// State vectors.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrices.
pub type Matrix = nalgebra::DMatrix<f64>;
