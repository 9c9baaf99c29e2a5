pub mod cli;
pub mod error;
pub mod experiments;
pub mod fgn_model;
pub mod fisher;
pub mod likelihood;
pub mod rate_matrix;
pub mod simulate;
pub mod toeplitz;

pub use error::{Error, Result};
pub use fgn_model::{Hurst, Theta};
