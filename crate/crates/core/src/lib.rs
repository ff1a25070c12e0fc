//! Heights of motives over `Q` from explicit realization data.

pub mod ball;
pub mod cmatrix;
pub mod error;
pub mod experiments;
pub mod fl;
pub mod hodge;
pub mod lines;
pub mod motive;

pub use error::{Error, Result};
