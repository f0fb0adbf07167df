pub mod error;
pub mod linalg;
pub mod rng;
pub mod sparse;
pub use error::{Error, Result};
