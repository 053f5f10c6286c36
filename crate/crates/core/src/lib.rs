pub mod error;
pub mod experiments;
pub mod location;
pub mod models;
pub mod norms;
pub mod rng;
pub mod scatter;
pub mod stats;

pub use error::{Error, Result};
