pub mod conic;
pub mod coordination;
pub mod error;
pub mod evaluation;
pub mod linalg;
pub mod power;
pub mod rzf;
pub mod scenario;
pub mod sim;
pub mod solution;

pub use error::{Error, Result};
