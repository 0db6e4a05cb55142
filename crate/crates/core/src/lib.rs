pub mod error;
pub mod linalg;
pub mod lorentz;

pub use error::{Error, Result};
pub mod planewave;
pub mod lie;
pub mod criteria;
pub mod oracle;
pub mod sampling;
pub mod verify;
pub mod io;
pub mod cli;
