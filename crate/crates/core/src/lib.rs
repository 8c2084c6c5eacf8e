pub mod cli;
pub mod error;
pub mod green;
pub mod inverse;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod potential;
pub mod projection;
pub mod spectral;
pub mod target;

pub use error::{Error, Result};
