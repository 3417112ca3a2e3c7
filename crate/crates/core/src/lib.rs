pub mod equivalence;
pub mod error;
pub mod fit;
pub mod generate;
pub mod harness;
pub mod io;
pub mod geometry;
pub mod linalg;
pub mod optim;
pub mod revolution;
pub mod sampling;

pub use error::{GeomError, Result};
