//! Numerical toolkit for b^m-symplectic structures on the tubular model
//! Z × (-1,1), Z a torus: Laurent-data models, desingularizing profiles,
//! the desingularized forms ω_ε and their verification (symplecticity,
//! foldedness, coincidence, bivector convergence), singular volume
//! asymptotics, and moment-map images.

pub mod desing;
pub mod error;
pub mod forms;
pub mod model;
pub mod moment;
pub mod profile;
pub mod report;
pub mod spec;
pub mod volume;

pub use error::{Error, Result};
