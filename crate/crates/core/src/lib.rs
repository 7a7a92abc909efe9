//! Exact twisted loop algebras of symmetrizable Kac-Moody algebras.

pub mod autos;
pub mod cli;
pub mod decide;
pub mod erasing;
pub mod error;
pub mod forms;
pub mod gcm;
pub mod liealg;
pub mod loops;
pub mod linalg;
pub mod scalars;

pub use error::{Error, Result};
pub use gcm::{CartanType, Gcm, Realization};
pub use scalars::{CycNum, Rat};
