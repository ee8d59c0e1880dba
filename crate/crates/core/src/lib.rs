//! Exact symbolic operator calculus on a step-3 nilpotent group, the
//! associated coherent state transform, order reduction of geometrisable
//! quadratic Hamiltonians, and the numeric pipeline validating it.

pub mod cst;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod group_reps;
pub mod io;
pub mod oracle;
pub mod params;
pub mod reduction;
pub mod symalg;

pub use error::{NumericError, ReductionError, SymError};
pub use params::ModelParams;
