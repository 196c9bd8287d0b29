//! Fourth-order deferred-correction finite differences for free and moving
//! boundary problems posed as linear complementarity problems.

pub mod bvp;
pub mod convergence;
pub mod error;
pub mod fdcore;
pub mod greens;
pub mod grid;
pub mod ivp;
pub mod jump;
pub mod model;
pub mod option;
pub mod penalty;
pub mod special;
pub mod study;

pub use error::{Error, Result};
