//! Zak-OTFS radar sensing toolkit.

pub mod ambiguity;
pub mod dd;
pub mod error;
pub mod experiments;
pub mod filters;
pub mod io;
pub mod numerics;
pub mod receiver;
pub mod scene;

pub use error::{Error, Result};
pub use num_complex::Complex64 as ComplexValue;
