//! Finite-N Kuramoto and Kuramoto–Daido oscillators, their continuum limit
//! solved along characteristics, and the moments system both obey.
//!
//! The guide under `book/` walks through each piece; its code blocks are
//! compiled as doctests of this crate.

pub mod continuum;
pub mod coupling;
pub mod error;
pub mod harness;
pub mod io;

pub mod measures;
mod meanfield;

pub mod momentsys;
pub mod ode;
pub mod orthopoly;
pub mod oscillators;
pub mod rng;
mod tridiag;

pub use num_complex::Complex64;

pub use coupling::Coupling;
pub use error::{Error, ErrorCategory, Result};
pub use measures::{DiscretizedMeasure, FrequencyLaw, MeasureSpec, PhaseLaw};
pub use orthopoly::RecurrenceCoefficients;
pub use oscillators::OscillatorState;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod chapter0 {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/measures.md")]
mod chapter1 {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/oscillators.md")]
mod chapter2 {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/continuum.md")]
mod chapter3 {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/moments.md")]
mod chapter4 {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/harness.md")]
mod chapter5 {}
