//! Scattering resonances (quasinormal modes) of the wave equation on the
//! De Sitter-Schwarzschild exterior, computed from Jost solutions and
//! Wronskian zeros, together with a time-domain solver and the resonance
//! expansion of the cut-off propagator.

pub mod acceptance;
pub mod background;
pub mod config;
pub mod error;
pub mod evolve;
pub mod expand;
pub mod jost;
pub mod ode;
pub mod resolvent;
pub mod series;
pub mod spectrum;

pub use error::{Error, Result};
