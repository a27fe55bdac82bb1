//! Coherent states of the free particle, their images under polynomial
//! symmetry operators and under Crum–Darboux transformations to
//! multisoliton potentials, together with numerical checks of the
//! corresponding resolutions of the identity.

pub mod banded;
pub mod cli;
pub mod basis;
pub mod coherent;
pub mod config;
pub mod darboux;
pub mod error;
pub mod grid;
pub mod poly;
pub mod quadrature;
pub mod report;
pub mod resolution;
pub mod state;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
