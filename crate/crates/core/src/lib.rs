//! Spectral solver and verification toolkit for the ε-perturbed scalar
//! V-soliton equation on flat Kähler tori of complex dimension 1 and 2.

pub mod error;
pub mod estimates;
pub mod fields;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod par;
pub mod reduction;
pub mod solver;

pub use error::{Error, Result};
