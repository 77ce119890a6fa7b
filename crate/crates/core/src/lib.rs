//! Fourier analysis of measures on the torus for metric Diophantine
//! approximation: transforms and decay exponents, lattice and linear-form
//! neighborhoods, plane measures, and numerical checks of the counting
//! inequalities that bound the Fourier dimension of well-approximable sets.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod fourier;
pub mod lattice;
pub mod measure;
pub mod quad;

pub use error::{Error, Result};
