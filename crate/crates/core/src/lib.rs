//! Bounded-cohomology toolkit for the free group on two generators and its
//! induced cochains on finger-pushing transformations of a model surface.

pub mod cochains;
pub mod eightmodel;
pub mod homotopy;
pub mod hypervol;
pub mod induce;
pub mod quadrature;
pub mod rng;
pub mod words;

pub use cochains::{Cochain, CochainError, Quasimorphism, SharedCochain};
pub use words::{Generator, Letter, Word};
