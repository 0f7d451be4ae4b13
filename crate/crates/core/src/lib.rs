//! Symbolic-numeric exterior calculus for p-form gauge fields on the retarded
//! Bondi chart of D-dimensional Minkowski space.
//!
//! Fields are polyhomogeneous series in `r` whose coefficients are polynomials
//! in `u` times exact trigonometric monomials on the celestial sphere, so the
//! exterior derivative and the Hodge star act exactly on the representation.
//! On top of that sit the asymptotic electric-like, magnetic-like and
//! electromagnetic-like charges, their duality relations, and the
//! higher-form-symmetry charges built from the closed dual current.
//!
//! Orientation convention: `(u, r, θ₁, …, θ_{D−2})` is positively oriented,
//! i.e. `ε_{u r θ₁ … θ_{D−2}} = +1`. Every sign produced by a Hodge star in
//! this crate follows from that single choice.

pub mod angular;
pub mod charges;
pub mod cli;
pub mod error;
pub mod exterior;
pub mod forms;
pub mod geometry;
pub mod halfint;
pub mod higher;
pub mod quadrature;
pub mod sample;
pub mod series;

pub use error::{Error, Result};
pub use num_complex::Complex64;
