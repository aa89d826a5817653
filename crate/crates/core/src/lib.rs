//! Numerical core for studying support vector proliferation in the
//! hard-margin SVM.
//!
//! Everything here is `no_std` + `alloc`: dense linear algebra, seeded random
//! ensembles, the sign-constrained dual solver, the ridgeless interpolator
//! with its leave-one-out characterisation, and closed-form probability
//! bounds. File formats, parallel sweeps and the command line live in the
//! `svprolif` companion crate.
//!
//! The data model is `x_i = diag(lambda)^{1/2} z_i` with a diagonal,
//! strictly positive `lambda` ([`spectra::Spectrum`]) and a raw feature
//! matrix `Z` drawn by one of the samplers in [`ensembles`].
#![no_std]

extern crate alloc;

pub mod bounds;
pub mod ensembles;
pub mod equivalence;
mod error;
pub mod kernel;
pub mod linalg;
pub mod numeric;
pub mod spectra;
pub mod svm;

pub use error::{Error, Result};
