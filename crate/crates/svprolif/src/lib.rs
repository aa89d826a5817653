//! File formats, parallel experiments and the `svprolif` command line on
//! top of [`svprolif_core`].

pub mod cli;
pub mod config;
pub mod experiments;
pub mod io;
pub mod manifest;

pub use svprolif_core as core;
