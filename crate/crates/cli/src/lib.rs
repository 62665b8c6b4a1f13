//! Command-line front end for the `kgamma` library.

pub mod args;
pub mod report;
pub mod run;
