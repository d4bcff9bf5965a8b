//! File formats, configuration, parallel Monte Carlo drivers and the
//! command-line front end for `rankest-core`.

pub mod cli;
pub mod config;
pub mod io;
pub mod lab;
pub mod report;
