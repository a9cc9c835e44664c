//! Ensemble runner, quantile tables and command-line front end for the
//! `steincond` library.

pub mod cli;
pub mod quantile;
pub mod runner;
pub mod table;
