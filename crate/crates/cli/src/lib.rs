//! Benchmark harness for the factorization toolkit: instance generation,
//! multi-solver campaigns with timing and summary tables, and the file
//! formats the command-line interface speaks.

pub mod campaign;
pub mod gen;
pub mod io;
pub mod smooth;
