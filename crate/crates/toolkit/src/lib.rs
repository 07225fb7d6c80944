//! Instance generators, file formats, benchmark harness and command-line
//! front end for `sockp-core`.

pub mod bench;
pub mod cli;
pub mod generate;
pub mod io;

pub use generate::{generate, Family, Generated, GeneratorSpec};
