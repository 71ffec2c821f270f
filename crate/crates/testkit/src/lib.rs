//! Reference algorithms, seeded generators and the corpus runner used by
//! the matlang test suites and the `run-corpus` command.

#![allow(clippy::needless_range_loop)]

pub mod gen;
pub mod oracles;
pub mod suite;
