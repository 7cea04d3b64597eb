//! Library side of the `hodlr` command-line tool: the benchmark sweep, the
//! verification suites, and the file-based solver, kept separate from
//! argument parsing so integration tests can drive them directly.

pub mod bench;
pub mod solve;
pub mod verify;
