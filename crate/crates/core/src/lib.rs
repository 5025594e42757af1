//! A prioritized asynchronous toy language: methods post calls to each
//! other at high, medium or low priority, and a serial scheduler runs the
//! posted calls highest priority first, oldest first within a priority.
//!
//! * [`syntax`]: parser, canonical printer, scope checker.
//! * [`postlist`]: the three-region post list and a brute-force oracle.
//! * [`interp`]: the evaluator and dispatch loop, with JSON Lines traces.
//! * [`analysis`]: flags posts whose target can never affect the global.
//! * [`gen`]: seeded random program generator used by the test suites.
//! * [`cli`]: the `asynchp` command-line front end.

pub mod analysis;
pub mod cli;
pub mod gen;
pub mod interp;
pub mod postlist;
pub mod syntax;

pub use interp::{run_program, Outcome, RuntimeError, RuntimeErrorKind};
pub use syntax::{parse_program, pretty_print, validate_scopes, ParseError, Program, ScopeError};
