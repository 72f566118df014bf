//! Verification suites and commands behind the `requnet` binary.

pub mod commands;
pub mod random;
pub mod suites;
