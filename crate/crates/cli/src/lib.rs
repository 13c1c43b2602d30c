//! Command-line front end: expression and spec parsing plus command dispatch.

pub mod app;
pub mod families;
pub mod parse;
pub mod spec;
pub mod suite;

pub use app::{run, Outcome};
