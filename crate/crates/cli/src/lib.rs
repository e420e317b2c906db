//! Batch front end for the `hjnet` solver: problem files, commands and the
//! expression language used inside them.

pub mod commands;
pub mod config;
pub mod expr;
