//! Command line and HTTP front end for `fomet`.

pub mod commands;
pub mod service;
