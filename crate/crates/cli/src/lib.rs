//! Command-line front end: loads port, route and country tables, builds the
//! liner shipping network, and writes index, regression and gravity reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod fixture;
pub mod inputs;
pub mod provenance;
