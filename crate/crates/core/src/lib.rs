//! Liner shipping network analysis for country-level trade status.
//!
//! The pipeline runs in five stages, one module each:
//!
//! - [`ingest`]: parse and validate route, port, economic and bilateral-trade tables.
//! - [`graph`]: project every service route onto a clique of its ports and sum the
//!   per-route weights into a port network.
//! - [`indices`]: country connectivity, country brokerage over valid shortest paths,
//!   and Freeman betweenness aggregated to countries.
//! - [`econometrics`]: standardized OLS, VIF, AIC and exhaustive subset selection.
//! - [`gravity`]: log-linear gravity models of bilateral trade and their extensions.

// `!(x > 0.0)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod econometrics;
pub mod error;
pub mod graph;
pub mod gravity;
pub mod indices;
pub mod ingest;
mod sum;

pub use error::{Error, Result};
pub use graph::{build_glsn, Glsn, WeightScheme};
pub use indices::{CountryIndexTable, CountryIndices};
pub use ingest::{BilateralRecord, CountryEcon, Port, ServiceRoute};
