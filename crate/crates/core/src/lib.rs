//! Tabular missing-data imputation with chained conditional adversarial
//! networks.
//!
//! Each incomplete column gets its own conditional generator, trained
//! against a discriminator with least-squares targets and an accuracy
//! penalty, and the columns are revisited in chained-equation sweeps until
//! the imputations stabilize. Several independent chains give multiple
//! imputations that can be pooled with Rubin's rules.
//!
//! Alongside the imputer the crate ships a missingness lab (equicorrelated
//! Gaussian data, MCAR/MAR/MNAR amputation), a mean/mode baseline, masked-cell
//! RMSE scoring and a Monte Carlo benchmark harness.

pub mod chained;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod gcin;
pub mod io;
pub mod lab;
pub mod nn;
pub mod rng;
pub mod transform;

pub use data::{Cell, ColumnKind, ColumnSchema, ColumnType, DataMatrix};
pub use error::{Error, Result};
