//! Exact closed-form solutions of linear partial difference equations with
//! constant rational coefficients, checked against direct iteration.
//!
//! An equation is described by an [`lattice::EquationSpec`]; values come
//! from [`closed_form::ClosedForm`] or from the oracle in [`oracle`], and
//! [`app`] turns a JSON [`config`] into tables and verification reports.

pub mod app;
pub mod closed_form;
pub mod combinatorics;
pub mod config;
pub mod exactnum;
pub mod lattice;
pub mod models;
pub mod oracle;
