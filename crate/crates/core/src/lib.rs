//! Prediction intervals for individual treatment effects built from
//! treatment-conditional conformal inference.
//!
//! Each treatment arm gets its own conformal interval (full or split), and the
//! two arm intervals are combined into an interval for `Y(1) - Y(-1)`.

pub mod cli;
pub mod conformal;
pub mod config;
pub mod data;
pub mod error;
pub mod ite;
pub mod linalg;
pub mod nonconformity;
pub mod predictors;
pub mod sim;

pub use data::{ArmIntervalPair, Dataset, ExtInterval, Observation, TreatmentArm};
pub use error::{Error, Result};
