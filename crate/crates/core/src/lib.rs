//! Decomposition of network traffic matrices into deterministic, anomaly and
//! noise traffic.
//!
//! A traffic matrix holds one row per measurement period and one column per
//! origin-destination flow. The main decomposer confines deterministic traffic
//! to a smooth wavelet approximation space and bounds noise coefficient-wise in
//! the wavelet domain; PCA, PCP and stable PCP baselines are provided for
//! comparison, together with a labelled traffic simulator and an evaluation
//! harness.

pub mod cli;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod operators;
pub mod simulator;
pub mod solver;
pub mod wavelet;

pub use error::{Error, Result};

/// Real `T x P` matrix: rows are time periods, columns are OD flows.
pub type TrafficMatrix = nalgebra::DMatrix<f64>;
