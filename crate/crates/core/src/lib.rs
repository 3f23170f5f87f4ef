//! Panel econometrics and Basel III regulatory cost simulation.
//!
//! - [`panel`]: bank-year panel storage, CSV ingestion, transforms.
//! - [`basel`]: NSFR and TCE/RWA calculators, phase-in schedule, compliance.
//! - [`econometrics`]: within estimator with Driscoll–Kraay errors,
//!   Harris–Tzavalis unit-root test.
//! - [`model`]: the spread / lending / ROE system, simulator and shock engine.
//! - [`cli`]: the `basel-panel` command-line front end.

pub mod basel;
pub mod cli;
pub mod econometrics;
pub mod error;
pub mod model;
pub mod panel;
pub mod text;

pub use error::{Error, ErrorKind, Result};
