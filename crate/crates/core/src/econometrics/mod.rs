//! Estimation engine: within (fixed-effects) least squares, pooled OLS,
//! Driscoll–Kraay covariance, and the Harris–Tzavalis panel unit-root test.

mod dk;
mod fit;
mod report;
mod unitroot;

pub use dk::{auto_bandwidth, bartlett_weight, driscoll_kraay_meat};
pub use fit::{fit_within_dk, pooled_ols};
pub use report::{format_fit_table, format_unit_root_table};
pub use unitroot::{harris_tzavalis, ht_moments, UnitRootResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name given to the intercept term in coefficient tables.
pub const INTERCEPT: &str = "const";

/// Driscoll–Kraay lag truncation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// `floor(4 (T/100)^(2/9))`
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    #[default]
    DriscollKraay,
    /// Homoskedastic `s^2 (X'X)^-1`.
    Conventional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionSpec {
    pub dependent: String,
    pub regressors: Vec<String>,
    pub include_intercept: bool,
    pub fixed_effects: bool,
    pub dk_bandwidth: Bandwidth,
    #[serde(default)]
    pub covariance: CovarianceKind,
}

impl RegressionSpec {
    /// Fixed effects with intercept and automatic DK bandwidth.
    pub fn new(dependent: &str, regressors: &[&str]) -> Self {
        RegressionSpec {
            dependent: dependent.to_string(),
            regressors: regressors.iter().map(|s| s.to_string()).collect(),
            include_intercept: true,
            fixed_effects: true,
            dk_bandwidth: Bandwidth::Auto,
            covariance: CovarianceKind::DriscollKraay,
        }
    }

    pub fn with_bandwidth(mut self, bandwidth: Bandwidth) -> Self {
        self.dk_bandwidth = bandwidth;
        self
    }

    pub fn with_intercept(mut self, include: bool) -> Self {
        self.include_intercept = include;
        self
    }

    pub fn with_fixed_effects(mut self, fe: bool) -> Self {
        self.fixed_effects = fe;
        self
    }

    pub fn with_covariance(mut self, kind: CovarianceKind) -> Self {
        self.covariance = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.regressors.is_empty() {
            return Err(Error::InvalidArgument("no regressors given".into()));
        }
        for (i, r) in self.regressors.iter().enumerate() {
            // a repeated regressor is an exact collinearity
            if self.regressors[..i].contains(r) {
                return Err(Error::RankDeficient {
                    columns: vec![r.clone()],
                });
            }
        }
        if self.regressors.contains(&self.dependent) {
            return Err(Error::InvalidArgument(format!(
                "dependent variable {:?} is also a regressor",
                self.dependent
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    /// `None` when the standard error is zero.
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    #[serde(rename = "bank_id")]
    pub entity: String,
    pub year: i32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub dependent: String,
    pub fixed_effects: bool,
    pub covariance_kind: CovarianceKind,
    /// Intercept first (when present), then regressors in spec order.
    pub coefficients: Vec<Coefficient>,
    pub covariance: Vec<Vec<f64>>,
    pub residuals: Vec<Residual>,
    /// Within R² under fixed effects; `None` when the dependent has no variation.
    pub r_squared: Option<f64>,
    pub n_obs: usize,
    pub n_entities: usize,
    pub t_used: usize,
    pub df_resid: usize,
    /// DK lag truncation actually applied (0 for conventional covariance).
    pub bandwidth: usize,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.coefficient(name).map(|c| c.estimate)
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.coefficient(name).map(|c| c.std_error)
    }

    pub fn intercept(&self) -> Option<f64> {
        self.estimate(INTERCEPT)
    }
}
